//! Matrix Lie algebras, orbit dimensions through the infinitesimal action,
//! and the stabilizer element `v₀` acting on `𝔤`.
//!
//! Algebras are stored as a list of `N×N` basis matrices. Coordinates of an
//! element are found from the normal equations `MᵀM·c = Mᵀz` on the flattened
//! basis `M`, which works for both fields.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{
    enumerate_labels, standard_representative, OrbitLabel, QuadraticSpace, SubspacePoint,
    SubspacePointDoc,
};
use crate::isotropic::{
    enumerate_isotropic_labels, standard_isotropic_representative, AdaptedBasis, ComplexStructure,
    Duality, IsotropicLabel, IsotropicPoint, IsotropicPointDoc,
};
use crate::numeric::{self, Field, FieldKind, TolerancePolicy, AMBIGUITY_BAND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AlgebraName {
    /// `sl(n,ℝ)`.
    Sl { n: usize },
    /// `so(p,q)` of `diag(I_p, −I_q)`, or of a general form with that inertia.
    So { p: usize, q: usize },
    /// `so(n,ℂ)` acting on `ℂⁿ = ℝ²ⁿ`.
    SoComplexRealified { n: usize },
    /// `so(n,n)` of the split form `Im b` on `ℝ²ⁿ`.
    SoSplit { n: usize },
}

impl AlgebraName {
    pub fn classical_dimension(&self) -> usize {
        match *self {
            AlgebraName::Sl { n } => n * n - 1,
            AlgebraName::So { p, q } => (p + q) * (p + q).saturating_sub(1) / 2,
            AlgebraName::SoComplexRealified { n } => n * n.saturating_sub(1),
            AlgebraName::SoSplit { n } => n * (2 * n).saturating_sub(1),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            AlgebraName::Sl { n } => n,
            AlgebraName::So { p, q } => p + q,
            AlgebraName::SoComplexRealified { n } | AlgebraName::SoSplit { n } => 2 * n,
        }
    }
}

impl fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraName::Sl { n } => write!(f, "sl({n},R)"),
            AlgebraName::So { p, q } => write!(f, "so({p},{q})"),
            AlgebraName::SoComplexRealified { n } => write!(f, "so({n},C)-realified"),
            AlgebraName::SoSplit { n } => write!(f, "so({n},{n})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatrixLieAlgebra<T: Field> {
    pub name: AlgebraName,
    pub ambient_dim: usize,
    pub basis: Vec<DMatrix<T>>,
    /// Forms `F` with `XᵀF + FX = 0` for every element.
    pub invariant_forms: Vec<DMatrix<T>>,
}

fn unit<T: Field>(n: usize, i: usize, j: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = T::one();
    m
}

fn flatten<T: Field>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(m.len(), m.iter().cloned())
}

pub fn commutator<T: Field>(x: &DMatrix<T>, y: &DMatrix<T>) -> DMatrix<T> {
    x * y - y * x
}

/// Basis `G⁻¹(E_ij − E_ji)`, `i < j`, of the algebra of `form`.
fn orthogonal_basis<T: Field>(form: &DMatrix<T>) -> Result<Vec<DMatrix<T>>> {
    let n = form.nrows();
    let ginv = numeric::inverse(form)?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(&ginv * (unit::<T>(n, i, j) - unit::<T>(n, j, i)));
        }
    }
    Ok(out)
}

pub fn build_algebra<T: Field>(name: AlgebraName, tol: &TolerancePolicy) -> Result<MatrixLieAlgebra<T>> {
    let algebra = match name {
        AlgebraName::Sl { n } => {
            if n < 2 {
                return Err(Error::Invalid(format!("sl({n}) needs n ≥ 2")));
            }
            let mut basis = Vec::with_capacity(n * n - 1);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        basis.push(unit(n, i, j));
                    }
                }
            }
            for i in 0..n - 1 {
                basis.push(unit::<T>(n, i, i) - unit::<T>(n, n - 1, n - 1));
            }
            MatrixLieAlgebra {
                name,
                ambient_dim: n,
                basis,
                invariant_forms: Vec::new(),
            }
        }
        AlgebraName::So { p, q } => {
            if p + q == 0 {
                return Err(Error::Invalid(format!("so({p},{q}) needs p + q ≥ 1")));
            }
            let form = numeric::signature_form::<T>(p, q);
            MatrixLieAlgebra {
                name,
                ambient_dim: p + q,
                basis: orthogonal_basis(&form)?,
                invariant_forms: vec![form],
            }
        }
        AlgebraName::SoSplit { n } => {
            if n < 1 {
                return Err(Error::Invalid("so(n,n) needs n ≥ 1".into()));
            }
            let s = crate::isotropic::standard_structure::<T>(n)?;
            MatrixLieAlgebra {
                name,
                ambient_dim: 2 * n,
                basis: orthogonal_basis(&s.b_imag)?,
                invariant_forms: vec![s.b_imag],
            }
        }
        AlgebraName::SoComplexRealified { n } => {
            if n < 2 {
                return Err(Error::Invalid(format!("so({n},C) needs n ≥ 2")));
            }
            let s = crate::isotropic::standard_structure::<T>(n)?;
            // A + iB with A, B skew, realified as [[A, −B], [B, A]]
            let mut basis = Vec::with_capacity(n * (n - 1));
            for imaginary in [false, true] {
                for i in 0..n {
                    for j in i + 1..n {
                        let skew = unit::<T>(n, i, j) - unit::<T>(n, j, i);
                        let mut m = DMatrix::zeros(2 * n, 2 * n);
                        if imaginary {
                            m.view_mut((0, n), (n, n)).copy_from(&(-skew.clone()));
                            m.view_mut((n, 0), (n, n)).copy_from(&skew);
                        } else {
                            m.view_mut((0, 0), (n, n)).copy_from(&skew);
                            m.view_mut((n, n), (n, n)).copy_from(&skew);
                        }
                        basis.push(m);
                    }
                }
            }
            MatrixLieAlgebra {
                name,
                ambient_dim: 2 * n,
                basis,
                invariant_forms: vec![s.b_imag, s.b_real],
            }
        }
    };
    algebra.validate(tol)?;
    Ok(algebra)
}

/// The algebra of a general nondegenerate quadratic space, tagged by its
/// inertia.
pub fn orthogonal_algebra<T: Field>(space: &QuadraticSpace<T>, tol: &TolerancePolicy) -> Result<MatrixLieAlgebra<T>> {
    let algebra = MatrixLieAlgebra {
        name: AlgebraName::So {
            p: space.p(),
            q: space.q(),
        },
        ambient_dim: space.dimension(),
        basis: orthogonal_basis(space.form())?,
        invariant_forms: vec![space.form().clone()],
    };
    algebra.validate(tol)?;
    Ok(algebra)
}

/// Coordinates of `z` in the span of the columns of `m` and the residual
/// `‖M·c − z‖`.
fn span_coordinates<T: Field>(m: &DMatrix<T>, z: &DMatrix<T>) -> Result<(DMatrix<T>, f64)> {
    let gram = m.transpose() * m;
    let c = numeric::solve(&gram, &(m.transpose() * z))?;
    let resid = numeric::to_f64_matrix(&(m * &c - z)).norm();
    Ok((c, resid))
}

fn residual_ok<T: Field>(resid: f64, scale: f64, tol: &TolerancePolicy) -> bool {
    match T::KIND {
        FieldKind::Rational => resid == 0.0,
        _ => resid <= AMBIGUITY_BAND * tol.threshold(scale),
    }
}

impl<T: Field> MatrixLieAlgebra<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Flattened basis, one column per element.
    pub fn flat_basis(&self) -> DMatrix<T> {
        let n2 = self.ambient_dim * self.ambient_dim;
        let mut m = DMatrix::zeros(n2, self.dim());
        for (j, x) in self.basis.iter().enumerate() {
            m.set_column(j, &flatten(x));
        }
        m
    }

    /// Coordinates of each column of `zs` (flattened elements) in the basis.
    pub fn coordinates(&self, zs: &DMatrix<T>, tol: &TolerancePolicy) -> Result<DMatrix<T>> {
        let (c, resid) = span_coordinates(&self.flat_basis(), zs)?;
        let scale = numeric::to_f64_matrix(zs).norm().max(1.0);
        if !residual_ok::<T>(resid, scale, tol) {
            return Err(Error::Consistency(format!(
                "element outside {} (residual {resid:.3e})",
                self.name
            )));
        }
        Ok(c)
    }

    /// Largest residual of `[X, Y]` against the span over all basis pairs.
    pub fn closure_residual(&self) -> Result<f64> {
        let d = self.dim();
        if d == 0 {
            return Ok(0.0);
        }
        let mut brackets = DMatrix::zeros(self.ambient_dim * self.ambient_dim, d * (d - 1) / 2);
        let mut col = 0;
        for i in 0..d {
            for j in i + 1..d {
                brackets.set_column(col, &flatten(&commutator(&self.basis[i], &self.basis[j])));
                col += 1;
            }
        }
        let m = self.flat_basis();
        let (c, _) = span_coordinates(&m, &brackets)?;
        let resid = numeric::to_f64_matrix(&(&m * c - &brackets));
        Ok(resid.column_iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        let expected = self.name.classical_dimension();
        let rank = numeric::rank_of(&self.flat_basis(), tol);
        if self.dim() != expected || rank != expected {
            return Err(Error::Consistency(format!(
                "{} has {} elements of rank {rank}, expected {expected}",
                self.name,
                self.dim()
            )));
        }
        let resid = self.closure_residual()?;
        if !residual_ok::<T>(resid, 1.0, tol) {
            return Err(Error::Consistency(format!(
                "{} is not closed under brackets (residual {resid:.3e})",
                self.name
            )));
        }
        for f in &self.invariant_forms {
            for x in &self.basis {
                let r = numeric::to_f64_matrix(&(x.transpose() * f + f * x)).norm();
                if !residual_ok::<T>(r, 1.0, tol) {
                    return Err(Error::Consistency(format!("{} does not preserve its form", self.name)));
                }
            }
        }
        Ok(())
    }

    /// Matrix of `ad X` on the basis.
    pub fn ad(&self, x: &DMatrix<T>, tol: &TolerancePolicy) -> Result<DMatrix<T>> {
        let d = self.dim();
        let mut brackets = DMatrix::zeros(self.ambient_dim * self.ambient_dim, d);
        for (j, e) in self.basis.iter().enumerate() {
            brackets.set_column(j, &flatten(&commutator(x, e)));
        }
        self.coordinates(&brackets, tol)
    }

    /// `ad` of every basis element, from one batched coordinate solve.
    pub fn ad_basis(&self, tol: &TolerancePolicy) -> Result<Vec<DMatrix<T>>> {
        let d = self.dim();
        let mut brackets = DMatrix::zeros(self.ambient_dim * self.ambient_dim, d * d);
        for (i, x) in self.basis.iter().enumerate() {
            for (j, e) in self.basis.iter().enumerate() {
                brackets.set_column(i * d + j, &flatten(&commutator(x, e)));
            }
        }
        let c = self.coordinates(&brackets, tol)?;
        Ok((0..d).map(|i| c.columns(i * d, d).into_owned()).collect())
    }

    /// Killing form `tr(ad X · ad Y)` on the basis.
    pub fn killing_form(&self, tol: &TolerancePolicy) -> Result<DMatrix<T>> {
        killing_from_ads(&self.ad_basis(tol)?)
    }
}

fn killing_from_ads<T: Field>(ads: &[DMatrix<T>]) -> Result<DMatrix<T>> {
    // tr(AB) = <vec A, vec Bᵀ>
    let d = ads.len();
    let flat: Vec<DVector<T>> = ads.iter().map(flatten).collect();
    let flat_t: Vec<DVector<T>> = ads.iter().map(|a| flatten(&a.transpose())).collect();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        flat[i]
            .iter()
            .zip(flat_t[j].iter())
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }))
}

/// A point where an algebra acts through its defining representation.
#[derive(Debug)]
pub enum PointRef<'a, T: Field> {
    Subspace(&'a SubspacePoint<T>),
    Isotropic(&'a IsotropicPoint<T>),
}

impl<T: Field> Clone for PointRef<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T: Field> Copy for PointRef<'_, T> {}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointDoc {
    Subspace(SubspacePointDoc),
    Isotropic(IsotropicPointDoc),
}

impl<T: Field> PointRef<'_, T> {
    fn basis(&self) -> &DMatrix<T> {
        match self {
            PointRef::Subspace(v) => v.basis(),
            PointRef::Isotropic(v) => v.basis(),
        }
    }

    /// Dimension of the ambient variety `G/P`.
    pub fn variety_dim(&self) -> usize {
        match self {
            PointRef::Subspace(v) => v.dim() * (v.ambient().dimension() - v.dim()),
            PointRef::Isotropic(v) => v.n() * (v.n() - 1) / 2,
        }
    }

    pub fn doc(&self) -> PointDoc {
        match self {
            PointRef::Subspace(v) => PointDoc::Subspace(SubspacePointDoc::of(*v)),
            PointRef::Isotropic(v) => PointDoc::Isotropic(IsotropicPointDoc::of(*v)),
        }
    }
}

/// Left annihilator of `span(B)`: rows spanning `(ℝᴺ/V)*`.
fn annihilator<T: Field>(b: &DMatrix<T>, tol: &TolerancePolicy) -> DMatrix<T> {
    T::nullspace(&b.transpose(), tol).transpose()
}

/// Chart coordinates of the tangent vector `X·V`.
///
/// Grassmannian: `L·X·B` in `Hom(V, ℝᴺ/V)` with `L` an annihilator of `V`.
/// Isotropic: the upper triangle of the skew matrix `Bᵀ·G·X·B`, the
/// `Λ²V*` model of the tangent space.
pub struct TangentModel<T: Field> {
    kind: TangentKind<T>,
    b: DMatrix<T>,
}

enum TangentKind<T: Field> {
    Grassmann { annihilator: DMatrix<T> },
    Isotropic { gram: DMatrix<T> },
}

impl<T: Field> TangentModel<T> {
    pub fn at(point: PointRef<'_, T>, tol: &TolerancePolicy) -> Self {
        let b = point.basis().clone();
        let kind = match point {
            PointRef::Subspace(_) => TangentKind::Grassmann {
                annihilator: annihilator(&b, tol),
            },
            PointRef::Isotropic(v) => TangentKind::Isotropic {
                gram: b.transpose() * &v.structure().b_imag,
            },
        };
        TangentModel { kind, b }
    }

    pub fn chart_dim(&self) -> usize {
        let i = self.b.ncols();
        match &self.kind {
            TangentKind::Grassmann { annihilator } => annihilator.nrows() * i,
            TangentKind::Isotropic { .. } => i * (i - 1) / 2,
        }
    }

    /// Chart coordinates of a displacement `Ẋ` of the basis (`N×i`).
    pub fn coordinates(&self, xb: &DMatrix<T>) -> DVector<T> {
        match &self.kind {
            TangentKind::Grassmann { annihilator } => flatten(&(annihilator * xb)),
            TangentKind::Isotropic { gram } => {
                let s = gram * xb;
                let i = s.nrows();
                let mut out = Vec::with_capacity(i * (i - 1) / 2);
                for a in 0..i {
                    for c in a + 1..i {
                        out.push(s[(a, c)].clone());
                    }
                }
                DVector::from_vec(out)
            }
        }
    }

    /// One column per algebra basis element.
    pub fn tangent_matrix(&self, h: &MatrixLieAlgebra<T>) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.chart_dim(), h.dim());
        for (j, x) in h.basis.iter().enumerate() {
            m.set_column(j, &self.coordinates(&(x * &self.b)));
        }
        m
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSubalgebraReport {
    pub algebra: AlgebraName,
    pub point: PointDoc,
    pub dim_h: usize,
    pub dim_h_cap_p: usize,
    pub orbit_dim: usize,
    pub orbit_codim: usize,
    pub variety_dim: usize,
    /// Distance of the rank decision from the tolerance band (floats only).
    pub margin: Option<f64>,
}

pub fn tangent_map_rank<T: Field>(
    h: &MatrixLieAlgebra<T>,
    point: PointRef<'_, T>,
    tol: &TolerancePolicy,
) -> Result<StabilizerSubalgebraReport> {
    if point.basis().nrows() != h.ambient_dim {
        return Err(Error::Dimension(format!(
            "{} acts on R^{} but the point lives in R^{}",
            h.name,
            h.ambient_dim,
            point.basis().nrows()
        )));
    }
    let model = TangentModel::at(point, tol);
    let m = model.tangent_matrix(h);
    let report = T::rank_report(&m, tol);
    let orbit_dim = report.certified().map_err(|e| match e {
        Error::AmbiguousRank { value, threshold } => Error::AmbiguousRank { value, threshold },
        other => other,
    })?;
    let variety_dim = point.variety_dim();
    Ok(StabilizerSubalgebraReport {
        algebra: h.name,
        point: point.doc(),
        dim_h: h.dim(),
        dim_h_cap_p: h.dim() - orbit_dim,
        orbit_dim,
        orbit_codim: variety_dim - orbit_dim,
        variety_dim,
        margin: report.margin(),
    })
}

/// Checks the codimension against the closed formula for the label.
pub fn transversal_dimension(report: &StabilizerSubalgebraReport, expected: usize) -> Result<usize> {
    if report.orbit_codim != expected {
        return Err(Error::FormulaViolation(format!(
            "{} orbit codimension {} but the formula gives {expected}",
            report.algebra, report.orbit_codim
        )));
    }
    Ok(report.orbit_codim)
}

/// One row of a codimension table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodimRow {
    pub r: usize,
    pub s: usize,
    pub nu: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<Duality>,
    pub formula: usize,
    pub lie: usize,
    pub matched: bool,
}

pub fn grassmann_codim_table<T: Field>(
    p: usize,
    q: usize,
    i: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<CodimRow>> {
    let amb = std::sync::Arc::new(QuadraticSpace::<T>::standard(p, q));
    let h = build_algebra::<T>(AlgebraName::So { p, q }, tol)?;
    enumerate_labels(p, q, i)
        .into_iter()
        .map(|label: OrbitLabel| {
            let v = standard_representative(&label, &amb)?;
            let rep = tangent_map_rank(&h, PointRef::Subspace(&v), tol)?;
            Ok(CodimRow {
                r: label.r,
                s: label.s,
                nu: label.nu,
                duality: None,
                formula: label.codim,
                lie: rep.orbit_codim,
                matched: label.codim == rep.orbit_codim,
            })
        })
        .collect()
}

pub fn isotropic_codim_table<T: Field>(n: usize, duality: Duality, tol: &TolerancePolicy) -> Result<Vec<CodimRow>> {
    let st = std::sync::Arc::new(crate::isotropic::standard_structure::<T>(n)?);
    let labels = enumerate_isotropic_labels(n, duality);
    if n < 2 {
        // so(1,C) = 0 and IGr(1) is a point
        return Ok(labels
            .into_iter()
            .map(|l| CodimRow {
                r: l.r,
                s: l.s,
                nu: l.nu,
                duality: Some(l.duality),
                formula: l.codim,
                lie: 0,
                matched: l.codim == 0,
            })
            .collect());
    }
    let h = build_algebra::<T>(AlgebraName::SoComplexRealified { n }, tol)?;
    labels
        .into_iter()
        .map(|label: IsotropicLabel| {
            let v = standard_isotropic_representative(&label, &st)?;
            let rep = tangent_map_rank(&h, PointRef::Isotropic(&v), tol)?;
            Ok(CodimRow {
                r: label.r,
                s: label.s,
                nu: label.nu,
                duality: Some(label.duality),
                formula: label.codim,
                lie: rep.orbit_codim,
                matched: label.codim == rep.orbit_codim,
            })
        })
        .collect()
}

/// Transversal directions at an isotropic point, pulled back to the adapted
/// basis and split into the `W×W` block (ordered `w, i·w`) and the rest.
#[derive(Clone, Debug)]
pub struct HermitianTransversal {
    /// `2k×2k` real skew blocks, one per transversal direction.
    pub blocks: Vec<DMatrix<f64>>,
    /// Largest `‖Jᵀ·M·J − M‖` over the blocks.
    pub hermitian_residual: f64,
    /// Largest norm of a transversal direction outside the `W×W` block.
    pub off_block: f64,
}

pub fn hermitian_transversal(
    h: &MatrixLieAlgebra<f64>,
    adapted: &AdaptedBasis,
    structure: &std::sync::Arc<ComplexStructure<f64>>,
    tol: &TolerancePolicy,
) -> Result<HermitianTransversal> {
    let b = adapted.real_span();
    let n = b.ncols();
    let (k, m) = (adapted.k, adapted.k + adapted.r + adapted.s);
    let v = IsotropicPoint::from_parts(structure.clone(), b);
    let model = TangentModel::at(PointRef::Isotropic(&v), tol);
    let image = crate::numeric::float::range_basis(&model.tangent_matrix(h), tol);
    let transversal = crate::numeric::nullspace_basis(&image.transpose(), tol);
    if transversal.ncols() != k * k {
        return Err(Error::FormulaViolation(format!(
            "transversal has dimension {} instead of k² = {}",
            transversal.ncols(),
            k * k
        )));
    }
    let w_index: Vec<usize> = (0..k).chain(m..m + k).collect();
    let mut j = DMatrix::<f64>::zeros(2 * k, 2 * k);
    for a in 0..k {
        j[(k + a, a)] = 1.0;
        j[(a, k + a)] = -1.0;
    }
    let mut blocks = Vec::new();
    let (mut herm, mut off) = (0.0f64, 0.0f64);
    for col in transversal.column_iter() {
        let mut s = DMatrix::<f64>::zeros(n, n);
        let mut idx = 0;
        for a in 0..n {
            for c in a + 1..n {
                s[(a, c)] = col[idx];
                s[(c, a)] = -col[idx];
                idx += 1;
            }
        }
        let block = DMatrix::from_fn(2 * k, 2 * k, |a, c| s[(w_index[a], w_index[c])]);
        let mut rest = s.clone();
        for &a in &w_index {
            for &c in &w_index {
                rest[(a, c)] = 0.0;
            }
        }
        herm = herm.max((j.transpose() * &block * &j - &block).norm());
        off = off.max(rest.norm());
        blocks.push(block);
    }
    Ok(HermitianTransversal {
        blocks,
        hermitian_residual: herm,
        off_block: off,
    })
}

/// `v₀ ∈ End(𝔤)`: the identity on `𝔥` and `−dim 𝔥 / dim E` on the Killing
/// orthocomplement `E`.
#[derive(Clone, Debug)]
pub struct StabilizerElement<T: Field> {
    /// Matrix on the basis of `𝔤`.
    pub v0: DMatrix<T>,
    pub complement_scalar: T,
    pub dim_h: usize,
    pub dim_complement: usize,
    pub trace: f64,
}

pub fn stabilizer_element<T: Field>(
    h: &MatrixLieAlgebra<T>,
    g: &MatrixLieAlgebra<T>,
    tol: &TolerancePolicy,
) -> Result<StabilizerElement<T>> {
    if h.ambient_dim != g.ambient_dim {
        return Err(Error::Dimension(format!("{} and {} act on different spaces", h.name, g.name)));
    }
    let hc = g.coordinates(&h.flat_basis(), tol)?;
    let killing = killing_from_ads(&g.ad_basis(tol)?)?;
    let (dh, dg) = (h.dim(), g.dim());
    let de = dg - dh;
    // E = {Y : K(Y, h_i) = 0 for all i}
    let e = T::nullspace(&(hc.transpose() * &killing), tol);
    let mut p = DMatrix::<T>::zeros(dg, dg);
    p.view_mut((0, 0), (dg, dh)).copy_from(&hc);
    if e.ncols() != de {
        return Err(Error::Consistency(format!(
            "Killing orthocomplement of {} in {} has dimension {} instead of {de}",
            h.name,
            g.name,
            e.ncols()
        )));
    }
    p.view_mut((0, dh), (dg, de)).copy_from(&e);
    let rank = T::rank_report(&p, tol);
    if rank.certified()? != dg {
        return Err(Error::Consistency(format!(
            "Killing pairing of {} in {} is degenerate",
            h.name, g.name
        )));
    }
    let scalar = if de == 0 {
        T::zero()
    } else {
        T::ratio(-(dh as i64), de as i64)
    };
    let diag = DVector::from_fn(dg, |i, _| if i < dh { T::one() } else { scalar.clone() });
    let v0 = &p * DMatrix::from_diagonal(&diag) * numeric::inverse(&p)?;
    let trace = v0.trace().to_f64();
    Ok(StabilizerElement {
        v0,
        complement_scalar: scalar,
        dim_h: dh,
        dim_complement: de,
        trace,
    })
}

/// `dim {A ∈ 𝔤 : ad(A)∘v₀ = v₀∘ad(A)}`.
pub fn centralizer_dimension<T: Field>(
    v0: &DMatrix<T>,
    g: &MatrixLieAlgebra<T>,
    tol: &TolerancePolicy,
) -> Result<usize> {
    let d = g.dim();
    let mut system = DMatrix::<T>::zeros(d * d, d);
    for (j, ad) in g.ad_basis(tol)?.iter().enumerate() {
        system.set_column(j, &flatten(&(ad * v0 - v0 * ad)));
    }
    let rank = T::rank_report(&system, tol).certified()?;
    Ok(d - rank)
}

/// `exp(scale·X)` for a Gaussian element `X` of unit Frobenius norm.
pub fn random_group_element<R: Rng + ?Sized>(
    h: &MatrixLieAlgebra<f64>,
    scale: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::Invalid(format!("scale must be finite and non-negative, got {scale}")));
    }
    let n = h.ambient_dim;
    let mut x = DMatrix::<f64>::zeros(n, n);
    for e in &h.basis {
        let c: f64 = rng.sample(StandardNormal);
        x += e * c;
    }
    let norm = x.norm();
    if norm > 0.0 {
        x *= scale / norm;
    }
    Ok(x.exp())
}

/// Largest `‖gᵀFg − F‖` over the invariant forms, and `|det g − 1|` for `sl`.
pub fn group_residual(h: &MatrixLieAlgebra<f64>, g: &DMatrix<f64>) -> f64 {
    let mut worst = h
        .invariant_forms
        .iter()
        .map(|f| (g.transpose() * f * g - f).norm())
        .fold(0.0, f64::max);
    if let AlgebraName::Sl { .. } = h.name {
        worst = worst.max((g.determinant() - 1.0).abs());
    }
    worst
}
