//! Maximal isotropic subspaces of `ℝ^{2n} = ℂⁿ` for the imaginary part of the
//! complex bilinear form `b(z, w) = Σ z_j w_j`.
//!
//! Coordinates are `(x, y)` with `z = x + i·y`, so
//!
//! * `J = [[0, −I], [I, 0]]` is multiplication by `i`,
//! * `Re b = diag(I, −I)` and `Im b = [[0, I], [I, 0]]` (split signature),
//! * `Re b(v, w) = Im b(v, J·w)`.
//!
//! The standard basis `x₁…x_n, y₁…y_n` is positively oriented. A maximal
//! isotropic `V` carries the label `(r, s, ν)` of `Re b|_V`; `ν = 2k` is even
//! and `V` is self-dual exactly when `n − s` is even.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::multi_indices;
use crate::numeric::{self, float, Field, FieldKind, Inertia, ScalarMatrix, TolerancePolicy, AMBIGUITY_BAND};

#[derive(Clone, Debug)]
pub struct ComplexStructure<T: Field> {
    pub n: usize,
    pub j: DMatrix<T>,
    pub b_real: DMatrix<T>,
    pub b_imag: DMatrix<T>,
}

pub fn standard_structure<T: Field>(n: usize) -> Result<ComplexStructure<T>> {
    if n == 0 {
        return Err(Error::Invalid("complex dimension must be at least 1".into()));
    }
    let m = 2 * n;
    let j = DMatrix::from_fn(m, m, |a, b| {
        if a + n == b {
            -T::one()
        } else if b + n == a {
            T::one()
        } else {
            T::zero()
        }
    });
    let b_imag = DMatrix::from_fn(m, m, |a, b| {
        if a + n == b || b + n == a {
            T::one()
        } else {
            T::zero()
        }
    });
    Ok(ComplexStructure {
        n,
        j,
        b_real: numeric::signature_form(n, n),
        b_imag,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Duality {
    SelfDual,
    AntiSelfDual,
}

impl Duality {
    /// Class predicted by the parity of `n − s`.
    pub fn from_parity(n: usize, s: usize) -> Self {
        if (n - s) % 2 == 0 {
            Duality::SelfDual
        } else {
            Duality::AntiSelfDual
        }
    }

    pub fn other(self) -> Self {
        match self {
            Duality::SelfDual => Duality::AntiSelfDual,
            Duality::AntiSelfDual => Duality::SelfDual,
        }
    }
}

impl std::fmt::Display for Duality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Duality::SelfDual => "self-dual",
            Duality::AntiSelfDual => "anti-self-dual",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsotropicLabel {
    pub r: usize,
    pub s: usize,
    pub nu: usize,
    pub duality: Duality,
    pub codim: usize,
}

impl IsotropicLabel {
    /// `None` when `ν = n − r − s` is odd or negative.
    pub fn new(n: usize, r: usize, s: usize) -> Option<Self> {
        let nu = n.checked_sub(r + s)?;
        (nu % 2 == 0).then(|| Self {
            r,
            s,
            nu,
            duality: Duality::from_parity(n, s),
            codim: (nu / 2) * (nu / 2),
        })
    }

    pub fn k(&self) -> usize {
        self.nu / 2
    }

    pub fn n(&self) -> usize {
        self.r + self.s + self.nu
    }
}

impl std::fmt::Display for IsotropicLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},ν={},{})", self.r, self.s, self.nu, self.duality)
    }
}

pub fn enumerate_isotropic_labels(n: usize, duality: Duality) -> Vec<IsotropicLabel> {
    let mut out = Vec::new();
    for r in 0..=n {
        for s in 0..=n - r {
            if let Some(l) = IsotropicLabel::new(n, r, s) {
                if l.duality == duality {
                    out.push(l);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct IsotropicPoint<T: Field> {
    structure: Arc<ComplexStructure<T>>,
    basis: DMatrix<T>,
}

impl<T: Field> IsotropicPoint<T> {
    pub fn new(structure: Arc<ComplexStructure<T>>, basis: DMatrix<T>, tol: &TolerancePolicy) -> Result<Self> {
        let n = structure.n;
        if basis.shape() != (2 * n, n) {
            return Err(Error::Dimension(format!(
                "maximal isotropic basis must be {}x{n}, got {}x{}",
                2 * n,
                basis.nrows(),
                basis.ncols()
            )));
        }
        let report = T::rank_report(&basis, tol);
        if report.rank != n || report.ambiguous {
            return Err(Error::Invalid("basis columns are not independent".into()));
        }
        let p = Self { structure, basis };
        p.check_isotropic(tol)?;
        Ok(p)
    }

    pub(crate) fn from_parts(structure: Arc<ComplexStructure<T>>, basis: DMatrix<T>) -> Self {
        Self { structure, basis }
    }

    pub fn structure(&self) -> &Arc<ComplexStructure<T>> {
        &self.structure
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.structure.n
    }

    pub fn with_basis(&self, basis: DMatrix<T>) -> Self {
        Self::from_parts(self.structure.clone(), basis)
    }

    /// `‖Bᵀ·Im b·B‖` against the scale `‖B‖²`.
    pub fn isotropy_residual(&self) -> (f64, f64) {
        let g = self.basis.transpose() * &self.structure.b_imag * &self.basis;
        let bf = numeric::to_f64_matrix(&self.basis);
        (numeric::to_f64_matrix(&g).norm(), bf.norm_squared())
    }

    fn check_isotropic(&self, tol: &TolerancePolicy) -> Result<()> {
        let (res, scale) = self.isotropy_residual();
        let ok = match T::KIND {
            FieldKind::Rational => res == 0.0,
            _ => res <= AMBIGUITY_BAND * tol.threshold(scale),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("subspace is not isotropic (residual {res:.3e})")))
        }
    }

    /// `Bᵀ·Re b·B`.
    pub fn real_restriction(&self) -> DMatrix<T> {
        self.basis.transpose() * &self.structure.b_real * &self.basis
    }
}

/// Sign of the permutation sorting `first ++ rest`.
fn merge_sign(first: &[usize], rest: &[usize]) -> bool {
    let mut inversions = 0usize;
    for &a in first {
        inversions += rest.iter().filter(|&&b| b < a).count();
    }
    inversions % 2 == 0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HodgeVerdict {
    pub duality: Duality,
    /// `‖*β − λβ‖ / ‖β‖`.
    pub residual: f64,
}

/// Sign `λ` in `*β = λ·β` for the Plücker vector `β` of `V`, with the Hodge
/// star of `Im b` and volume form `x₁∧…∧x_n∧y₁∧…∧y_n`.
///
/// `(*β)_{Iᶜ} = ε(I, Iᶜ)·⟨e_I, β⟩` where `⟨e_I, β⟩ = det((G·B)[I, :])`.
pub fn hodge_duality<T: Field>(v: &IsotropicPoint<T>) -> Result<HodgeVerdict> {
    let n = v.n();
    let m = 2 * n;
    let b = &v.basis;
    let gb = &v.structure.b_imag * b;
    let idx = multi_indices(m, n);
    let pos: std::collections::HashMap<&[usize], usize> =
        idx.iter().enumerate().map(|(a, i)| (i.as_slice(), a)).collect();
    let rows = |mat: &DMatrix<T>, sel: &[usize]| {
        DMatrix::from_fn(sel.len(), n, |a, c| mat[(sel[a], c)].clone())
    };
    let beta: Vec<T> = idx.iter().map(|i| numeric::determinant(&rows(b, i))).collect();
    let mut star = vec![T::zero(); idx.len()];
    for i in &idx {
        let comp: Vec<usize> = (0..m).filter(|c| !i.contains(c)).collect();
        let d = numeric::determinant(&rows(&gb, i));
        let signed = if merge_sign(i, &comp) { d } else { -d };
        star[pos[comp.as_slice()]] = signed;
    }
    let (lead, _) = beta
        .iter()
        .enumerate()
        .map(|(a, v)| (a, v.magnitude()))
        .fold((0, -1.0), |acc, (a, v)| if v > acc.1 { (a, v) } else { acc });
    if beta[lead].is_zero() {
        return Err(Error::Invalid("basis is rank deficient".into()));
    }
    let same_sign = (star[lead].to_f64() > 0.0) == (beta[lead].to_f64() > 0.0);
    let bnorm: f64 = beta.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt();
    let resid: f64 = beta
        .iter()
        .zip(&star)
        .map(|(x, y)| {
            let (x, y) = (x.to_f64(), y.to_f64());
            if same_sign {
                (y - x).powi(2)
            } else {
                (y + x).powi(2)
            }
        })
        .sum::<f64>()
        .sqrt()
        / bnorm;
    Ok(HodgeVerdict {
        duality: if same_sign {
            Duality::SelfDual
        } else {
            Duality::AntiSelfDual
        },
        residual: resid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropicClassification {
    pub label: IsotropicLabel,
    pub hodge: HodgeVerdict,
    pub parity_agrees: bool,
    /// Smallest `|λ|` of `Re b|_V` counted as nonzero.
    pub margin: Option<f64>,
}

const HODGE_RESIDUAL_LIMIT: f64 = 1e-6;

pub fn classify_isotropic_report<T: Field>(
    v: &IsotropicPoint<T>,
    tol: &TolerancePolicy,
) -> Result<IsotropicClassification> {
    let n = v.n();
    let report = T::inertia_report(&v.real_restriction(), tol)?;
    let margin = report.smallest_nonzero;
    let Inertia {
        positive: r,
        negative: s,
        nullity: nu,
    } = report.certified()?;
    let label = IsotropicLabel::new(n, r, s).ok_or_else(|| {
        Error::Consistency(format!("odd nullity ν = {nu} on an isotropic point"))
    })?;
    let hodge = hodge_duality(v)?;
    let limit = match T::KIND {
        FieldKind::Rational => 0.0,
        _ => HODGE_RESIDUAL_LIMIT,
    };
    if hodge.residual > limit {
        return Err(Error::Invalid(format!(
            "*β is not proportional to β (residual {:.3e})",
            hodge.residual
        )));
    }
    if hodge.duality != label.duality {
        return Err(Error::Consistency(format!(
            "Hodge verdict {} disagrees with the parity of n − s for {label}",
            hodge.duality
        )));
    }
    Ok(IsotropicClassification {
        label,
        hodge,
        parity_agrees: true,
        margin,
    })
}

pub fn classify_isotropic<T: Field>(v: &IsotropicPoint<T>, tol: &TolerancePolicy) -> Result<IsotropicLabel> {
    classify_isotropic_report(v, tol).map(|c| c.label)
}

/// Real basis column for the complex vector `e_c` (`imag = false`) or `i·e_c`.
fn unit<T: Field>(n: usize, c: usize, imag: bool) -> DMatrix<T> {
    let mut v = DMatrix::zeros(2 * n, 1);
    v[(if imag { n + c } else { c }, 0)] = T::one();
    v
}

/// Exact point with the given label: `z_j = e_a + i·e_b` for the null pairs,
/// `e_c` or `i·e_c` for the definite part, and
/// `V = span_ℝ(z_1, i·z_1, …, z_k, i·z_k, middle)`.
pub fn standard_isotropic_representative<T: Field>(
    label: &IsotropicLabel,
    structure: &Arc<ComplexStructure<T>>,
) -> Result<IsotropicPoint<T>> {
    let n = structure.n;
    if label.n() != n || label.nu % 2 != 0 {
        return Err(Error::EmptyOrbit(format!("{label} is not a label of IGr({n})")));
    }
    let k = label.k();
    let mut b = DMatrix::<T>::zeros(2 * n, n);
    let mut col = 0;
    for j in 0..k {
        let (a, c) = (2 * j, 2 * j + 1);
        // z = x_a + y_c, i·z = y_a − x_c
        let z = unit::<T>(n, a, false) + unit::<T>(n, c, true);
        let iz = unit::<T>(n, a, true) - unit::<T>(n, c, false);
        b.set_column(col, &z.column(0));
        b.set_column(col + 1, &iz.column(0));
        col += 2;
    }
    for t in 0..label.r + label.s {
        let c = 2 * k + t;
        b.set_column(col, &unit::<T>(n, c, t >= label.r).column(0));
        col += 1;
    }
    Ok(IsotropicPoint::from_parts(structure.clone(), b))
}

/// The reflection along `x₁ + y₁`; it preserves `Im b` and swaps the two
/// families of maximal isotropic subspaces.
pub fn class_swap_reflection<T: Field>(n: usize) -> DMatrix<T> {
    let m = 2 * n;
    // R = I − u·uᵀ·G with u = x₁ + y₁ and uᵀGu = 2
    let mut r = DMatrix::<T>::identity(m, m);
    r[(0, 0)] = T::zero();
    r[(n, n)] = T::zero();
    r[(0, n)] = -T::one();
    r[(n, 0)] = -T::one();
    r
}

/// Random graph `{(x, A·x)}` with skew Gaussian `A`, moved into the requested
/// class by [`class_swap_reflection`] when needed.
pub fn sample_isotropic<R: Rng + ?Sized>(
    structure: &Arc<ComplexStructure<f64>>,
    duality: Duality,
    rng: &mut R,
) -> IsotropicPoint<f64> {
    let n = structure.n;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let g: f64 = rng.sample(StandardNormal);
            a[(i, j)] = g;
            a[(j, i)] = -g;
        }
    }
    let mut b = DMatrix::zeros(2 * n, n);
    b.view_mut((0, 0), (n, n)).fill_with_identity();
    b.view_mut((n, 0), (n, n)).copy_from(&a);
    let graph_class = Duality::from_parity(n, 0);
    if graph_class != duality {
        b = class_swap_reflection::<f64>(n) * b;
    }
    IsotropicPoint::from_parts(structure.clone(), float::orthonormalize(&b))
}

/// Columns `C` with `Bᵀ·G·C = I` and `Cᵀ·G·C = 0` (`G = Im b`), so the
/// nearby maximal isotropics are `span(B + C·A)` with `A` skew.
pub fn isotropic_complement(v: &IsotropicPoint<f64>) -> Result<DMatrix<f64>> {
    let b = &v.basis;
    let g = &v.structure.b_imag;
    let c0 = g * b * numeric::inverse(&(b.transpose() * b))?;
    let s = c0.transpose() * g * &c0;
    Ok(&c0 - b * s * 0.5)
}

/// `span(B + δ·C·A)` for Gaussian skew `A` of unit Frobenius norm.
pub fn perturb_isotropic<R: Rng + ?Sized>(
    v: &IsotropicPoint<f64>,
    delta: f64,
    rng: &mut R,
) -> Result<IsotropicPoint<f64>> {
    let n = v.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let g: f64 = rng.sample(StandardNormal);
            a[(i, j)] = g;
            a[(j, i)] = -g;
        }
    }
    let norm = a.norm();
    if norm > 0.0 {
        a /= norm;
    }
    let c = isotropic_complement(v)?;
    Ok(v.with_basis(&v.basis + c * a * delta))
}

/// Complex vectors `x + i·y` from the columns of a realified basis.
pub fn complex_columns(b: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = b.nrows() / 2;
    DMatrix::from_fn(n, b.ncols(), |a, c| Complex64::new(b[(a, c)], b[(a + n, c)]))
}

/// Realified columns `(Re z; Im z)`.
pub fn real_columns(z: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = z.nrows();
    DMatrix::from_fn(2 * n, z.ncols(), |a, c| {
        if a < n {
            z[(a, c)].re
        } else {
            z[(a - n, c)].im
        }
    })
}

/// `b(u, v) = uᵀ·v` on complex column matrices.
fn cbil(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    u.transpose() * v
}

#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    /// `z_1, …, z_n` as complex columns.
    pub z: DMatrix<Complex64>,
    pub k: usize,
    pub r: usize,
    pub s: usize,
    /// `(b(z_a, z_c))`.
    pub gram: DMatrix<Complex64>,
    /// Distance of `gram` from the block form.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptedBasisDoc {
    pub k: usize,
    pub r: usize,
    pub s: usize,
    pub z: ScalarMatrix,
    pub gram: ScalarMatrix,
    pub residual: f64,
}

impl AdaptedBasis {
    pub fn expected_gram(k: usize, r: usize, s: usize) -> DMatrix<Complex64> {
        let n = 2 * k + r + s;
        let mut g = DMatrix::zeros(n, n);
        for j in 0..k {
            g[(j, n - k + j)] = Complex64::new(1.0, 0.0);
            g[(n - k + j, j)] = Complex64::new(1.0, 0.0);
        }
        for t in 0..r + s {
            g[(k + t, k + t)] = Complex64::new(if t < r { 1.0 } else { -1.0 }, 0.0);
        }
        g
    }

    /// Real basis of `V`: `z_1..z_{k+r+s}` and `i·z_1..i·z_k`.
    pub fn real_span(&self) -> DMatrix<f64> {
        let (k, m) = (self.k, self.k + self.r + self.s);
        let n = self.z.nrows();
        let mut cols = DMatrix::<Complex64>::zeros(n, m + k);
        cols.view_mut((0, 0), (n, m)).copy_from(&self.z.columns(0, m));
        for j in 0..k {
            cols.set_column(m + j, &(self.z.column(j) * Complex64::i()));
        }
        real_columns(&cols)
    }

    pub fn doc(&self) -> AdaptedBasisDoc {
        AdaptedBasisDoc {
            k: self.k,
            r: self.r,
            s: self.s,
            z: ScalarMatrix::Complex(self.z.clone()),
            gram: ScalarMatrix::Complex(self.gram.clone()),
            residual: self.residual,
        }
    }
}

/// Builds a basis putting `b` into the block form
/// `[[0,0,I_k],[0,I_{r,s},0],[I_k,0,0]]` with `V` spanned by
/// `z_1..z_{k+r+s}, i·z_1..i·z_k`.
///
/// 1. `W = V ∩ J·V` is a complex `k`-plane, `b`-orthogonal to all of `V`.
/// 2. On a real complement `V'` of `W` in `V`, `b = Re b` is real symmetric
///    and nondegenerate; diagonalise it to `±1`.
/// 3. `U = {u : b(u, z_mid) = 0}` contains `W` as a Lagrangian. A Hermitian
///    complement `C` of `W` in `U` pairs perfectly with `W`; normalise the
///    pairing to `δ` and subtract `½·Σ b(c_l, c_m)·z_m` to make `C` null.
pub fn adapted_basis(v: &IsotropicPoint<f64>, tol: &TolerancePolicy) -> Result<AdaptedBasis> {
    let n = v.n();
    let label = classify_isotropic(v, tol)?;
    let (k, r, s) = (label.k(), label.r, label.s);
    let b = float::orthonormalize(&v.basis);
    let jb = &v.structure.j * &b;
    let w_real = numeric::subspace_intersection(&jb, &b, tol)?;
    if w_real.ncols() != 2 * k {
        return Err(Error::Consistency(format!(
            "dim V ∩ JV = {} but ν = {}",
            w_real.ncols(),
            label.nu
        )));
    }
    let w = float::complex_range_basis(&complex_columns(&w_real), tol);
    if w.ncols() != k {
        return Err(Error::Consistency(format!(
            "V ∩ JV has complex dimension {} instead of {k}",
            w.ncols()
        )));
    }

    // real complement of W in V, then diagonalise b on it
    let vprime = if k == 0 {
        b.clone()
    } else {
        let proj = &w_real * w_real.transpose();
        let resid = &b - proj * &b;
        float::range_basis(&resid, tol)
    };
    if vprime.ncols() != r + s {
        return Err(Error::Consistency(format!(
            "complement of V ∩ JV has dimension {} instead of {}",
            vprime.ncols(),
            r + s
        )));
    }
    let mid_form = vprime.transpose() * &v.structure.b_real * &vprime;
    let (t, d) = f64::diagonalize_form(&mid_form, tol)?;
    let pos = d.iter().filter(|&&x| x > 0.0).count();
    if pos != r || d.iter().any(|&x| x == 0.0) {
        return Err(Error::Consistency("middle block lost its signature".into()));
    }
    let mid = complex_columns(&(&vprime * t));

    // dual complement
    let mut z = DMatrix::<Complex64>::zeros(n, n);
    z.view_mut((0, k), (n, r + s)).copy_from(&mid);
    if k > 0 {
        let u = if r + s == 0 {
            DMatrix::<Complex64>::identity(n, n)
        } else {
            float::complex_nullspace(&mid.transpose(), tol)
        };
        if u.ncols() != 2 * k {
            return Err(Error::Consistency(format!(
                "b-orthocomplement of the middle block has dimension {} instead of {}",
                u.ncols(),
                2 * k
            )));
        }
        let hermitian_proj = &w * w.adjoint();
        let c = float::complex_range_basis(&(&u - hermitian_proj * &u), tol);
        if c.ncols() != k {
            return Err(Error::Consistency(format!(
                "complement of W in U has dimension {} instead of {k}",
                c.ncols()
            )));
        }
        let pairing = cbil(&c, &w);
        let inv = pairing
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Consistency("pairing between W and its complement is singular".into()))?;
        let c1 = &c * inv.transpose();
        let s = cbil(&c1, &c1);
        let c2 = &c1 - &w * s * Complex64::new(0.5, 0.0);
        z.view_mut((0, 0), (n, k)).copy_from(&w);
        z.view_mut((0, n - k), (n, k)).copy_from(&c2);
    }
    let gram = cbil(&z, &z);
    let residual = (&gram - AdaptedBasis::expected_gram(k, r, s)).norm();
    let limit = 1e3 * tol.threshold(1.0);
    if residual > limit {
        return Err(Error::Consistency(format!(
            "adapted Gram residual {residual:.3e} exceeds {limit:.3e}"
        )));
    }
    Ok(AdaptedBasis {
        z,
        k,
        r,
        s,
        gram,
        residual,
    })
}

/// JSON form: `{"structure": {"n": …}, "basis": <literal>}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsotropicPointDoc {
    pub structure: StructureDoc,
    pub basis: ScalarMatrix,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StructureDoc {
    pub n: usize,
}

impl IsotropicPointDoc {
    pub fn build<T: Field>(&self, tol: &TolerancePolicy) -> Result<IsotropicPoint<T>> {
        let structure = Arc::new(standard_structure::<T>(self.structure.n)?);
        let basis = match &self.basis {
            // complex n×n: columns are complex vectors, realified coordinates
            ScalarMatrix::Complex(z) if z.nrows() == self.structure.n => {
                T::from_literal(&ScalarMatrix::Real(real_columns(z)))?
            }
            other => T::from_literal(other)?,
        };
        IsotropicPoint::new(structure, basis, tol)
    }

    pub fn of<T: Field>(v: &IsotropicPoint<T>) -> Self {
        Self {
            structure: StructureDoc { n: v.n() },
            basis: T::to_literal(v.basis()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn real_points<T: Field>(n: usize, imag: bool) -> IsotropicPoint<T> {
        let st = Arc::new(standard_structure::<T>(n).unwrap());
        let mut b = DMatrix::<T>::zeros(2 * n, n);
        for c in 0..n {
            b[(if imag { n + c } else { c }, c)] = T::one();
        }
        IsotropicPoint::new(st, b, &TolerancePolicy::default()).unwrap()
    }

    #[test]
    fn structure_relations() {
        let tol = TolerancePolicy::default();
        for n in 1..=6 {
            let st = standard_structure::<BigRational>(n).unwrap();
            let m = 2 * n;
            assert_eq!(&st.j * &st.j, -DMatrix::<BigRational>::identity(m, m));
            assert_eq!(numeric::inertia_of(&st.b_imag, &tol).unwrap(), Inertia::new(n, n, 0));
            assert_eq!(&st.b_imag * &st.j, st.b_real);
            assert_eq!(st.j.transpose() * &st.b_real * &st.j, -st.b_real.clone());
            assert_eq!(st.j.transpose() * &st.b_imag * &st.j, -st.b_imag.clone());
        }
        let one = standard_structure::<BigRational>(1).unwrap();
        assert_eq!(one.b_imag, numeric::from_integers(2, 2, &[0, 1, 1, 0]));
        assert_eq!(one.j, numeric::from_integers(2, 2, &[0, -1, 1, 0]));
    }

    #[test]
    fn real_and_imaginary_points() {
        let tol = TolerancePolicy::default();
        for n in 1..=5 {
            let re = classify_isotropic(&real_points::<BigRational>(n, false), &tol).unwrap();
            assert_eq!((re.r, re.s), (n, 0));
            assert_eq!(re.duality == Duality::SelfDual, n % 2 == 0);
            let im = classify_isotropic(&real_points::<f64>(n, true), &tol).unwrap();
            assert_eq!((im.r, im.s), (0, n));
        }
    }

    #[test]
    fn hodge_examples() {
        let tol = TolerancePolicy::default();
        assert_eq!(hodge_duality(&real_points::<f64>(2, false)).unwrap().duality, Duality::SelfDual);
        assert_eq!(hodge_duality(&real_points::<f64>(3, false)).unwrap().duality, Duality::AntiSelfDual);
        let st = Arc::new(standard_structure::<BigRational>(2).unwrap());
        let l = IsotropicLabel::new(2, 1, 1).unwrap();
        let v = standard_isotropic_representative(&l, &st).unwrap();
        assert_eq!(hodge_duality(&v).unwrap().duality, Duality::AntiSelfDual);
        let l = IsotropicLabel::new(2, 0, 0).unwrap();
        let v = standard_isotropic_representative(&l, &st).unwrap();
        let c = classify_isotropic_report(&v, &tol).unwrap();
        assert_eq!((c.label.nu, c.label.k(), c.label.codim), (2, 1, 1));
    }

    #[test]
    fn label_enumeration() {
        let mut sd = enumerate_isotropic_labels(2, Duality::SelfDual);
        sd.sort_by_key(|l| (l.r, l.s));
        let rs: Vec<_> = sd.iter().map(|l| (l.r, l.s)).collect();
        assert_eq!(rs, vec![(0, 0), (0, 2), (2, 0)]);
        let asd: Vec<_> = enumerate_isotropic_labels(2, Duality::AntiSelfDual)
            .iter()
            .map(|l| (l.r, l.s))
            .collect();
        assert_eq!(asd, vec![(1, 1)]);
        let mut three: Vec<_> = enumerate_isotropic_labels(3, Duality::SelfDual)
            .iter()
            .map(|l| (l.r, l.s))
            .collect();
        three.sort();
        assert_eq!(three, vec![(0, 1), (0, 3), (2, 1)]);
    }

    #[test]
    fn standard_representatives_classify_exactly() {
        let tol = TolerancePolicy::default();
        for n in 1..=5 {
            let st = Arc::new(standard_structure::<BigRational>(n).unwrap());
            for d in [Duality::SelfDual, Duality::AntiSelfDual] {
                for l in enumerate_isotropic_labels(n, d) {
                    let v = standard_isotropic_representative(&l, &st).unwrap();
                    assert_eq!(v.isotropy_residual().0, 0.0);
                    assert_eq!(classify_isotropic(&v, &tol).unwrap(), l);
                }
            }
        }
    }

    #[test]
    fn samples_land_in_the_requested_class() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in 1..=4 {
            let st = Arc::new(standard_structure::<f64>(n).unwrap());
            for d in [Duality::SelfDual, Duality::AntiSelfDual] {
                for _ in 0..50 {
                    let v = sample_isotropic(&st, d, &mut rng);
                    let l = classify_isotropic(&v, &tol).unwrap();
                    assert_eq!(l.duality, d);
                    assert_eq!(l.nu, 0);
                }
            }
        }
    }

    #[test]
    fn adapted_basis_examples() {
        let tol = TolerancePolicy::default();
        let ab = adapted_basis(&real_points::<f64>(3, false), &tol).unwrap();
        assert_eq!(ab.k, 0);
        assert!(ab.residual < 1e-12);
        let st = Arc::new(standard_structure::<f64>(2).unwrap());
        let l = IsotropicLabel::new(2, 0, 0).unwrap();
        let v = standard_isotropic_representative(&l, &st).unwrap();
        let ab = adapted_basis(&v, &tol).unwrap();
        assert_eq!(ab.k, 1);
        assert!(ab.residual < 1e-12);
        assert!(crate::grassmann::same_subspace(&ab.real_span(), v.basis(), &tol));
    }

    #[test]
    fn adapted_basis_at_every_standard_label() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for n in 2..=5 {
            let st = Arc::new(standard_structure::<f64>(n).unwrap());
            for d in [Duality::SelfDual, Duality::AntiSelfDual] {
                for l in enumerate_isotropic_labels(n, d) {
                    let v = standard_isotropic_representative(&l, &st).unwrap();
                    // move it by a random group-like change of basis inside V
                    let mix = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal))
                        + DMatrix::identity(n, n) * 3.0;
                    let v = v.with_basis(v.basis() * mix);
                    let ab = adapted_basis(&v, &tol).unwrap();
                    assert!(ab.residual < 1e-8, "{l}: {}", ab.residual);
                    assert!(crate::grassmann::same_subspace(&ab.real_span(), v.basis(), &tol));
                }
            }
        }
    }

    #[test]
    fn perturbation_stays_isotropic() {
        let tol = TolerancePolicy::default();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let st = Arc::new(standard_structure::<f64>(3).unwrap());
        let l = IsotropicLabel::new(3, 1, 0).unwrap();
        let v = standard_isotropic_representative(&l, &st).unwrap();
        for _ in 0..20 {
            let w = perturb_isotropic(&v, 1e-3, &mut rng).unwrap();
            let (res, scale) = w.isotropy_residual();
            assert!(res <= 1e-12 * scale);
            let lw = classify_isotropic(&w, &tol).unwrap();
            assert!(lw.r >= 1 && lw.s % 2 == 0);
        }
    }

    #[test]
    fn json_accepts_real_and_complex_bases() {
        let tol = TolerancePolicy::default();
        let text = r#"{"structure":{"n":2},"basis":{"rows":2,"cols":2,"field":"complex","data":[[1,0],[0,0],[0,0],[1,0]]}}"#;
        let doc: IsotropicPointDoc = serde_json::from_str(text).unwrap();
        let v = doc.build::<f64>(&tol).unwrap();
        let l = classify_isotropic(&v, &tol).unwrap();
        assert_eq!((l.r, l.s, l.duality), (2, 0, Duality::SelfDual));
        let again = IsotropicPointDoc::of(&v);
        assert_eq!(again.build::<f64>(&tol).unwrap().basis(), v.basis());
        let bad = r#"{"structure":{"n":1},"basis":{"rows":2,"cols":1,"field":"real","data":[1,1]}}"#;
        let doc: IsotropicPointDoc = serde_json::from_str(bad).unwrap();
        assert!(doc.build::<f64>(&tol).is_err());
    }
}
