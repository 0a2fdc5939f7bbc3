//! Defining sections, slice charts and the defining-density probe.
//!
//! Around a center `x` in the orbit `(r,s)` nearby points are graphs over
//! the center: `Y = B₀ + C·X` in the Grassmannian (`C` an orthonormal
//! complement, `X` arbitrary) and `Y = B₀ + C·A` in the isotropic case (`C`
//! the isotropic complement, `A` skew). The chart coordinates are the entries
//! of `X`, or the upper triangle of `A`.
//!
//! A sub-frame `W` of `V` on which the form is nondegenerate of signature
//! `(r,s)` is carried along with fixed coefficients, and `Ẽ_y` is the
//! orthocomplement of `W_y` inside `V_y`, obtained by one sweep of
//! Gram-Schmidt against `W_y`. The defining section is the Gram matrix of the
//! form on `Ẽ_y`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grassmann::{classify, OrbitLabel, QuadraticSpace, SubspacePoint};
use crate::isotropic::{
    adapted_basis, classify_isotropic, complex_columns, isotropic_complement, ComplexStructure,
    IsotropicLabel, IsotropicPoint,
};
use crate::lie::{random_group_element, MatrixLieAlgebra};
use crate::numeric::{float, Field, Inertia, TolerancePolicy, AMBIGUITY_BAND};

/// Central finite-difference step for every derivative probe.
pub const FD_STEP: f64 = 1e-5;
/// Round-trip bound inside a certified radius.
pub const ROUND_TRIP_LIMIT: f64 = 1e-8;
const NEWTON_ITERATIONS: usize = 50;
const MIN_RADIUS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransversalModel {
    /// Real symmetric `ν×ν`.
    Symmetric { nu: usize },
    /// Complex Hermitian `k×k`, stored as `k²` real parameters.
    Hermitian { k: usize },
}

impl TransversalModel {
    pub fn dim(&self) -> usize {
        match *self {
            TransversalModel::Symmetric { nu } => nu * (nu + 1) / 2,
            TransversalModel::Hermitian { k } => k * k,
        }
    }
}

/// Label of a point as seen from a chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ChartLabel {
    Grassmann(OrbitLabel),
    Isotropic(IsotropicLabel),
}

impl ChartLabel {
    pub fn rs(&self) -> (usize, usize) {
        match self {
            ChartLabel::Grassmann(l) => (l.r, l.s),
            ChartLabel::Isotropic(l) => (l.r, l.s),
        }
    }

    pub fn nu(&self) -> usize {
        match self {
            ChartLabel::Grassmann(l) => l.nu,
            ChartLabel::Isotropic(l) => l.nu,
        }
    }
}

impl std::fmt::Display for ChartLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChartLabel::Grassmann(l) => l.fmt(f),
            ChartLabel::Isotropic(l) => l.fmt(f),
        }
    }
}

/// A classified point that can serve as a chart center.
#[derive(Clone, Debug)]
pub enum Center {
    Grassmann(SubspacePoint<f64>),
    Isotropic(IsotropicPoint<f64>),
}

/// Complex structure on `Ẽ` pulled back from `Z₁` along the projection with
/// kernel `Z₂`.
#[derive(Clone, Debug)]
pub struct HermitianFrame {
    /// `Ẽ` as `2k` real columns.
    pub e_tilde: DMatrix<f64>,
    /// The pulled-back structure on `Ẽ`-coefficients.
    pub structure: DMatrix<f64>,
    /// `Re b` on `Ẽ`.
    pub gram: DMatrix<f64>,
    /// The Hermitian `k×k` matrix of `Re b|_Ẽ`.
    pub hermitian: DMatrix<Complex64>,
    /// `‖Iᵀ·R·I − R‖`.
    pub hermitian_residual: f64,
    /// `‖I² + 1‖`.
    pub square_residual: f64,
}

#[derive(Clone, Debug)]
struct GrassmannData {
    ambient: Arc<QuadraticSpace<f64>>,
    b0: DMatrix<f64>,
    c: DMatrix<f64>,
}

#[derive(Clone, Debug)]
struct IsotropicData {
    structure: Arc<ComplexStructure<f64>>,
    b0: DMatrix<f64>,
    c: DMatrix<f64>,
    z1: DMatrix<Complex64>,
    z2: DMatrix<Complex64>,
}

#[derive(Clone, Debug)]
enum Geometry {
    Grassmann(GrassmannData),
    Isotropic(IsotropicData),
}

/// Everything needed to evaluate frames and sections near a center.
#[derive(Clone, Debug)]
pub struct ChartFrame {
    geometry: Geometry,
    label: ChartLabel,
    /// Coefficients of `W` and of the null part in the center basis.
    t_w: DMatrix<f64>,
    t_n: DMatrix<f64>,
    tol: TolerancePolicy,
}

/// Selection matrix with ones at `(idx[j], j)`.
fn selection(rows: usize, idx: &[usize]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        m[(i, j)] = 1.0;
    }
    m
}

fn skew_from_upper(x: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = x[idx];
            a[(j, i)] = -x[idx];
            idx += 1;
        }
    }
    a
}

fn upper(m: &DMatrix<f64>, diagonal: bool) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in if diagonal { i } else { i + 1 }..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn cinverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::ChartFailed("singular complex pairing".into()))
}

impl ChartFrame {
    pub fn new(center: &Center, tol: &TolerancePolicy) -> Result<Self> {
        match center {
            Center::Grassmann(v) => {
                let label = classify(v, tol)?;
                let b0 = float::orthonormalize(v.basis());
                let c = f64::nullspace(&b0.transpose(), tol);
                let r = b0.transpose() * v.ambient().form() * &b0;
                let (t, _) = f64::diagonalize_form(&r, tol)?;
                let m = label.r + label.s;
                Ok(ChartFrame {
                    geometry: Geometry::Grassmann(GrassmannData {
                        ambient: v.ambient().clone(),
                        b0,
                        c,
                    }),
                    label: ChartLabel::Grassmann(label),
                    t_w: t.columns(0, m).into_owned(),
                    t_n: t.columns(m, label.nu).into_owned(),
                    tol: *tol,
                })
            }
            Center::Isotropic(v) => {
                let label = classify_isotropic(v, tol)?;
                let ad = adapted_basis(v, tol)?;
                let n = v.n();
                let (k, m) = (label.k(), label.r + label.s);
                let b0 = ad.real_span();
                let centered = v.with_basis(b0.clone());
                let c = isotropic_complement(&centered)?;
                let w_idx: Vec<usize> = (k..k + m).collect();
                let n_idx: Vec<usize> = (0..k).chain(k + m..n).collect();
                Ok(ChartFrame {
                    geometry: Geometry::Isotropic(IsotropicData {
                        structure: v.structure().clone(),
                        b0,
                        c,
                        z1: ad.z.columns(0, k).into_owned(),
                        z2: ad.z.columns(n - k, k).into_owned(),
                    }),
                    label: ChartLabel::Isotropic(label),
                    t_w: selection(n, &w_idx),
                    t_n: selection(n, &n_idx),
                    tol: *tol,
                })
            }
        }
    }

    pub fn label(&self) -> ChartLabel {
        self.label
    }

    pub fn chart_dim(&self) -> usize {
        match &self.geometry {
            Geometry::Grassmann(g) => g.c.ncols() * g.b0.ncols(),
            Geometry::Isotropic(g) => {
                let n = g.b0.ncols();
                n * (n - 1) / 2
            }
        }
    }

    pub fn model(&self) -> TransversalModel {
        match self.label {
            ChartLabel::Grassmann(l) => TransversalModel::Symmetric { nu: l.nu },
            ChartLabel::Isotropic(l) => TransversalModel::Hermitian { k: l.k() },
        }
    }

    /// Basis `Y` of the point with chart coordinates `x`.
    pub fn basis_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.geometry {
            Geometry::Grassmann(g) => {
                let xm = DMatrix::from_column_slice(g.c.ncols(), g.b0.ncols(), x.as_slice());
                &g.b0 + &g.c * xm
            }
            Geometry::Isotropic(g) => &g.b0 + &g.c * skew_from_upper(x, g.b0.ncols()),
        }
    }

    /// Chart coordinates of a nearby point given by any basis.
    pub fn coordinates_of(&self, y: &DMatrix<f64>) -> Result<DVector<f64>> {
        match &self.geometry {
            Geometry::Grassmann(g) => {
                let m = g.b0.transpose() * y;
                let x = g.c.transpose() * y * crate::numeric::inverse(&m)?;
                Ok(DVector::from_column_slice(x.as_slice()))
            }
            Geometry::Isotropic(g) => {
                let gi = &g.structure.b_imag;
                let m = g.c.transpose() * gi * y;
                let nn = g.b0.transpose() * gi * y;
                let a = nn * crate::numeric::inverse(&m)?;
                Ok(DVector::from_vec(upper(&a, false)))
            }
        }
    }

    pub fn point_at(&self, x: &DVector<f64>) -> Center {
        let y = self.basis_at(x);
        match &self.geometry {
            Geometry::Grassmann(g) => {
                Center::Grassmann(SubspacePoint::from_parts(g.ambient.clone(), float::orthonormalize(&y), true))
            }
            Geometry::Isotropic(g) => {
                Center::Isotropic(IsotropicPoint::from_parts(g.structure.clone(), float::orthonormalize(&y)))
            }
        }
    }

    fn form(&self) -> &DMatrix<f64> {
        match &self.geometry {
            Geometry::Grassmann(g) => g.ambient.form(),
            Geometry::Isotropic(g) => &g.structure.b_real,
        }
    }

    /// `(W_y, Ẽ_y)` at chart coordinates `x`.
    pub fn subbundle_at(&self, x: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let y = self.basis_at(x);
        let f = self.form();
        let w = &y * &self.t_w;
        let nn = &y * &self.t_n;
        let (r, s) = self.label.rs();
        if w.ncols() == 0 {
            return Ok((w, nn));
        }
        let ww = w.transpose() * f * &w;
        let inertia = f64::inertia_report(&ww, &self.tol)?.certified()?;
        if inertia != Inertia::new(r, s, 0) {
            return Err(Error::ChartFailed(format!(
                "W lost its signature ({inertia}); shrink the radius"
            )));
        }
        let coeff = crate::numeric::solve(&ww, &(w.transpose() * f * &nn))?;
        let e = &nn - &w * coeff;
        Ok((w, e))
    }

    /// Gram matrix of the form on `Ẽ_y` (`ν×ν`, or `2k×2k` real).
    pub fn defining_section_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (_, e) = self.subbundle_at(x)?;
        Ok(e.transpose() * self.form() * &e)
    }

    pub fn hermitian_frame(&self, x: &DVector<f64>) -> Result<HermitianFrame> {
        let Geometry::Isotropic(g) = &self.geometry else {
            return Err(Error::Invalid("Hermitian frames exist only on isotropic charts".into()));
        };
        let (w, e) = self.subbundle_at(x)?;
        let k = e.ncols() / 2;
        let cz = |m: &DMatrix<f64>| complex_columns(m);
        // Z = b-orthocomplement of the complex span of W
        let mw = cz(&w);
        let project = |z: &DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
            if mw.ncols() == 0 {
                return Ok(z.clone());
            }
            let coeff = cinverse(&(mw.transpose() * &mw))? * (mw.transpose() * z);
            Ok(z - &mw * coeff)
        };
        let z1p = project(&g.z1)?;
        let z2p = project(&g.z2)?;
        // make Z₁ isotropic inside span(Z₁', Z₂'), then Z₂
        let a = z1p.transpose() * &z1p;
        let pm = z1p.transpose() * &z2p;
        let d = z2p.transpose() * &z2p;
        let pinv = cinverse(&pm)?;
        let mut xm = DMatrix::<Complex64>::zeros(k, k);
        for _ in 0..60 {
            let next = -(&pinv * (&a + xm.transpose() * &d * &xm)) * Complex64::new(0.5, 0.0);
            let done = (&next - &xm).norm() <= 1e-15 * (1.0 + next.norm());
            xm = next;
            if done {
                break;
            }
        }
        let z1 = &z1p + &z2p * xm;
        let q = z2p.transpose() * &z1;
        let y = -(cinverse(&q)? * &d) * Complex64::new(0.5, 0.0);
        let z2 = &z2p + &z1 * y;
        // coefficients of Ẽ in Z₁ ⊕ Z₂
        let mut f = DMatrix::<Complex64>::zeros(z1.nrows(), 2 * k);
        f.view_mut((0, 0), (z1.nrows(), k)).copy_from(&z1);
        f.view_mut((0, k), (z1.nrows(), k)).copy_from(&z2);
        let ec = cz(&e);
        let coeff = cinverse(&(f.adjoint() * &f))? * (f.adjoint() * &ec);
        let membership = (&f * &coeff - &ec).norm();
        if membership > 1e3 * self.tol.threshold(ec.norm().max(1.0)) {
            return Err(Error::Consistency(format!("Ẽ leaves Z (residual {membership:.3e})")));
        }
        let a1 = coeff.rows(0, k);
        let pi = DMatrix::from_fn(2 * k, 2 * k, |i, j| if i < k { a1[(i, j)].re } else { a1[(i - k, j)].im });
        let pi_inv = pi
            .clone()
            .try_inverse()
            .filter(|m| m.norm() * pi.norm() < 1e8)
            .ok_or_else(|| Error::Transversality("Z₂ meets Ẽ; shrink the radius".into()))?;
        let mut jk = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for i in 0..k {
            jk[(k + i, i)] = 1.0;
            jk[(i, k + i)] = -1.0;
        }
        let structure = &pi_inv * jk * &pi;
        let gram = e.transpose() * &g.structure.b_real * &e;
        let hermitian_residual = (structure.transpose() * &gram * &structure - &gram).norm();
        let square_residual = (&structure * &structure + DMatrix::identity(2 * k, 2 * k)).norm();
        let rm = pi_inv.transpose() * &gram * &pi_inv;
        let hermitian = DMatrix::from_fn(k, k, |i, j| Complex64::new(rm[(i, j)], rm[(i, k + j)]));
        Ok(HermitianFrame {
            e_tilde: e,
            structure,
            gram,
            hermitian,
            hermitian_residual,
            square_residual,
        })
    }

    /// Transversal coordinates: the upper triangle of the `ν×ν` Gram matrix,
    /// or `Re h_ij (i ≤ j)` and `Im h_ij (i < j)` of the Hermitian matrix.
    pub fn transversal_at(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self.label {
            ChartLabel::Grassmann(_) => Ok(DVector::from_vec(upper(&self.defining_section_at(x)?, true))),
            ChartLabel::Isotropic(_) => {
                let h = self.hermitian_frame(x)?.hermitian;
                let re = h.map(|z| z.re);
                let im = h.map(|z| z.im);
                let mut v = upper(&re, true);
                v.extend(upper(&im, false));
                Ok(DVector::from_vec(v))
            }
        }
    }

    /// Inertia of the transversal value, as a real form.
    pub fn transversal_inertia(&self, x: &DVector<f64>) -> Result<Inertia> {
        let s = self.defining_section_at(x)?;
        f64::inertia_report(&s, &self.tol)?.certified()
    }

    pub fn classify_at(&self, x: &DVector<f64>) -> Result<ChartLabel> {
        Ok(match self.point_at(x) {
            Center::Grassmann(v) => ChartLabel::Grassmann(classify(&v, &self.tol)?),
            Center::Isotropic(v) => ChartLabel::Isotropic(classify_isotropic(&v, &self.tol)?),
        })
    }

    /// Chart coordinates of `g·center`.
    pub fn translate(&self, g: &DMatrix<f64>) -> Result<DVector<f64>> {
        let b0 = match &self.geometry {
            Geometry::Grassmann(d) => &d.b0,
            Geometry::Isotropic(d) => &d.b0,
        };
        self.coordinates_of(&(g * b0))
    }

    /// Central-difference Jacobian of `f` at `x`.
    pub fn jacobian<F>(&self, x: &DVector<f64>, step: f64, f: F) -> Result<DMatrix<f64>>
    where
        F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let d = x.len();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            cols.push((f(&xp)? - f(&xm)?) / (2.0 * step));
        }
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = DMatrix::zeros(rows, d);
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        Ok(m)
    }
}

/// Evidence that a section defines the center's orbit.
#[derive(Clone, Debug, Serialize)]
pub struct DefiningSectionProbe {
    pub center: ChartLabel,
    pub fiber_dim: usize,
    /// Norms of the section at points on the center's orbit.
    pub on_orbit_values: Vec<f64>,
    /// Singular values of the Jacobian at the center, largest first.
    pub jacobian_singular_values: Vec<f64>,
}

/// Which section a probe differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbedSection {
    /// The restriction to `Ẽ`.
    Restricted,
    /// The full restriction `σ₁(y)` on `V_y` (Grassmann only).
    Full,
}

pub fn defining_probe<R: Rng + ?Sized>(
    frame: &ChartFrame,
    h: &MatrixLieAlgebra<f64>,
    section: ProbedSection,
    orbit_points: usize,
    rng: &mut R,
) -> Result<DefiningSectionProbe> {
    let eval = |x: &DVector<f64>| -> Result<DVector<f64>> {
        match section {
            ProbedSection::Restricted => frame.transversal_at(x),
            ProbedSection::Full => {
                let y = frame.basis_at(x);
                Ok(DVector::from_vec(upper(&(y.transpose() * frame.form() * &y), true)))
            }
        }
    };
    let zero = DVector::zeros(frame.chart_dim());
    let fiber_dim = eval(&zero)?.len();
    let mut on_orbit = Vec::with_capacity(orbit_points);
    for _ in 0..orbit_points {
        let g = random_group_element(h, 1e-2, rng)?;
        let x = frame.translate(&g)?;
        on_orbit.push(eval(&x)?.norm());
    }
    let jac = frame.jacobian(&zero, FD_STEP, eval)?;
    let mut sv: Vec<f64> = if jac.is_empty() {
        Vec::new()
    } else {
        jac.singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(DefiningSectionProbe {
        center: frame.label(),
        fiber_dim,
        on_orbit_values: on_orbit,
        jacobian_singular_values: sv,
    })
}

/// On-orbit values within `10·θ` and a Jacobian of full row rank with
/// margin `10³·θ`.
pub fn verify_defining(probe: &DefiningSectionProbe, tol: &TolerancePolicy) -> Result<bool> {
    let vanishes = probe
        .on_orbit_values
        .iter()
        .all(|&v| v <= AMBIGUITY_BAND * tol.threshold(1.0));
    if probe.fiber_dim == 0 {
        return Ok(vanishes);
    }
    if probe.fiber_dim > probe.jacobian_singular_values.len() {
        return Ok(false);
    }
    let smax = probe.jacobian_singular_values.first().copied().unwrap_or(0.0);
    let theta = tol.threshold(smax);
    let smallest = probe.jacobian_singular_values[probe.fiber_dim - 1];
    if smallest > theta && smallest < 1e3 * theta {
        return Err(Error::AmbiguousRank {
            value: smallest,
            threshold: theta,
        });
    }
    Ok(vanishes && smallest >= 1e3 * theta)
}

/// `ψ(y) = (orbit coordinates, transversal coordinates)`.
#[derive(Clone, Debug)]
pub struct SliceChart {
    pub frame: ChartFrame,
    /// Orthonormal basis of the orbit tangent in chart coordinates.
    pub orbit_frame: DMatrix<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConcordanceStats {
    pub points: usize,
    pub agree: usize,
    pub disagree: usize,
    /// Points where a tolerance decision fell inside the ambiguity band.
    pub fragile: usize,
    pub worst_round_trip: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceChartSummary {
    pub center: ChartLabel,
    pub chart_dim: usize,
    pub orbit_dim: usize,
    pub transversal: TransversalModel,
    pub radius: f64,
    pub round_trip: ConcordanceStats,
    pub concordance: ConcordanceStats,
}

impl SliceChart {
    pub fn psi(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let orbit = self.orbit_frame.transpose() * x;
        let t = self.frame.transversal_at(x)?;
        let mut out = DVector::zeros(orbit.len() + t.len());
        out.rows_mut(0, orbit.len()).copy_from(&orbit);
        out.rows_mut(orbit.len(), t.len()).copy_from(&t);
        Ok(out)
    }

    /// Damped Newton on `ψ`; `None` when it does not converge.
    pub fn psi_inverse(&self, target: &DVector<f64>) -> Option<DVector<f64>> {
        let mut x = &self.orbit_frame * target.rows(0, self.orbit_frame.ncols());
        let mut f = self.psi(&x).ok()? - target;
        for _ in 0..NEWTON_ITERATIONS {
            if f.norm() <= 1e-14 * (1.0 + target.norm()) {
                return Some(x);
            }
            let jac = self.frame.jacobian(&x, 1e-7, |p| self.psi(p)).ok()?;
            let step = jac.lu().solve(&f)?;
            let mut damping = 1.0;
            loop {
                let trial = &x - &step * damping;
                if let Ok(ft) = self.psi(&trial).map(|v| v - target) {
                    if ft.norm() < f.norm() || damping < 1e-4 {
                        x = trial;
                        f = ft;
                        break;
                    }
                }
                damping *= 0.5;
                if damping < 1e-6 {
                    return None;
                }
            }
        }
        (f.norm() <= 1e-12 * (1.0 + target.norm())).then_some(x)
    }

    /// Points drawn uniformly from the ball of the chart radius.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        ball_point(self.frame.chart_dim(), self.radius, rng)
    }

    pub fn round_trip<R: Rng + ?Sized>(&self, points: usize, rng: &mut R) -> ConcordanceStats {
        let mut stats = ConcordanceStats::default();
        for _ in 0..points {
            let x = self.sample_point(rng);
            stats.points += 1;
            let back = self.psi(&x).ok().and_then(|t| self.psi_inverse(&t));
            match back {
                Some(b) => {
                    let err = (&b - &x).norm();
                    stats.worst_round_trip = stats.worst_round_trip.max(err);
                    if err <= ROUND_TRIP_LIMIT {
                        stats.agree += 1;
                    } else {
                        stats.disagree += 1;
                    }
                }
                None => {
                    stats.disagree += 1;
                    stats.worst_round_trip = f64::INFINITY;
                }
            }
        }
        stats
    }

    /// Compares the transversal inertia with `(r′−r, s′−s)` from a fresh
    /// classification.
    pub fn concordance<R: Rng + ?Sized>(&self, points: usize, rng: &mut R) -> ConcordanceStats {
        let mut stats = ConcordanceStats::default();
        let (r, s) = self.frame.label().rs();
        for _ in 0..points {
            let x = self.sample_point(rng);
            stats.points += 1;
            match (self.frame.transversal_inertia(&x), self.frame.classify_at(&x)) {
                (Ok(t), Ok(label)) => {
                    let (r2, s2) = label.rs();
                    if r2 >= r && s2 >= s && (t.positive, t.negative) == (r2 - r, s2 - s) {
                        stats.agree += 1;
                    } else {
                        stats.disagree += 1;
                    }
                }
                (Err(e), _) | (_, Err(e)) if e.is_ambiguity() => stats.fragile += 1,
                _ => stats.disagree += 1,
            }
        }
        stats
    }

    pub fn summary<R: Rng + ?Sized>(&self, round_trips: usize, points: usize, rng: &mut R) -> SliceChartSummary {
        SliceChartSummary {
            center: self.frame.label(),
            chart_dim: self.frame.chart_dim(),
            orbit_dim: self.orbit_frame.ncols(),
            transversal: self.frame.model(),
            radius: self.radius,
            round_trip: self.round_trip(round_trips, rng),
            concordance: self.concordance(points, rng),
        }
    }
}

fn ball_point<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = g.norm();
    if norm == 0.0 {
        return g;
    }
    let u: f64 = rng.random();
    g * (radius * u.powf(1.0 / d as f64) / norm)
}

/// Builds a chart and bisects the radius until 100 round trips and the
/// signature concordance hold at every test point.
pub fn build_slice_chart<R: Rng + ?Sized>(
    center: &Center,
    h: &MatrixLieAlgebra<f64>,
    initial_radius: f64,
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<SliceChart> {
    let frame = ChartFrame::new(center, tol)?;
    let probe = defining_probe(&frame, h, ProbedSection::Restricted, 20, rng)?;
    if !verify_defining(&probe, tol)? {
        return Err(Error::ChartFailed(format!(
            "the restricted section is not defining at {}",
            frame.label()
        )));
    }
    // orbit tangent: image of the algebra in chart coordinates
    let zero = DVector::zeros(frame.chart_dim());
    let b0 = frame.basis_at(&zero);
    let mut tangent = DMatrix::zeros(frame.chart_dim(), h.dim());
    for (j, x) in h.basis.iter().enumerate() {
        let moved = frame.coordinates_of(&(&b0 + x * &b0 * FD_STEP))?;
        let back = frame.coordinates_of(&(&b0 - x * &b0 * FD_STEP))?;
        tangent.set_column(j, &((moved - back) / (2.0 * FD_STEP)));
    }
    // the floor follows the size of the action, so a fixed point gives rank 0
    let action = h.basis.iter().map(|x| (x * &b0).norm()).fold(0.0, f64::max);
    let orbit_frame = float::range_basis(&tangent, &TolerancePolicy::new(1e-7, 1e-7 * action.max(1.0))?);
    if orbit_frame.ncols() + frame.model().dim() != frame.chart_dim() {
        return Err(Error::ChartFailed(format!(
            "orbit dimension {} plus transversal {} differs from {}",
            orbit_frame.ncols(),
            frame.model().dim(),
            frame.chart_dim()
        )));
    }
    let mut chart = SliceChart {
        frame,
        orbit_frame,
        radius: initial_radius,
    };
    while chart.radius >= MIN_RADIUS {
        let rt = chart.round_trip(100, rng);
        let cc = chart.concordance(100, rng);
        if rt.disagree == 0 && cc.disagree == 0 {
            return Ok(chart);
        }
        chart.radius *= 0.5;
    }
    Err(Error::ChartFailed("radius bisection went below 1e-8".into()))
}

/// Values and gradient norms of the top section `σ_i` along an orbit.
#[derive(Clone, Debug, Serialize)]
pub struct DensityProbeReport {
    pub center: ChartLabel,
    pub section: String,
    pub points: usize,
    pub max_value: f64,
    pub min_gradient: f64,
    pub max_gradient: f64,
    /// Values vanish and gradients stay above the floor.
    pub defining: bool,
    pub gradient_floor: f64,
}

/// Lowest gradient norm that counts as nonvanishing.
pub const GRADIENT_FLOOR: f64 = 1e-6;

/// Top section `det(b|_V)` and its chart gradient at `g·center` for random
/// `g` in the group of `h`.
pub fn density_probe<R: Rng + ?Sized>(
    center: &Center,
    h: &MatrixLieAlgebra<f64>,
    points: usize,
    tol: &TolerancePolicy,
    rng: &mut R,
) -> Result<DensityProbeReport> {
    let (label, form, basis) = match center {
        Center::Grassmann(v) => (
            ChartLabel::Grassmann(classify(v, tol)?),
            v.ambient().form().clone(),
            v.basis().clone(),
        ),
        Center::Isotropic(v) => (
            ChartLabel::Isotropic(classify_isotropic(v, tol)?),
            v.structure().b_real.clone(),
            v.basis().clone(),
        ),
    };
    let (mut max_value, mut min_grad, mut max_grad) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..points {
        let g = random_group_element(h, 1.0, rng)?;
        let b = float::orthonormalize(&(&g * &basis));
        let moved = match center {
            Center::Grassmann(v) => Center::Grassmann(SubspacePoint::from_parts(v.ambient().clone(), b, true)),
            Center::Isotropic(v) => Center::Isotropic(v.with_basis(b)),
        };
        let frame = ChartFrame::new(&moved, tol)?;
        let sigma = |x: &DVector<f64>| -> Result<DVector<f64>> {
            let y = frame.basis_at(x);
            Ok(DVector::from_element(1, (y.transpose() * &form * &y).determinant()))
        };
        let zero = DVector::zeros(frame.chart_dim());
        max_value = max_value.max(sigma(&zero)?[0].abs());
        let grad = frame.jacobian(&zero, FD_STEP, sigma)?.norm();
        min_grad = min_grad.min(grad);
        max_grad = max_grad.max(grad);
    }
    Ok(DensityProbeReport {
        center: label,
        section: format!("sigma_{}", basis.ncols()),
        points,
        max_value,
        min_gradient: min_grad,
        max_gradient: max_grad,
        defining: max_value <= GRADIENT_FLOOR && min_grad >= GRADIENT_FLOOR,
        gradient_floor: GRADIENT_FLOOR,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::standard_representative;
    use crate::isotropic::{standard_isotropic_representative, standard_structure};
    use crate::lie::{build_algebra, AlgebraName};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn gr_center(r: usize, s: usize, nu: usize) -> Center {
        let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
        Center::Grassmann(standard_representative(&OrbitLabel::new(r, s, nu), &amb).unwrap())
    }

    fn iso_center(n: usize, r: usize, s: usize) -> Center {
        let st = Arc::new(standard_structure::<f64>(n).unwrap());
        let label = IsotropicLabel::new(n, r, s).unwrap();
        Center::Isotropic(standard_isotropic_representative(&label, &st).unwrap())
    }

    #[test]
    fn subbundle_at_center_is_the_radical() {
        let t = tol();
        let frame = ChartFrame::new(&gr_center(1, 0, 1), &t).unwrap();
        let zero = DVector::zeros(frame.chart_dim());
        let (_, e) = frame.subbundle_at(&zero).unwrap();
        assert_eq!(e.ncols(), 1);
        assert!(frame.defining_section_at(&zero).unwrap().norm() < 1e-15);
        let open = ChartFrame::new(&gr_center(1, 1, 0), &t).unwrap();
        assert_eq!(open.subbundle_at(&DVector::zeros(4)).unwrap().1.ncols(), 0);
    }

    #[test]
    fn restricted_section_is_defining() {
        let t = tol();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let h = build_algebra::<f64>(AlgebraName::So { p: 2, q: 2 }, &t).unwrap();
        for (r, s, nu) in [(1, 0, 1), (0, 1, 1), (0, 0, 2)] {
            let frame = ChartFrame::new(&gr_center(r, s, nu), &t).unwrap();
            let probe = defining_probe(&frame, &h, ProbedSection::Restricted, 10, &mut rng).unwrap();
            assert!(verify_defining(&probe, &t).unwrap(), "({r},{s},{nu}) {probe:?}");
        }
        let frame = ChartFrame::new(&gr_center(1, 0, 1), &t).unwrap();
        let probe = defining_probe(&frame, &h, ProbedSection::Full, 10, &mut rng).unwrap();
        assert!(!verify_defining(&probe, &t).unwrap());
    }

    #[test]
    fn hermitian_frame_at_center() {
        let t = tol();
        let frame = ChartFrame::new(&iso_center(3, 1, 0), &t).unwrap();
        let hf = frame.hermitian_frame(&DVector::zeros(3)).unwrap();
        assert!(hf.square_residual < 1e-12);
        assert!(hf.hermitian_residual < 1e-12);
        assert!(hf.hermitian.norm() < 1e-12);
    }

    #[test]
    fn hermitian_frame_nearby() {
        let t = tol();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let frame = ChartFrame::new(&iso_center(4, 0, 0), &t).unwrap();
        for _ in 0..50 {
            let x = ball_point(frame.chart_dim(), 0.1, &mut rng);
            let hf = frame.hermitian_frame(&x).unwrap();
            assert!(hf.hermitian_residual < 1e-10, "{}", hf.hermitian_residual);
            assert!(hf.square_residual < 1e-10);
        }
    }

    #[test]
    fn charts_build_and_agree() {
        let t = tol();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let h = build_algebra::<f64>(AlgebraName::So { p: 2, q: 2 }, &t).unwrap();
        let chart = build_slice_chart(&gr_center(0, 0, 2), &h, 0.5, &t, &mut rng).unwrap();
        let sum = chart.summary(50, 200, &mut rng);
        assert_eq!(sum.round_trip.disagree, 0);
        assert_eq!(sum.concordance.disagree, 0, "{sum:?}");
        assert_eq!(sum.orbit_dim + 3, 4);
        let hi = build_algebra::<f64>(AlgebraName::SoComplexRealified { n: 3 }, &t).unwrap();
        let chart = build_slice_chart(&iso_center(3, 1, 0), &hi, 0.5, &t, &mut rng).unwrap();
        let sum = chart.summary(50, 200, &mut rng);
        assert_eq!(sum.round_trip.disagree, 0);
        assert_eq!(sum.concordance.disagree, 0, "{sum:?}");
    }

    #[test]
    fn fixed_point_orbit_has_empty_tangent() {
        let t = tol();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let h = build_algebra::<f64>(AlgebraName::SoComplexRealified { n: 2 }, &t).unwrap();
        let chart = build_slice_chart(&iso_center(2, 0, 0), &h, 0.5, &t, &mut rng).unwrap();
        let sum = chart.summary(50, 200, &mut rng);
        assert_eq!((sum.orbit_dim, sum.chart_dim), (0, 1));
        assert_eq!(sum.concordance.disagree, 0, "{sum:?}");
    }

    #[test]
    fn density_probe_examples() {
        let t = tol();
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let h = build_algebra::<f64>(AlgebraName::So { p: 2, q: 2 }, &t).unwrap();
        let d = density_probe(&gr_center(1, 0, 1), &h, 20, &t, &mut rng).unwrap();
        assert!(d.defining, "{d:?}");
        let d = density_probe(&gr_center(0, 0, 2), &h, 20, &t, &mut rng).unwrap();
        assert!(d.max_value <= 1e-6 && d.max_gradient <= 1e-6, "{d:?}");
        let hi = build_algebra::<f64>(AlgebraName::SoComplexRealified { n: 3 }, &t).unwrap();
        let d = density_probe(&iso_center(3, 1, 0), &hi, 20, &t, &mut rng).unwrap();
        assert!(d.max_value <= 1e-6 && d.max_gradient <= 1e-6, "{d:?}");
    }
}
