//! Scalar fields, dense matrix kernels, and certified rank / inertia.
//!
//! Two backends share one interface through the [`Field`] trait:
//!
//! * `f64`: singular values and symmetric eigenvalues are compared against a
//!   threshold `θ = relative_epsilon · ‖A‖ + absolute_floor`. Values within a
//!   factor [`AMBIGUITY_BAND`] of `θ` are flagged as ambiguous.
//! * [`BigRational`]: exact row reduction for rank and kernels, and
//!   fraction-free symmetric elimination (Bareiss with symmetric pivoting) for
//!   inertia.
//!
//! Complex matrices only appear at the boundary ([`ScalarMatrix`]) and through
//! the [`realify`] / [`complexify`] pair.

mod exact;
pub(crate) mod float;
pub mod literal;

use std::fmt;
use std::ops::Neg;

use nalgebra::{ClosedAddAssign, ClosedDivAssign, ClosedMulAssign, ClosedSubAssign, DMatrix};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use literal::{FieldKind, Scalar, ScalarMatrix};

/// Width of the "don't know" zone around the threshold, as a multiplicative
/// factor: a value `v` with `θ / BAND < |v| ≤ θ · BAND` is ambiguous.
pub const AMBIGUITY_BAND: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub relative_epsilon: f64,
    pub absolute_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            relative_epsilon: 1e-9,
            absolute_floor: 1e-12,
        }
    }
}

impl TolerancePolicy {
    pub fn new(relative_epsilon: f64, absolute_floor: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(relative_epsilon) || !ok(absolute_floor) {
            return Err(Error::Invalid(format!(
                "tolerances must be positive and finite (got {relative_epsilon}, {absolute_floor})"
            )));
        }
        Ok(Self {
            relative_epsilon,
            absolute_floor,
        })
    }

    /// `θ` for an operator whose norm estimate is `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.relative_epsilon * scale + self.absolute_floor
    }
}

/// Counts of positive, negative and zero eigenvalues of a symmetric form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub nullity: usize,
}

impl Inertia {
    pub fn new(positive: usize, negative: usize, nullity: usize) -> Self {
        Self {
            positive,
            negative,
            nullity,
        }
    }

    pub fn dimension(&self) -> usize {
        self.positive + self.negative + self.nullity
    }

    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.positive, self.negative, self.nullity)
    }
}

/// Inertia together with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InertiaReport {
    pub inertia: Inertia,
    /// The threshold `θ` (zero for the exact backend).
    pub threshold: f64,
    /// Smallest `|λ|` counted as nonzero.
    pub smallest_nonzero: Option<f64>,
    /// Largest `|λ|` counted as zero.
    pub largest_zero: Option<f64>,
    /// The alternative inertia obtained by counting every ambiguous eigenvalue
    /// as nonzero, when it differs.
    pub upper_candidate: Option<Inertia>,
}

impl InertiaReport {
    fn exact(inertia: Inertia) -> Self {
        Self {
            inertia,
            threshold: 0.0,
            smallest_nonzero: None,
            largest_zero: None,
            upper_candidate: None,
        }
    }

    /// Turns an ambiguous report into a [`Error::NearBoundary`].
    pub fn certified(self) -> Result<Inertia> {
        match self.upper_candidate {
            Some(upper) => {
                let margin = match (self.smallest_nonzero, self.largest_zero) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => 0.0,
                };
                Err(Error::NearBoundary {
                    lower: self.inertia,
                    upper,
                    margin,
                })
            }
            None => Ok(self.inertia),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub threshold: f64,
    pub smallest_kept: Option<f64>,
    pub largest_dropped: Option<f64>,
    /// Some singular value lies inside the ambiguity band.
    pub ambiguous: bool,
}

impl RankReport {
    fn exact(rank: usize) -> Self {
        Self {
            rank,
            threshold: 0.0,
            smallest_kept: None,
            largest_dropped: None,
            ambiguous: false,
        }
    }

    pub fn certified(&self) -> Result<usize> {
        if self.ambiguous {
            let value = self
                .smallest_kept
                .into_iter()
                .chain(self.largest_dropped)
                .fold(f64::INFINITY, f64::min);
            Err(Error::AmbiguousRank {
                value,
                threshold: self.threshold,
            })
        } else {
            Ok(self.rank)
        }
    }

    /// Distance of the decision from the threshold, as `min(kept/θ, θ/dropped)`.
    pub fn margin(&self) -> Option<f64> {
        if self.threshold == 0.0 {
            return None;
        }
        let kept = self.smallest_kept.map(|v| v / self.threshold);
        let dropped = self
            .largest_dropped
            .map(|v| self.threshold / v.max(f64::MIN_POSITIVE));
        match (kept, dropped) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// A scalar field usable by the generic geometry code: `f64` with tolerance
/// decisions, or exact rationals.
pub trait Field:
    nalgebra::Scalar
    + Zero
    + One
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + ClosedDivAssign
    + Neg<Output = Self>
    + Send
    + Sync
{
    const KIND: FieldKind;

    fn from_i64(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// `1/√x` when it exists in the field.
    fn inv_sqrt(&self) -> Option<Self>;

    /// Whether `self` counts as zero relative to `scale`.
    fn is_negligible(&self, scale: f64, tol: &TolerancePolicy) -> bool;

    fn rank_report(m: &DMatrix<Self>, tol: &TolerancePolicy) -> RankReport;

    fn inertia_report(m: &DMatrix<Self>, tol: &TolerancePolicy) -> Result<InertiaReport>;

    /// Kernel basis; orthonormal for floats, reduced-echelon for rationals.
    fn nullspace(m: &DMatrix<Self>, tol: &TolerancePolicy) -> DMatrix<Self>;

    /// `T` and `d` with `Tᵀ·form·T = diag(d)`, positive entries first.
    /// Floats normalise `d` to `±1`.
    fn diagonalize_form(
        form: &DMatrix<Self>,
        tol: &TolerancePolicy,
    ) -> Result<(DMatrix<Self>, Vec<Self>)>;

    /// Canonical basis of the column span of independent columns.
    fn canonical_basis(m: &DMatrix<Self>) -> DMatrix<Self>;

    fn to_literal(m: &DMatrix<Self>) -> ScalarMatrix;

    fn from_literal(m: &ScalarMatrix) -> Result<DMatrix<Self>>;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Field for f64 {
    const KIND: FieldKind = FieldKind::Real;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn inv_sqrt(&self) -> Option<Self> {
        (*self > 0.0).then(|| 1.0 / self.sqrt())
    }

    fn is_negligible(&self, scale: f64, tol: &TolerancePolicy) -> bool {
        self.abs() <= tol.threshold(scale)
    }

    fn rank_report(m: &DMatrix<Self>, tol: &TolerancePolicy) -> RankReport {
        float::rank_report(m, tol)
    }

    fn inertia_report(m: &DMatrix<Self>, tol: &TolerancePolicy) -> Result<InertiaReport> {
        float::inertia_report(m, tol)
    }

    fn nullspace(m: &DMatrix<Self>, tol: &TolerancePolicy) -> DMatrix<Self> {
        float::nullspace(m, tol)
    }

    fn diagonalize_form(
        form: &DMatrix<Self>,
        tol: &TolerancePolicy,
    ) -> Result<(DMatrix<Self>, Vec<Self>)> {
        float::diagonalize_form(form, tol)
    }

    fn canonical_basis(m: &DMatrix<Self>) -> DMatrix<Self> {
        float::orthonormalize(m)
    }

    fn to_literal(m: &DMatrix<Self>) -> ScalarMatrix {
        ScalarMatrix::Real(m.clone())
    }

    fn from_literal(m: &ScalarMatrix) -> Result<DMatrix<Self>> {
        m.to_real()
    }
}

impl Field for BigRational {
    const KIND: FieldKind = FieldKind::Rational;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn inv_sqrt(&self) -> Option<Self> {
        exact::inv_sqrt(self)
    }

    fn is_negligible(&self, _scale: f64, _tol: &TolerancePolicy) -> bool {
        self.is_zero()
    }

    fn rank_report(m: &DMatrix<Self>, _tol: &TolerancePolicy) -> RankReport {
        RankReport::exact(exact::rank(m))
    }

    fn inertia_report(m: &DMatrix<Self>, _tol: &TolerancePolicy) -> Result<InertiaReport> {
        Ok(InertiaReport::exact(exact::inertia(m)?))
    }

    fn nullspace(m: &DMatrix<Self>, _tol: &TolerancePolicy) -> DMatrix<Self> {
        exact::nullspace(m)
    }

    fn diagonalize_form(
        form: &DMatrix<Self>,
        _tol: &TolerancePolicy,
    ) -> Result<(DMatrix<Self>, Vec<Self>)> {
        exact::diagonalize_form(form)
    }

    fn canonical_basis(m: &DMatrix<Self>) -> DMatrix<Self> {
        m.clone()
    }

    fn to_literal(m: &DMatrix<Self>) -> ScalarMatrix {
        ScalarMatrix::Rational(m.clone())
    }

    fn from_literal(m: &ScalarMatrix) -> Result<DMatrix<Self>> {
        m.to_rational()
    }
}

/// Inertia of a symmetric form. Ambiguous float decisions are an error.
pub fn inertia_of<T: Field>(form: &DMatrix<T>, tol: &TolerancePolicy) -> Result<Inertia> {
    T::inertia_report(form, tol)?.certified()
}

/// Numerical (or exact) rank. Never fails; inspect the report for margins.
pub fn rank_of<T: Field>(m: &DMatrix<T>, tol: &TolerancePolicy) -> usize {
    T::rank_report(m, tol).rank
}

pub fn nullspace_basis<T: Field>(m: &DMatrix<T>, tol: &TolerancePolicy) -> DMatrix<T> {
    T::nullspace(m, tol)
}

/// Basis of `colspan(a) ∩ colspan(b)` from the kernel of `[a | −b]`.
pub fn subspace_intersection<T: Field>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: &TolerancePolicy,
) -> Result<DMatrix<T>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "intersection of subspaces in R^{} and R^{}",
            a.nrows(),
            b.nrows()
        )));
    }
    let a = T::canonical_basis(a);
    let b = T::canonical_basis(b);
    let (n, ka, kb) = (a.nrows(), a.ncols(), b.ncols());
    if ka == 0 || kb == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut stacked = DMatrix::<T>::zeros(n, ka + kb);
    stacked.view_mut((0, 0), (n, ka)).copy_from(&a);
    stacked.view_mut((0, ka), (n, kb)).copy_from(&(-b));
    let report = T::rank_report(&stacked, tol);
    if report.ambiguous {
        let value = report
            .smallest_kept
            .into_iter()
            .chain(report.largest_dropped)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::IllConditioned {
            value,
            threshold: report.threshold,
        });
    }
    let kernel = T::nullspace(&stacked, tol);
    let coeffs = kernel.rows(0, ka).into_owned();
    let raw = &a * coeffs;
    Ok(T::canonical_basis(&raw))
}

/// Determinant by Gaussian elimination with magnitude pivoting.
pub fn determinant<T: Field>(m: &DMatrix<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[(r, col)].is_zero())
            .max_by(|&x, &y| a[(x, col)].magnitude().total_cmp(&a[(y, col)].magnitude()));
        let Some(p) = pivot else {
            return T::zero();
        };
        if p != col {
            a.swap_rows(p, col);
            det = -det;
        }
        let piv = a[(col, col)].clone();
        det *= piv.clone();
        for r in col + 1..n {
            if a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone() / piv.clone();
            for c in col..n {
                let v = a[(col, c)].clone() * factor.clone();
                a[(r, c)] -= v;
            }
        }
    }
    det
}

/// Solves `a · x = b` for square invertible `a`.
pub fn solve<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} system and {} right-hand rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let n = a.nrows();
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = a.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[(x, col)].magnitude().total_cmp(&m[(y, col)].magnitude()))
            .unwrap();
        if m[(p, col)].is_zero() || m[(p, col)].magnitude() <= f64::EPSILON * scale * n as f64 && T::KIND == FieldKind::Real {
            return Err(Error::Invalid("singular linear system".into()));
        }
        m.swap_rows(p, col);
        rhs.swap_rows(p, col);
        let piv = m[(col, col)].clone();
        for r in 0..n {
            if r == col || m[(r, col)].is_zero() {
                continue;
            }
            let factor = m[(r, col)].clone() / piv.clone();
            for c in col..n {
                let v = m[(col, c)].clone() * factor.clone();
                m[(r, c)] -= v;
            }
            for c in 0..rhs.ncols() {
                let v = rhs[(col, c)].clone() * factor.clone();
                rhs[(r, c)] -= v;
            }
        }
    }
    for r in 0..n {
        let piv = m[(r, r)].clone();
        for c in 0..rhs.ncols() {
            let v = rhs[(r, c)].clone() / piv.clone();
            rhs[(r, c)] = v;
        }
    }
    Ok(rhs)
}

pub fn inverse<T: Field>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    solve(a, &DMatrix::identity(a.nrows(), a.nrows()))
}

/// Inertia of a Hermitian matrix. The realification of a Hermitian matrix is
/// symmetric with every eigenvalue doubled.
pub fn hermitian_inertia(m: &DMatrix<Complex64>, tol: &TolerancePolicy) -> Result<Inertia> {
    let doubled = inertia_of(&realify(m), tol)?;
    Ok(Inertia::new(doubled.positive / 2, doubled.negative / 2, doubled.nullity / 2))
}

/// Inertia of a literal of any field (Hermitian for complex).
pub fn inertia_of_literal(m: &ScalarMatrix, tol: &TolerancePolicy) -> Result<Inertia> {
    match m {
        ScalarMatrix::Real(a) => inertia_of(a, tol),
        ScalarMatrix::Rational(a) => inertia_of(a, tol),
        ScalarMatrix::Complex(a) => hermitian_inertia(a, tol),
    }
}

/// Rank of a literal of any field; complex rank is half the realified rank.
pub fn rank_of_literal(m: &ScalarMatrix, tol: &TolerancePolicy) -> usize {
    match m {
        ScalarMatrix::Real(a) => rank_of(a, tol),
        ScalarMatrix::Rational(a) => rank_of(a, tol),
        ScalarMatrix::Complex(a) => rank_of(&realify(a), tol) / 2,
    }
}

/// Converts an integer matrix into any field.
pub fn from_integers<T: Field>(rows: usize, cols: usize, entries: &[i64]) -> DMatrix<T> {
    assert_eq!(entries.len(), rows * cols);
    DMatrix::from_fn(rows, cols, |i, j| T::from_i64(entries[i * cols + j]))
}

pub fn to_f64_matrix<T: Field>(m: &DMatrix<T>) -> DMatrix<f64> {
    m.map(|v| v.to_f64())
}

/// `diag(1,…,1,−1,…,−1)` with `p` plus and `q` minus entries.
pub fn signature_form<T: Field>(p: usize, q: usize) -> DMatrix<T> {
    DMatrix::from_fn(p + q, p + q, |i, j| match (i == j, i < p) {
        (false, _) => T::zero(),
        (true, true) => T::one(),
        (true, false) => -T::one(),
    })
}

/// Complex `n×m` matrix `A + iB` as the real `2n×2m` block matrix
/// `[[A, −B], [B, A]]` in (real parts, imaginary parts) coordinates.
pub fn realify(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (n, k) = m.shape();
    let mut out = DMatrix::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + k)] = z.re;
            out[(i, j + k)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`realify`]; fails if the block structure is violated.
pub fn complexify(m: &DMatrix<f64>, tol: &TolerancePolicy) -> Result<DMatrix<Complex64>> {
    let (rows, cols) = m.shape();
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::Dimension(format!(
            "complexify needs even dimensions, got {rows}x{cols}"
        )));
    }
    let (n, k) = (rows / 2, cols / 2);
    let theta = tol.threshold(m.norm());
    let mut out = DMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            let (a, b) = (m[(i, j)], m[(i + n, j)]);
            let (a2, b2) = (m[(i + n, j + k)], -m[(i, j + k)]);
            if (a - a2).abs() > theta || (b - b2).abs() > theta {
                return Err(Error::Invalid(
                    "matrix does not commute with the complex structure".into(),
                ));
            }
            out[(i, j)] = Complex64::new(0.5 * (a + a2), 0.5 * (b + b2));
        }
    }
    Ok(out)
}
