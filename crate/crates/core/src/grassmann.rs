//! Grassmannians and two-step flags of a real quadratic space `(ℝ^{p+q}, b)`,
//! classified into orbits of the orthogonal group of `b`.
//!
//! The orbit of an `i`-dimensional subspace `W` is determined by the inertia
//! `(r, s, ν)` of `b|_W`. It is non-empty exactly when `W` fits: `r + ν ≤ p`
//! and `s + ν ≤ q` (each null direction uses one positive and one negative
//! direction of the ambient form). Its codimension is `ν(ν+1)/2`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    self, float, Field, Inertia, InertiaReport, ScalarMatrix, TolerancePolicy, AMBIGUITY_BAND,
};

/// A vector space with a nondegenerate symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct QuadraticSpace<T: Field> {
    form: DMatrix<T>,
    inertia: Inertia,
    /// Columns `t_j` with `t_jᵀ·form·t_k = δ_jk·d_j`, positive `d` first.
    diagonalizer: DMatrix<T>,
    diagonal: Vec<T>,
}

impl<T: Field> QuadraticSpace<T> {
    pub fn new(form: DMatrix<T>, tol: &TolerancePolicy) -> Result<Self> {
        let inertia = numeric::inertia_of(&form, tol)?;
        if inertia.nullity != 0 {
            return Err(Error::Invalid(format!(
                "ambient form is degenerate, inertia {inertia}"
            )));
        }
        let (diagonalizer, diagonal) = T::diagonalize_form(&form, tol)?;
        Ok(Self {
            form,
            inertia,
            diagonalizer,
            diagonal,
        })
    }

    /// `diag(1,…,1,−1,…,−1)`.
    pub fn standard(p: usize, q: usize) -> Self {
        let form = numeric::signature_form::<T>(p, q);
        let diagonal = (0..p + q)
            .map(|k| if k < p { T::one() } else { -T::one() })
            .collect();
        Self {
            diagonalizer: DMatrix::identity(p + q, p + q),
            form,
            inertia: Inertia::new(p, q, 0),
            diagonal,
        }
    }

    pub fn dimension(&self) -> usize {
        self.form.nrows()
    }

    pub fn p(&self) -> usize {
        self.inertia.positive
    }

    pub fn q(&self) -> usize {
        self.inertia.negative
    }

    pub fn form(&self) -> &DMatrix<T> {
        &self.form
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    fn plus(&self, a: usize) -> (DMatrix<T>, T) {
        (
            self.diagonalizer.columns(a, 1).into_owned(),
            self.diagonal[a].clone(),
        )
    }

    fn minus(&self, b: usize) -> (DMatrix<T>, T) {
        self.plus(self.p() + b)
    }

    /// A null vector `u` and a partner `w` with `b(u,w) = 1`, `b(w,w) = 0`,
    /// built from the `a`-th positive and `b`-th negative direction.
    fn hyperbolic_pair(&self, a: usize, b: usize) -> Result<(DMatrix<T>, DMatrix<T>)> {
        let (pa, da) = self.plus(a);
        let (nb, db) = self.minus(b);
        // c² = d_a / |d_b| makes pa + c·nb null
        let c = ((-db) / da.clone())
            .inv_sqrt()
            .ok_or_else(|| {
                Error::Invalid(
                    "form has no isotropic vector in this field along its diagonal; use the float field"
                        .into(),
                )
            })?;
        let mut u = pa.clone() + nb.clone() * c.clone();
        let mut w = (pa - nb * c) / (T::from_i64(2) * da);
        // floats use the unit-length convention (e⁺ + e⁻)/√2
        if let Some(h) = T::from_i64(2).inv_sqrt().filter(|_| T::KIND == numeric::FieldKind::Real) {
            u *= h.clone();
            w /= h;
        }
        Ok((u, w))
    }
}

/// A point of `Gr(i, ℝⁿ)` over a fixed quadratic space.
#[derive(Clone, Debug)]
pub struct SubspacePoint<T: Field> {
    ambient: Arc<QuadraticSpace<T>>,
    basis: DMatrix<T>,
    orthonormal: bool,
}

impl<T: Field> SubspacePoint<T> {
    pub fn new(
        ambient: Arc<QuadraticSpace<T>>,
        basis: DMatrix<T>,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        if basis.nrows() != ambient.dimension() {
            return Err(Error::Dimension(format!(
                "basis has {} rows in an ambient space of dimension {}",
                basis.nrows(),
                ambient.dimension()
            )));
        }
        let report = T::rank_report(&basis, tol);
        if report.rank != basis.ncols() || report.ambiguous {
            return Err(Error::Invalid("basis columns are not independent".into()));
        }
        Ok(Self {
            ambient,
            basis,
            orthonormal: false,
        })
    }

    pub(crate) fn from_parts(ambient: Arc<QuadraticSpace<T>>, basis: DMatrix<T>, orthonormal: bool) -> Self {
        Self {
            ambient,
            basis,
            orthonormal,
        }
    }

    pub fn ambient(&self) -> &Arc<QuadraticSpace<T>> {
        &self.ambient
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Same ambient space, new basis (e.g. `g·B`).
    pub fn with_basis(&self, basis: DMatrix<T>) -> Self {
        Self::from_parts(self.ambient.clone(), basis, false)
    }
}

impl SubspacePoint<f64> {
    pub fn canonicalized(&self) -> Self {
        Self::from_parts(self.ambient.clone(), float::orthonormalize(&self.basis), true)
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> DMatrix<f64> {
        let q = float::orthonormalize(&self.basis);
        &q * q.transpose()
    }
}

/// Equality of column spans: projector distance for floats, ranks for
/// rationals.
pub fn same_subspace<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>, tol: &TolerancePolicy) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    match T::KIND {
        numeric::FieldKind::Rational => {
            let mut both = DMatrix::<T>::zeros(a.nrows(), a.ncols() * 2);
            both.view_mut((0, 0), a.shape()).copy_from(a);
            both.view_mut((0, a.ncols()), b.shape()).copy_from(b);
            numeric::rank_of(&both, tol) == a.ncols()
        }
        _ => {
            let fa = float::orthonormalize(&numeric::to_f64_matrix(a));
            let fb = float::orthonormalize(&numeric::to_f64_matrix(b));
            let d = &fa * fa.transpose() - &fb * fb.transpose();
            d.norm() <= AMBIGUITY_BAND * tol.threshold(1.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitLabel {
    pub r: usize,
    pub s: usize,
    pub nu: usize,
    pub codim: usize,
}

impl OrbitLabel {
    pub fn new(r: usize, s: usize, nu: usize) -> Self {
        Self {
            r,
            s,
            nu,
            codim: nu * (nu + 1) / 2,
        }
    }

    pub fn from_inertia(i: Inertia) -> Self {
        Self::new(i.positive, i.negative, i.nullity)
    }

    pub fn dim(&self) -> usize {
        self.r + self.s + self.nu
    }

    /// Non-emptiness in signature `(p, q)`.
    pub fn fits(&self, p: usize, q: usize) -> bool {
        self.r + self.nu <= p && self.s + self.nu <= q
    }
}

impl std::fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},ν={})", self.r, self.s, self.nu)
    }
}

/// `Bᵀ·b·B`.
pub fn restrict_form<T: Field>(v: &SubspacePoint<T>) -> DMatrix<T> {
    v.basis.transpose() * v.ambient.form() * &v.basis
}

/// Label together with the inertia evidence.
pub fn classify_report<T: Field>(
    v: &SubspacePoint<T>,
    tol: &TolerancePolicy,
) -> Result<(OrbitLabel, InertiaReport)> {
    let report = T::inertia_report(&restrict_form(v), tol)?;
    let inertia = report.clone().certified()?;
    Ok((OrbitLabel::from_inertia(inertia), report))
}

pub fn classify<T: Field>(v: &SubspacePoint<T>, tol: &TolerancePolicy) -> Result<OrbitLabel> {
    classify_report(v, tol).map(|(l, _)| l)
}

/// All non-empty orbit labels of `Gr(i, ℝ^{p+q})`.
pub fn enumerate_labels(p: usize, q: usize, i: usize) -> Vec<OrbitLabel> {
    let mut out = Vec::new();
    for r in 0..=p.min(i) {
        for s in 0..=q.min(i - r) {
            let l = OrbitLabel::new(r, s, i - r - s);
            if l.fits(p, q) {
                out.push(l);
            }
        }
    }
    out
}

/// True iff the orbit of `b` lies in the closure of the orbit of `a`.
pub fn closure_partial_order(a: &OrbitLabel, b: &OrbitLabel) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "labels {a} and {b} live in different Grassmannians"
        )));
    }
    Ok(b.r <= a.r && b.s <= a.s)
}

struct Slots {
    plus: usize,
    minus: usize,
}

impl Slots {
    fn take_plus(&mut self) -> usize {
        self.plus += 1;
        self.plus - 1
    }

    fn take_minus(&mut self) -> usize {
        self.minus += 1;
        self.minus - 1
    }
}

fn assemble<T: Field>(n: usize, cols: &[DMatrix<T>]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, &c.column(0));
    }
    out
}

/// A point of the orbit `label`: `r` positive and `s` negative directions of
/// the diagonalised form, then `ν` null vectors `e⁺ + e⁻` on unused
/// directions.
pub fn standard_representative<T: Field>(
    label: &OrbitLabel,
    ambient: &Arc<QuadraticSpace<T>>,
) -> Result<SubspacePoint<T>> {
    let (p, q) = (ambient.p(), ambient.q());
    if !label.fits(p, q) {
        return Err(Error::EmptyOrbit(format!(
            "{label} does not fit in signature ({p},{q})"
        )));
    }
    let mut slots = Slots { plus: 0, minus: 0 };
    let mut cols = Vec::with_capacity(label.dim());
    for _ in 0..label.r {
        cols.push(ambient.plus(slots.take_plus()).0);
    }
    for _ in 0..label.s {
        cols.push(ambient.minus(slots.take_minus()).0);
    }
    for _ in 0..label.nu {
        let (a, b) = (slots.take_plus(), slots.take_minus());
        cols.push(ambient.hyperbolic_pair(a, b)?.0);
    }
    Ok(SubspacePoint::from_parts(
        ambient.clone(),
        assemble(ambient.dimension(), &cols),
        false,
    ))
}

/// Rotation-invariant random point: span of a Gaussian `n×i` matrix.
pub fn sample_uniform<R: Rng + ?Sized>(
    ambient: &Arc<QuadraticSpace<f64>>,
    i: usize,
    rng: &mut R,
) -> Result<SubspacePoint<f64>> {
    let n = ambient.dimension();
    if i > n {
        return Err(Error::Dimension(format!("Gr({i}, R^{n}) is empty")));
    }
    let tol = TolerancePolicy::default();
    for _ in 0..16 {
        let g = DMatrix::<f64>::from_fn(n, i, |_, _| rng.sample(StandardNormal));
        if numeric::rank_of(&g, &tol) == i {
            return Ok(SubspacePoint::from_parts(
                ambient.clone(),
                float::orthonormalize(&g),
                true,
            ));
        }
    }
    Err(Error::Consistency("repeated degenerate Gaussian draws".into()))
}

/// A flag `W₁ ⊂ W₂`.
#[derive(Clone, Debug)]
pub struct TwoStepFlagPoint<T: Field> {
    pub w1: SubspacePoint<T>,
    pub w2: SubspacePoint<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoStepFlagLabel {
    pub r1: usize,
    pub s1: usize,
    pub r2: usize,
    pub s2: usize,
    pub ell: usize,
}

impl TwoStepFlagLabel {
    pub fn nu1(&self, i1: usize) -> usize {
        i1 - self.r1 - self.s1
    }

    /// `ν₁ − ℓ ≤ ν₂`, `ℓ ≤ r₂ − r₁`, `ℓ ≤ s₂ − s₁`, `ℓ ≤ ν₁`.
    pub fn satisfies_constraints(&self, i1: usize, i2: usize) -> bool {
        let (r1, s1, r2, s2, l) = (self.r1, self.s1, self.r2, self.s2, self.ell);
        if r1 + s1 > i1 || r2 + s2 > i2 || r1 > r2 || s1 > s2 {
            return false;
        }
        let nu1 = i1 - r1 - s1;
        let nu2 = i2 - r2 - s2;
        l <= nu1 && nu1 <= nu2 + l && l <= r2 - r1 && l <= s2 - s1
    }
}

impl<T: Field> TwoStepFlagPoint<T> {
    pub fn new(w1: SubspacePoint<T>, w2: SubspacePoint<T>, tol: &TolerancePolicy) -> Result<Self> {
        if !Arc::ptr_eq(&w1.ambient, &w2.ambient) && w1.ambient.form() != w2.ambient.form() {
            return Err(Error::Invalid("flag constituents live in different spaces".into()));
        }
        if w1.dim() > w2.dim() {
            return Err(Error::Invalid("flag must satisfy dim W1 ≤ dim W2".into()));
        }
        let inter = numeric::subspace_intersection(&w1.basis, &w2.basis, tol)?;
        if inter.ncols() != w1.dim() {
            return Err(Error::Invalid("W1 is not contained in W2".into()));
        }
        Ok(Self { w1, w2 })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w1.dim(), self.w2.dim())
    }
}

/// `b`-orthogonal complement of a span, as a basis.
pub fn orthogonal_complement<T: Field>(
    ambient: &QuadraticSpace<T>,
    basis: &DMatrix<T>,
    tol: &TolerancePolicy,
) -> DMatrix<T> {
    T::nullspace(&(basis.transpose() * ambient.form()), tol)
}

pub fn classify_flag<T: Field>(
    f: &TwoStepFlagPoint<T>,
    tol: &TolerancePolicy,
) -> Result<TwoStepFlagLabel> {
    let l1 = classify(&f.w1, tol)?;
    let l2 = classify(&f.w2, tol)?;
    let amb = &f.w1.ambient;
    let radical = if l1.nu == 0 {
        0
    } else {
        let perp1 = orthogonal_complement(amb, &f.w1.basis, tol);
        numeric::subspace_intersection(&f.w1.basis, &perp1, tol)?.ncols()
    };
    let perp2 = orthogonal_complement(amb, &f.w2.basis, tol);
    let inside = if perp2.ncols() == 0 || radical == 0 {
        0
    } else {
        numeric::subspace_intersection(&f.w1.basis, &perp2, tol)?.ncols()
    };
    if radical != l1.nu || inside > radical {
        return Err(Error::Consistency(format!(
            "radical of W1 has dimension {radical}, expected ν₁ = {}",
            l1.nu
        )));
    }
    let label = TwoStepFlagLabel {
        r1: l1.r,
        s1: l1.s,
        r2: l2.r,
        s2: l2.s,
        ell: radical - inside,
    };
    if !label.satisfies_constraints(f.w1.dim(), f.w2.dim()) {
        return Err(Error::Consistency(format!(
            "flag label {label:?} violates the flag constraints"
        )));
    }
    Ok(label)
}

/// Every tuple allowed by the flag constraints whose constituents fit in
/// signature `(p, q)`.
pub fn enumerate_flag_labels(p: usize, q: usize, i1: usize, i2: usize) -> Vec<TwoStepFlagLabel> {
    let mut out = Vec::new();
    if i1 > i2 {
        return out;
    }
    for l1 in enumerate_labels(p, q, i1) {
        for l2 in enumerate_labels(p, q, i2) {
            for ell in 0..=l1.nu {
                let label = TwoStepFlagLabel {
                    r1: l1.r,
                    s1: l1.s,
                    r2: l2.r,
                    s2: l2.s,
                    ell,
                };
                if label.satisfies_constraints(i1, i2) {
                    out.push(label);
                }
            }
        }
    }
    out
}

/// Builds a flag with the given label: `W₁` from `r₁` positive, `s₁`
/// negative and `ν₁` null vectors, `ℓ` of which receive hyperbolic partners in
/// `W₂`; the rest of `W₂` is filled with fresh directions.
pub fn standard_flag<T: Field>(
    label: &TwoStepFlagLabel,
    i1: usize,
    i2: usize,
    ambient: &Arc<QuadraticSpace<T>>,
) -> Result<TwoStepFlagPoint<T>> {
    if !label.satisfies_constraints(i1, i2) {
        return Err(Error::EmptyOrbit(format!("{label:?} violates the flag constraints")));
    }
    let nu1 = i1 - label.r1 - label.s1;
    let nu2 = i2 - label.r2 - label.s2;
    let l2 = OrbitLabel::new(label.r2, label.s2, nu2);
    if !l2.fits(ambient.p(), ambient.q()) {
        return Err(Error::EmptyOrbit(format!("{l2} does not fit")));
    }
    let mut slots = Slots { plus: 0, minus: 0 };
    let mut w1 = Vec::new();
    let mut extra = Vec::new();
    for _ in 0..label.r1 {
        w1.push(ambient.plus(slots.take_plus()).0);
    }
    for _ in 0..label.s1 {
        w1.push(ambient.minus(slots.take_minus()).0);
    }
    for j in 0..nu1 {
        let (u, w) = ambient.hyperbolic_pair(slots.take_plus(), slots.take_minus())?;
        w1.push(u);
        if j < label.ell {
            extra.push(w);
        }
    }
    for _ in 0..label.r2 - label.r1 - label.ell {
        extra.push(ambient.plus(slots.take_plus()).0);
    }
    for _ in 0..label.s2 - label.s1 - label.ell {
        extra.push(ambient.minus(slots.take_minus()).0);
    }
    for _ in 0..nu2 + label.ell - nu1 {
        extra.push(ambient.hyperbolic_pair(slots.take_plus(), slots.take_minus())?.0);
    }
    let n = ambient.dimension();
    let b1 = assemble(n, &w1);
    let mut all = w1.clone();
    all.extend(extra);
    let b2 = assemble(n, &all);
    Ok(TwoStepFlagPoint {
        w1: SubspacePoint::from_parts(ambient.clone(), b1, false),
        w2: SubspacePoint::from_parts(ambient.clone(), b2, false),
    })
}

/// Random flag: a uniform `W₂` and a uniform `W₁` inside it.
pub fn sample_flag<R: Rng + ?Sized>(
    ambient: &Arc<QuadraticSpace<f64>>,
    i1: usize,
    i2: usize,
    rng: &mut R,
) -> Result<TwoStepFlagPoint<f64>> {
    if i1 > i2 {
        return Err(Error::Dimension("flag needs i1 ≤ i2".into()));
    }
    let w2 = sample_uniform(ambient, i2, rng)?;
    let c = DMatrix::<f64>::from_fn(i2, i1, |_, _| rng.sample(StandardNormal));
    let b1 = float::orthonormalize(&(w2.basis() * c));
    Ok(TwoStepFlagPoint {
        w1: SubspacePoint::from_parts(ambient.clone(), b1, true),
        w2,
    })
}

/// On-variety perturbation `B + δ·E` with Gaussian `E` of unit norm.
pub fn perturb<R: Rng + ?Sized>(
    v: &SubspacePoint<f64>,
    delta: f64,
    rng: &mut R,
) -> SubspacePoint<f64> {
    let (n, i) = v.basis.shape();
    let e = DMatrix::<f64>::from_fn(n, i, |_, _| rng.sample(StandardNormal));
    let e = &e / e.norm();
    let q = float::orthonormalize(&v.basis);
    v.with_basis(q + e * delta)
}

/// JSON form of a quadratic space: an explicit form, or `p`/`q` for the
/// standard diagonal form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticSpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<ScalarMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspacePointDoc {
    pub ambient: QuadraticSpaceDoc,
    pub basis: ScalarMatrix,
}

impl QuadraticSpaceDoc {
    pub fn build<T: Field>(&self, tol: &TolerancePolicy) -> Result<QuadraticSpace<T>> {
        match (&self.form, self.p, self.q) {
            (Some(f), _, _) => QuadraticSpace::new(T::from_literal(f)?, tol),
            (None, Some(p), Some(q)) => Ok(QuadraticSpace::standard(p, q)),
            _ => Err(Error::Parse(
                "ambient needs either \"form\" or both \"p\" and \"q\"".into(),
            )),
        }
    }

    pub fn of<T: Field>(space: &QuadraticSpace<T>) -> Self {
        Self {
            form: Some(T::to_literal(space.form())),
            p: Some(space.p()),
            q: Some(space.q()),
        }
    }
}

impl SubspacePointDoc {
    pub fn build<T: Field>(&self, tol: &TolerancePolicy) -> Result<SubspacePoint<T>> {
        let ambient = Arc::new(self.ambient.build::<T>(tol)?);
        SubspacePoint::new(ambient, T::from_literal(&self.basis)?, tol)
    }

    pub fn of<T: Field>(v: &SubspacePoint<T>) -> Self {
        Self {
            ambient: QuadraticSpaceDoc::of(v.ambient()),
            basis: T::to_literal(v.basis()),
        }
    }
}
