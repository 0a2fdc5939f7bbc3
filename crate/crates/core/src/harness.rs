//! Seeded verification campaigns and their JSON reports.
//!
//! A campaign runs named check suites over one scenario. Sampling is split
//! into fixed shards (see [`crate::rng`]) and merged in shard order, so the
//! report bytes depend only on the configuration.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{zero_locus_verdict, zero_verdict_from_restriction};
use crate::grassmann::{
    classify, classify_flag, enumerate_flag_labels, enumerate_labels, perturb, sample_flag, sample_uniform,
    standard_flag, standard_representative, OrbitLabel, QuadraticSpace, SubspacePoint, SubspacePointDoc,
    TwoStepFlagLabel, TwoStepFlagPoint,
};
use crate::isotropic::{
    adapted_basis, classify_isotropic, enumerate_isotropic_labels, hodge_duality, perturb_isotropic,
    sample_isotropic, standard_isotropic_representative, standard_structure, ComplexStructure, Duality,
    IsotropicLabel, IsotropicPoint, IsotropicPointDoc,
};
use crate::lie::{
    build_algebra, centralizer_dimension, grassmann_codim_table, isotropic_codim_table, random_group_element,
    stabilizer_element, AlgebraName, CodimRow, MatrixLieAlgebra,
};
use crate::numeric::{float, Field, Inertia, TolerancePolicy};
use crate::rng::sharded_map;
use crate::slice::{build_slice_chart, density_probe, Center, GRADIENT_FLOOR};

/// Largest `p + q` accepted by default.
pub const MAX_AMBIENT: usize = 12;
/// Largest `n` accepted by default for isotropic scenarios.
pub const MAX_ISOTROPIC: usize = 8;
/// Rational arithmetic is used for codimension tables up to these sizes.
const EXACT_CODIM_AMBIENT: usize = 6;
const EXACT_CODIM_ISOTROPIC: usize = 5;

/// A subalgebra pair `𝔥 ⊂ 𝔤`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "pair", rename_all = "kebab-case")]
pub enum StabilizerPair {
    /// `so(p,q) ⊂ sl(p+q,ℝ)`.
    OrthogonalInSpecialLinear { p: usize, q: usize },
    /// `so(n,ℂ) ⊂ so(n,n)`.
    ComplexInSplit { n: usize },
}

impl StabilizerPair {
    pub fn algebras(&self) -> (AlgebraName, AlgebraName) {
        match *self {
            StabilizerPair::OrthogonalInSpecialLinear { p, q } => {
                (AlgebraName::So { p, q }, AlgebraName::Sl { n: p + q })
            }
            StabilizerPair::ComplexInSplit { n } => (AlgebraName::SoComplexRealified { n }, AlgebraName::SoSplit { n }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Grassmann {
        p: usize,
        q: usize,
        i: usize,
    },
    /// Both classes when `duality` is absent.
    Isotropic {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duality: Option<Duality>,
    },
    Flags {
        p: usize,
        q: usize,
        i1: usize,
        i2: usize,
    },
    Stabilizer(StabilizerPair),
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        match *self {
            Scenario::Grassmann { p, q, i } => {
                if p + q == 0 || p + q > MAX_AMBIENT || i == 0 || i > p + q {
                    return bad(format!("grassmann({p},{q},{i}) outside 1 ≤ i ≤ p+q ≤ {MAX_AMBIENT}"));
                }
            }
            Scenario::Isotropic { n, .. } => {
                if n == 0 || n > MAX_ISOTROPIC {
                    return bad(format!("isotropic({n}) outside 1 ≤ n ≤ {MAX_ISOTROPIC}"));
                }
            }
            Scenario::Flags { p, q, i1, i2 } => {
                if p + q == 0 || p + q > MAX_AMBIENT || i1 == 0 || i1 > i2 || i2 > p + q {
                    return bad(format!("flags({p},{q},{i1},{i2}) outside 1 ≤ i1 ≤ i2 ≤ p+q ≤ {MAX_AMBIENT}"));
                }
            }
            Scenario::Stabilizer(StabilizerPair::OrthogonalInSpecialLinear { p, q }) => {
                if !(2..=6).contains(&(p + q)) {
                    return bad(format!("so({p},{q}) ⊂ sl({}) needs 2 ≤ p+q ≤ 6", p + q));
                }
            }
            Scenario::Stabilizer(StabilizerPair::ComplexInSplit { n }) => {
                if !(2..=4).contains(&n) {
                    return bad(format!("so({n},C) ⊂ so({n},{n}) needs 2 ≤ n ≤ 4"));
                }
            }
        }
        Ok(())
    }

    /// Suites that apply to this scenario, in report order.
    pub fn default_checks(&self) -> Vec<Check> {
        use Check::*;
        match self {
            Scenario::Grassmann { .. } => vec![
                Classification,
                ZeroLocus,
                Census,
                Closure,
                Equivariance,
                Codimension,
                Slice,
                Density,
            ],
            Scenario::Isotropic { .. } => vec![
                Classification,
                Lemma,
                ZeroLocus,
                Census,
                Closure,
                Equivariance,
                Codimension,
                Slice,
                Density,
            ],
            Scenario::Flags { .. } => vec![Classification, Census, Equivariance],
            Scenario::Stabilizer(_) => vec![Stabilizer],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Classification,
    ZeroLocus,
    Census,
    Closure,
    Equivariance,
    Codimension,
    Lemma,
    Slice,
    Density,
    Stabilizer,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Classification,
        Check::ZeroLocus,
        Check::Census,
        Check::Closure,
        Check::Equivariance,
        Check::Codimension,
        Check::Lemma,
        Check::Slice,
        Check::Density,
        Check::Stabilizer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Classification => "classification",
            Check::ZeroLocus => "zero-locus",
            Check::Census => "census",
            Check::Closure => "closure",
            Check::Equivariance => "equivariance",
            Check::Codimension => "codimension",
            Check::Lemma => "lemma",
            Check::Slice => "slice",
            Check::Density => "density",
            Check::Stabilizer => "stabilizer",
        }
    }

    /// The claim a check verifies, as listed in the citation registry.
    pub fn reference(&self) -> &'static str {
        CITATIONS
            .iter()
            .find(|(name, _)| *name == self.name())
            .map(|(_, claim)| *claim)
            .expect("every check is registered")
    }
}

/// Check name and the mathematical claim it verifies.
pub const CITATIONS: &[(&str, &str)] = &[
    (
        "classification",
        "orbits of the orthogonal group on a Grassmannian are labeled by the signature (r,s) of the restricted form; flags add the defect l; maximal isotropics add the duality class",
    ),
    (
        "zero-locus",
        "the section sigma_k (k-th exterior power of the restricted form) vanishes at V exactly when r+s < k",
    ),
    (
        "census",
        "the group has finitely many orbits, one for each admissible label",
    ),
    (
        "closure",
        "near an orbit (r,s) only labels with r' >= r, s' >= s occur (s' = s mod 2 on maximal isotropics) and every full-rank transversal signature occurs",
    ),
    (
        "equivariance",
        "labels are invariant under the connected group",
    ),
    (
        "codimension",
        "orbit codimension is nu(nu+1)/2 on Grassmannians and k^2 (nu = 2k) on maximal isotropics",
    ),
    (
        "lemma",
        "for a maximal isotropic V, dim(V cap JV) is even, an adapted basis exists and the Hodge sign is (-1)^(n-s)",
    ),
    (
        "slice",
        "near an orbit point a chart splits into orbit directions and a symmetric or Hermitian transversal whose signature is (r'-r, s'-s)",
    ),
    (
        "density",
        "sigma_i defines the orbits with r+s = i-1 to first order; on maximal isotropics sigma_n and its gradient vanish along r+s = n-2",
    ),
    (
        "stabilizer",
        "the endomorphism acting as 1 on h and by the trace-balancing scalar on its Killing complement has centralizer h",
    ),
];

fn default_threads() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub scenario: Scenario,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerance: TolerancePolicy,
    /// All applicable suites when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<Check>>,
    /// Worker threads; does not affect the report.
    #[serde(default = "default_threads", skip_serializing)]
    pub threads: usize,
}

impl CampaignConfig {
    pub fn new(scenario: Scenario, samples: usize, seed: u64) -> Self {
        CampaignConfig {
            scenario,
            samples,
            seed,
            tolerance: TolerancePolicy::default(),
            checks: None,
            threads: default_threads(),
        }
    }

    pub fn validate(&self) -> Result<Vec<Check>> {
        if self.samples == 0 {
            return Err(Error::Invalid("sample count must be at least 1".into()));
        }
        self.scenario.validate()?;
        let applicable = self.scenario.default_checks();
        match &self.checks {
            None => Ok(applicable),
            Some(list) => {
                for c in list {
                    if !applicable.contains(c) {
                        return Err(Error::Invalid(format!(
                            "check {} does not apply to this scenario",
                            c.name()
                        )));
                    }
                }
                Ok(applicable.into_iter().filter(|c| list.contains(c)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Tally {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Decisions inside the tolerance band that the check could not settle.
    pub fragile: usize,
    /// Decisions inside the band where the claim holds for every candidate;
    /// these are also counted as passed.
    pub resolved_in_band: usize,
    /// Smallest distance of a decision from its threshold.
    pub min_margin: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: Check,
    pub reference: &'static str,
    pub passed: bool,
    pub counts: Tally,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config: CampaignConfig,
    pub passed: bool,
    pub failures: usize,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn record(&self, check: Check) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Partial results of one shard, merged in order.
#[derive(Default)]
struct Partial {
    tally: Tally,
    witness: Option<Value>,
    seen: BTreeSet<String>,
}

impl Partial {
    fn pass(&mut self, margin: Option<f64>) {
        self.tally.total += 1;
        self.tally.passed += 1;
        self.margin(margin);
    }

    fn margin(&mut self, margin: Option<f64>) {
        if let Some(m) = margin {
            self.tally.min_margin = Some(self.tally.min_margin.map_or(m, |x| x.min(m)));
        }
    }

    fn fail(&mut self, witness: Value) {
        self.tally.total += 1;
        self.tally.failed += 1;
        self.witness.get_or_insert(witness);
    }

    fn fragile(&mut self) {
        self.tally.total += 1;
        self.tally.fragile += 1;
    }

    /// Routes an error: ambiguity is fragile, anything else fails.
    fn error(&mut self, e: &Error, witness: impl FnOnce() -> Value) {
        if e.is_ambiguity() {
            self.fragile();
        } else {
            self.fail(json!({ "error": e.to_string(), "point": witness() }));
        }
    }

    /// Like [`Partial::error`], but a near-boundary point passes when `holds`
    /// accepts both candidate inertias.
    fn error_or_both(&mut self, e: &Error, holds: impl Fn(&Inertia) -> bool, witness: impl FnOnce() -> Value) {
        if let Error::NearBoundary { lower, upper, .. } = e {
            if holds(lower) && holds(upper) {
                self.pass(None);
                self.tally.resolved_in_band += 1;
                return;
            }
        }
        self.error(e, witness);
    }

    fn merge(mut self, other: Partial) -> Partial {
        let (a, b) = (&mut self.tally, other.tally);
        a.total += b.total;
        a.passed += b.passed;
        a.failed += b.failed;
        a.fragile += b.fragile;
        a.resolved_in_band += b.resolved_in_band;
        if let Some(m) = b.min_margin {
            a.min_margin = Some(a.min_margin.map_or(m, |x| x.min(m)));
        }
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self.seen.extend(other.seen);
        self
    }

    fn record(self, check: Check, detail: Value) -> CheckRecord {
        CheckRecord {
            check,
            reference: check.reference(),
            passed: self.tally.failed == 0 && self.witness.is_none(),
            counts: self.tally,
            witness: self.witness,
            detail,
        }
    }
}

fn sharded<F>(cfg: &CampaignConfig, check: Check, count: usize, f: F) -> Partial
where
    F: Fn(&mut ChaCha20Rng, &mut Partial) + Sync,
{
    let seed = cfg
        .seed
        .wrapping_add((check as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    sharded_map(count, cfg.threads, seed, |_, range, rng| {
        let mut part = Partial::default();
        for _ in range {
            f(rng, &mut part);
        }
        part
    })
    .into_iter()
    .fold(Partial::default(), Partial::merge)
}

fn check_rng(cfg: &CampaignConfig, check: Check) -> ChaCha20Rng {
    crate::rng::stream(cfg.seed, 1_000_000 + check as u64)
}

fn subspace_json(v: &SubspacePoint<f64>) -> Value {
    serde_json::to_value(SubspacePointDoc::of(v)).unwrap_or(Value::Null)
}

fn isotropic_json(v: &IsotropicPoint<f64>) -> Value {
    serde_json::to_value(IsotropicPointDoc::of(v)).unwrap_or(Value::Null)
}

fn flag_json(f: &TwoStepFlagPoint<f64>) -> Value {
    json!({ "w1": subspace_json(&f.w1), "w2": subspace_json(&f.w2) })
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<VerificationReport> {
    let checks = cfg.validate()?;
    let mut records = Vec::with_capacity(checks.len());
    for check in checks {
        let record = match cfg.scenario {
            Scenario::Grassmann { p, q, i } => GrassmannRun::new(cfg, p, q, i)?.run(check)?,
            Scenario::Isotropic { n, duality } => IsotropicRun::new(cfg, n, duality)?.run(check)?,
            Scenario::Flags { p, q, i1, i2 } => FlagRun::new(cfg, p, q, i1, i2)?.run(check)?,
            Scenario::Stabilizer(pair) => stabilizer_record(cfg, pair)?,
        };
        records.push(record);
    }
    let failures = records.iter().filter(|r| !r.passed).count();
    Ok(VerificationReport {
        config: cfg.clone(),
        passed: failures == 0,
        failures,
        records,
    })
}

fn label_strings<L: std::fmt::Display>(labels: impl IntoIterator<Item = L>) -> BTreeSet<String> {
    labels.into_iter().map(|l| l.to_string()).collect()
}

fn census_detail(expected: &BTreeSet<String>, seen: &BTreeSet<String>) -> (Value, Option<Value>) {
    let missing: Vec<&String> = expected.difference(seen).collect();
    let extra: Vec<&String> = seen.difference(expected).collect();
    let detail = json!({ "expected": expected.len(), "observed": seen.len() });
    let witness = (!missing.is_empty() || !extra.is_empty()).then(|| json!({ "missing": missing, "unexpected": extra }));
    (detail, witness)
}

fn codim_record(cfg: &CampaignConfig, rows: Result<Vec<CodimRow>>, exact: bool) -> CheckRecord {
    let mut part = Partial::default();
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            part.error(&e, || Value::Null);
            return part.record(Check::Codimension, Value::Null);
        }
    };
    for row in &rows {
        if row.matched {
            part.pass(None);
        } else {
            part.fail(serde_json::to_value(row).unwrap_or(Value::Null));
        }
    }
    let _ = cfg;
    part.record(
        Check::Codimension,
        json!({ "field": if exact { "rational" } else { "float" }, "rows": rows }),
    )
}

struct GrassmannRun<'a> {
    cfg: &'a CampaignConfig,
    ambient: Arc<QuadraticSpace<f64>>,
    group: MatrixLieAlgebra<f64>,
    labels: Vec<OrbitLabel>,
    p: usize,
    q: usize,
    i: usize,
}

impl<'a> GrassmannRun<'a> {
    fn new(cfg: &'a CampaignConfig, p: usize, q: usize, i: usize) -> Result<Self> {
        let tol = &cfg.tolerance;
        Ok(GrassmannRun {
            cfg,
            ambient: Arc::new(QuadraticSpace::standard(p, q)),
            group: build_algebra(AlgebraName::So { p, q }, tol)?,
            labels: enumerate_labels(p, q, i),
            p,
            q,
            i,
        })
    }

    fn standard(&self, l: &OrbitLabel) -> Result<SubspacePoint<f64>> {
        standard_representative(l, &self.ambient)
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> Result<SubspacePoint<f64>> {
        sample_uniform(&self.ambient, self.i, rng)
    }

    fn run(&self, check: Check) -> Result<CheckRecord> {
        let tol = &self.cfg.tolerance;
        let n = self.cfg.samples;
        Ok(match check {
            Check::Classification => {
                let mut part = Partial::default();
                for l in &self.labels {
                    let v = self.standard(l)?;
                    match classify(&v, tol) {
                        Ok(got) if got == *l => part.pass(None),
                        Ok(got) => part.fail(json!({ "expected": l, "got": got, "point": subspace_json(&v) })),
                        Err(e) => part.error(&e, || subspace_json(&v)),
                    }
                }
                let expected = label_strings(&self.labels);
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = match self.sample(rng) {
                        Ok(v) => v,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    match crate::grassmann::classify_report(&v, tol) {
                        Ok((l, rep)) if expected.contains(&l.to_string()) => part.pass(rep.smallest_nonzero),
                        Ok((l, _)) => part.fail(json!({ "got": l, "point": subspace_json(&v) })),
                        Err(e) => part.error(&e, || subspace_json(&v)),
                    }
                });
                part.merge(sampled).record(check, Value::Null)
            }
            Check::ZeroLocus => {
                let verify = |v: &SubspacePoint<f64>, part: &mut Partial| {
                    let label = match classify(v, tol) {
                        Ok(l) => l,
                        Err(e) => return part.error(&e, || subspace_json(v)),
                    };
                    for k in 1..=self.i {
                        match zero_locus_verdict(v, k, tol) {
                            Ok(z) if z.zero == (label.r + label.s < k) => part.pass(z.margin),
                            Ok(z) => part.fail(json!({ "k": k, "verdict": z, "label": label, "point": subspace_json(v) })),
                            Err(e) => part.error(&e, || subspace_json(v)),
                        }
                    }
                };
                let mut part = Partial::default();
                for l in &self.labels {
                    verify(&self.standard(l)?, &mut part);
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| match self.sample(rng) {
                    Ok(v) => verify(&v, part),
                    Err(e) => part.error(&e, || Value::Null),
                });
                part.merge(sampled).record(check, Value::Null)
            }
            Check::Census => {
                let mut part = Partial::default();
                for l in &self.labels {
                    if let Ok(got) = classify(&self.standard(l)?, tol) {
                        part.seen.insert(got.to_string());
                    }
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = match self.sample(rng) {
                        Ok(v) => v,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    match classify(&v, tol) {
                        Ok(l) => {
                            part.seen.insert(l.to_string());
                            part.pass(None)
                        }
                        Err(e) => part.error(&e, || subspace_json(&v)),
                    }
                });
                let mut part = part.merge(sampled);
                let (detail, witness) = census_detail(&label_strings(&self.labels), &part.seen);
                if let Some(w) = witness {
                    part.witness.get_or_insert(w);
                }
                part.record(check, detail)
            }
            Check::Closure => {
                let mut part = Partial::default();
                let mut detail = Vec::new();
                for l in self.labels.iter().filter(|l| l.nu > 0) {
                    let v = self.standard(l)?;
                    let sub = sharded(self.cfg, check, n, |rng, part| {
                        let w = perturb(&v, 1e-3, rng);
                        match classify(&w, tol) {
                            Ok(m) if m.r >= l.r && m.s >= l.s => {
                                if m.r + m.s == l.r + l.s + l.nu {
                                    part.seen.insert(m.to_string());
                                }
                                part.pass(None)
                            }
                            Ok(m) => part.fail(json!({ "center": l, "got": m, "point": subspace_json(&w) })),
                            Err(e) => part.error_or_both(
                                &e,
                                |c| c.positive >= l.r && c.negative >= l.s,
                                || subspace_json(&w),
                            ),
                        }
                    });
                    let expected: BTreeSet<String> = (0..=l.nu)
                        .map(|a| OrbitLabel::new(l.r + a, l.s + l.nu - a, 0))
                        .filter(|m| m.fits(self.p, self.q))
                        .map(|m| m.to_string())
                        .collect();
                    let missing: Vec<String> = expected.difference(&sub.seen).cloned().collect();
                    detail.push(json!({ "center": l, "full_rank_labels": expected.len(), "observed": sub.seen.len() }));
                    let mut sub = sub;
                    if !missing.is_empty() {
                        sub.witness.get_or_insert(json!({ "center": l, "missing": missing }));
                    }
                    sub.seen.clear();
                    part = part.merge(sub);
                }
                part.record(check, Value::Array(detail))
            }
            Check::Equivariance => {
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = if rng.random::<f64>() < 0.5 {
                        let l = self.labels[rng.random_range(0..self.labels.len())];
                        self.standard(&l)
                    } else {
                        self.sample(rng)
                    };
                    let v = match v {
                        Ok(v) => v,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let g = match random_group_element(&self.group, 1.0, rng) {
                        Ok(g) => g,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let w = SubspacePoint::new(self.ambient.clone(), g * v.basis(), tol);
                    match (classify(&v, tol), w.and_then(|w| classify(&w, tol))) {
                        (Ok(a), Ok(b)) if a == b => part.pass(None),
                        (Ok(a), Ok(b)) => part.fail(json!({ "before": a, "after": b, "point": subspace_json(&v) })),
                        (Err(e), _) | (_, Err(e)) => part.error(&e, || subspace_json(&v)),
                    }
                });
                sampled.record(check, Value::Null)
            }
            Check::Codimension => {
                let exact = self.p + self.q <= EXACT_CODIM_AMBIENT;
                let rows = if exact {
                    grassmann_codim_table::<BigRational>(self.p, self.q, self.i, tol)
                } else {
                    grassmann_codim_table::<f64>(self.p, self.q, self.i, tol)
                };
                codim_record(self.cfg, rows, exact)
            }
            Check::Slice => {
                let mut part = Partial::default();
                let mut rng = check_rng(self.cfg, check);
                let mut detail = Vec::new();
                for l in self.labels.iter().filter(|l| l.nu > 0) {
                    let center = Center::Grassmann(self.standard(l)?);
                    slice_at(&center, &self.group, n, tol, &mut rng, &mut part, &mut detail);
                }
                part.record(check, Value::Array(detail))
            }
            Check::Density => {
                let mut part = Partial::default();
                let mut rng = check_rng(self.cfg, check);
                let mut detail = Vec::new();
                for l in self.labels.iter().filter(|l| l.nu > 0) {
                    let center = Center::Grassmann(self.standard(l)?);
                    let expect_defining = l.nu == 1;
                    density_at(&center, &self.group, expect_defining, tol, &mut rng, &mut part, &mut detail);
                }
                part.record(check, Value::Array(detail))
            }
            Check::Lemma | Check::Stabilizer => unreachable!("validated against the scenario"),
        })
    }
}

fn slice_at(
    center: &Center,
    group: &MatrixLieAlgebra<f64>,
    samples: usize,
    tol: &TolerancePolicy,
    rng: &mut ChaCha20Rng,
    part: &mut Partial,
    detail: &mut Vec<Value>,
) {
    let points = samples.min(1000);
    match build_slice_chart(center, group, 0.5, tol, rng) {
        Ok(chart) => {
            let summary = chart.summary(100, points, rng);
            let ok = summary.round_trip.disagree == 0 && summary.concordance.disagree == 0;
            let value = serde_json::to_value(&summary).unwrap_or(Value::Null);
            if ok {
                part.pass(Some(chart.radius));
            } else {
                part.fail(value.clone());
            }
            part.tally.fragile += summary.concordance.fragile;
            detail.push(value);
        }
        Err(e) => {
            part.fail(json!({ "error": e.to_string() }));
            detail.push(json!({ "error": e.to_string() }));
        }
    }
}

fn density_at(
    center: &Center,
    group: &MatrixLieAlgebra<f64>,
    expect_defining: bool,
    tol: &TolerancePolicy,
    rng: &mut ChaCha20Rng,
    part: &mut Partial,
    detail: &mut Vec<Value>,
) {
    match density_probe(center, group, 100, tol, rng) {
        Ok(rep) => {
            let ok = if expect_defining {
                rep.defining
            } else {
                rep.max_value <= GRADIENT_FLOOR && rep.max_gradient <= GRADIENT_FLOOR
            };
            let value = serde_json::to_value(&rep).unwrap_or(Value::Null);
            if ok {
                part.pass(None);
            } else {
                part.fail(value.clone());
            }
            detail.push(value);
        }
        Err(e) => part.error(&e, || Value::Null),
    }
}

struct IsotropicRun<'a> {
    cfg: &'a CampaignConfig,
    structure: Arc<ComplexStructure<f64>>,
    group: Option<MatrixLieAlgebra<f64>>,
    classes: Vec<Duality>,
    labels: Vec<IsotropicLabel>,
    n: usize,
}

impl<'a> IsotropicRun<'a> {
    fn new(cfg: &'a CampaignConfig, n: usize, duality: Option<Duality>) -> Result<Self> {
        let classes = match duality {
            Some(d) => vec![d],
            None => vec![Duality::SelfDual, Duality::AntiSelfDual],
        };
        let labels = classes.iter().flat_map(|&d| enumerate_isotropic_labels(n, d)).collect();
        Ok(IsotropicRun {
            cfg,
            structure: Arc::new(standard_structure(n)?),
            group: (n >= 2)
                .then(|| build_algebra(AlgebraName::SoComplexRealified { n }, &cfg.tolerance))
                .transpose()?,
            classes,
            labels,
            n,
        })
    }

    fn standard(&self, l: &IsotropicLabel) -> Result<IsotropicPoint<f64>> {
        standard_isotropic_representative(l, &self.structure)
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> IsotropicPoint<f64> {
        let d = self.classes[rng.random_range(0..self.classes.len())];
        sample_isotropic(&self.structure, d, rng)
    }

    /// Standard representative moved by a random group element.
    fn translated(&self, rng: &mut ChaCha20Rng) -> Result<IsotropicPoint<f64>> {
        let l = self.labels[rng.random_range(0..self.labels.len())];
        let v = self.standard(&l)?;
        Ok(match &self.group {
            Some(h) => {
                let g = random_group_element(h, 1.0, rng)?;
                v.with_basis(float::orthonormalize(&(g * v.basis())))
            }
            None => v,
        })
    }

    fn run(&self, check: Check) -> Result<CheckRecord> {
        let tol = &self.cfg.tolerance;
        let n = self.cfg.samples;
        Ok(match check {
            Check::Classification => {
                let mut part = Partial::default();
                for l in &self.labels {
                    let v = self.standard(l)?;
                    match classify_isotropic(&v, tol) {
                        Ok(got) if got == *l => part.pass(None),
                        Ok(got) => part.fail(json!({ "expected": l, "got": got, "point": isotropic_json(&v) })),
                        Err(e) => part.error(&e, || isotropic_json(&v)),
                    }
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = self.sample(rng);
                    match crate::isotropic::classify_isotropic_report(&v, tol) {
                        Ok(rep) if self.labels.contains(&rep.label) => part.pass(rep.margin),
                        Ok(rep) => part.fail(json!({ "got": rep.label, "point": isotropic_json(&v) })),
                        Err(e) => part.error(&e, || isotropic_json(&v)),
                    }
                });
                part.merge(sampled).record(check, Value::Null)
            }
            Check::Lemma => {
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = if rng.random::<f64>() < 0.5 {
                        Ok(self.sample(rng))
                    } else {
                        self.translated(rng)
                    };
                    let v = match v {
                        Ok(v) => v,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    lemma_sample(&v, tol, part);
                });
                sampled.record(check, Value::Null)
            }
            Check::ZeroLocus => {
                let verify = |v: &IsotropicPoint<f64>, part: &mut Partial| {
                    let label = match classify_isotropic(v, tol) {
                        Ok(l) => l,
                        Err(e) => return part.error(&e, || isotropic_json(v)),
                    };
                    let r = v.real_restriction();
                    for k in 1..=self.n {
                        match zero_verdict_from_restriction(&r, k, tol) {
                            Ok(z) if z.zero == (label.r + label.s < k) => part.pass(z.margin),
                            Ok(z) => part.fail(json!({ "k": k, "verdict": z, "label": label, "point": isotropic_json(v) })),
                            Err(e) => part.error(&e, || isotropic_json(v)),
                        }
                    }
                };
                let mut part = Partial::default();
                for l in &self.labels {
                    verify(&self.standard(l)?, &mut part);
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| verify(&self.sample(rng), part));
                part.merge(sampled).record(check, Value::Null)
            }
            Check::Census => {
                let mut part = Partial::default();
                for l in &self.labels {
                    if let Ok(got) = classify_isotropic(&self.standard(l)?, tol) {
                        part.seen.insert(got.to_string());
                    }
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = self.sample(rng);
                    match classify_isotropic(&v, tol) {
                        Ok(l) => {
                            part.seen.insert(l.to_string());
                            part.pass(None)
                        }
                        Err(e) => part.error(&e, || isotropic_json(&v)),
                    }
                });
                let mut part = part.merge(sampled);
                let (detail, witness) = census_detail(&label_strings(&self.labels), &part.seen);
                if let Some(w) = witness {
                    part.witness.get_or_insert(w);
                }
                part.record(check, detail)
            }
            Check::Closure => {
                let mut part = Partial::default();
                let mut detail = Vec::new();
                for l in self.labels.iter().filter(|l| l.nu > 0) {
                    let v = self.standard(l)?;
                    let sub = sharded(self.cfg, check, n, |rng, part| {
                        let w = match perturb_isotropic(&v, 1e-3, rng) {
                            Ok(w) => w,
                            Err(e) => return part.error(&e, || isotropic_json(&v)),
                        };
                        match classify_isotropic(&w, tol) {
                            Ok(m) if m.r >= l.r && m.s >= l.s && m.s % 2 == l.s % 2 && m.duality == l.duality => {
                                if m.r + m.s == self.n {
                                    part.seen.insert(m.to_string());
                                }
                                part.pass(None)
                            }
                            Ok(m) => part.fail(json!({ "center": l, "got": m, "point": isotropic_json(&w) })),
                            Err(e) => part.error_or_both(
                                &e,
                                |c| {
                                    c.positive >= l.r
                                        && c.negative >= l.s
                                        && c.negative % 2 == l.s % 2
                                        && c.nullity % 2 == 0
                                },
                                || isotropic_json(&w),
                            ),
                        }
                    });
                    let k = l.k();
                    let expected: BTreeSet<String> = (0..=k)
                        .filter_map(|a| IsotropicLabel::new(self.n, l.r + 2 * a, l.s + 2 * (k - a)))
                        .map(|m| m.to_string())
                        .collect();
                    let missing: Vec<String> = expected.difference(&sub.seen).cloned().collect();
                    detail.push(json!({ "center": l, "full_rank_labels": expected.len(), "observed": sub.seen.len() }));
                    let mut sub = sub;
                    if !missing.is_empty() {
                        sub.witness.get_or_insert(json!({ "center": l, "missing": missing }));
                    }
                    sub.seen.clear();
                    part = part.merge(sub);
                }
                part.record(check, Value::Array(detail))
            }
            Check::Equivariance => {
                let Some(group) = &self.group else {
                    return Ok(Partial::default().record(check, json!("trivial group")));
                };
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let v = if rng.random::<f64>() < 0.5 {
                        let l = self.labels[rng.random_range(0..self.labels.len())];
                        self.standard(&l)
                    } else {
                        Ok(self.sample(rng))
                    };
                    let v = match v {
                        Ok(v) => v,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let g = match random_group_element(group, 1.0, rng) {
                        Ok(g) => g,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let w = IsotropicPoint::new(self.structure.clone(), g * v.basis(), tol);
                    match (classify_isotropic(&v, tol), w.and_then(|w| classify_isotropic(&w, tol))) {
                        (Ok(a), Ok(b)) if a == b => part.pass(None),
                        (Ok(a), Ok(b)) => part.fail(json!({ "before": a, "after": b, "point": isotropic_json(&v) })),
                        (Err(e), _) | (_, Err(e)) => part.error(&e, || isotropic_json(&v)),
                    }
                });
                sampled.record(check, Value::Null)
            }
            Check::Codimension => {
                let exact = self.n <= EXACT_CODIM_ISOTROPIC;
                let mut rows = Vec::new();
                let mut err = None;
                for &d in &self.classes {
                    let r = if exact {
                        isotropic_codim_table::<BigRational>(self.n, d, tol)
                    } else {
                        isotropic_codim_table::<f64>(self.n, d, tol)
                    };
                    match r {
                        Ok(r) => rows.extend(r),
                        Err(e) => err = Some(e),
                    }
                }
                codim_record(self.cfg, err.map_or(Ok(rows), Err), exact)
            }
            Check::Slice => {
                let mut part = Partial::default();
                let mut rng = check_rng(self.cfg, check);
                let mut detail = Vec::new();
                if let Some(group) = &self.group {
                    for l in self.labels.iter().filter(|l| l.nu > 0) {
                        let center = Center::Isotropic(self.standard(l)?);
                        slice_at(&center, group, n, tol, &mut rng, &mut part, &mut detail);
                    }
                }
                part.record(check, Value::Array(detail))
            }
            Check::Density => {
                let mut part = Partial::default();
                let mut rng = check_rng(self.cfg, check);
                let mut detail = Vec::new();
                if let Some(group) = &self.group {
                    for l in self.labels.iter().filter(|l| l.r + l.s + 2 == self.n) {
                        let center = Center::Isotropic(self.standard(l)?);
                        density_at(&center, group, false, tol, &mut rng, &mut part, &mut detail);
                    }
                }
                part.record(check, Value::Array(detail))
            }
            Check::Stabilizer => unreachable!("validated against the scenario"),
        })
    }
}

/// Even nullity, adapted Gram residual and the Hodge parity rule at one point.
pub fn lemma_sample(v: &IsotropicPoint<f64>, tol: &TolerancePolicy, part: &mut impl LemmaSink) {
    let n = v.n();
    let inertia = match f64::inertia_report(&v.real_restriction(), tol).and_then(|r| r.certified()) {
        Ok(i) => i,
        Err(e) => return part.lemma_error(&e, isotropic_json(v)),
    };
    if inertia.nullity % 2 != 0 {
        return part.lemma_fail(json!({ "odd_nullity": inertia.to_string(), "point": isotropic_json(v) }));
    }
    let hodge = match hodge_duality(v) {
        Ok(h) => h,
        Err(e) => return part.lemma_error(&e, isotropic_json(v)),
    };
    if hodge.duality != Duality::from_parity(n, inertia.negative) {
        return part.lemma_fail(json!({ "hodge": hodge, "inertia": inertia.to_string(), "point": isotropic_json(v) }));
    }
    match adapted_basis(v, tol) {
        Ok(a) if a.residual <= 1e-8 => part.lemma_pass(a.residual),
        Ok(a) => part.lemma_fail(json!({ "adapted_residual": a.residual, "point": isotropic_json(v) })),
        Err(e) => part.lemma_error(&e, isotropic_json(v)),
    }
}

/// Collects the outcome of [`lemma_sample`].
pub trait LemmaSink {
    fn lemma_pass(&mut self, residual: f64);
    fn lemma_fail(&mut self, witness: Value);
    fn lemma_error(&mut self, e: &Error, witness: Value);
}

impl LemmaSink for Partial {
    fn lemma_pass(&mut self, _residual: f64) {
        self.pass(None);
    }

    fn lemma_fail(&mut self, witness: Value) {
        self.fail(witness);
    }

    fn lemma_error(&mut self, e: &Error, witness: Value) {
        self.error(e, || witness);
    }
}

struct FlagRun<'a> {
    cfg: &'a CampaignConfig,
    ambient: Arc<QuadraticSpace<f64>>,
    group: MatrixLieAlgebra<f64>,
    labels: Vec<TwoStepFlagLabel>,
    i1: usize,
    i2: usize,
}

impl<'a> FlagRun<'a> {
    fn new(cfg: &'a CampaignConfig, p: usize, q: usize, i1: usize, i2: usize) -> Result<Self> {
        Ok(FlagRun {
            cfg,
            ambient: Arc::new(QuadraticSpace::standard(p, q)),
            group: build_algebra(AlgebraName::So { p, q }, &cfg.tolerance)?,
            labels: enumerate_flag_labels(p, q, i1, i2),
            i1,
            i2,
        })
    }

    fn standard(&self, l: &TwoStepFlagLabel) -> Result<TwoStepFlagPoint<f64>> {
        standard_flag(l, self.i1, self.i2, &self.ambient)
    }

    fn run(&self, check: Check) -> Result<CheckRecord> {
        let tol = &self.cfg.tolerance;
        let n = self.cfg.samples;
        let label_of = |l: &TwoStepFlagLabel| json!(l).to_string();
        Ok(match check {
            Check::Classification | Check::Census => {
                let mut part = Partial::default();
                for l in &self.labels {
                    let f = self.standard(l)?;
                    match classify_flag(&f, tol) {
                        Ok(got) if got == *l => {
                            part.seen.insert(label_of(&got));
                            part.pass(None)
                        }
                        Ok(got) => part.fail(json!({ "expected": l, "got": got, "point": flag_json(&f) })),
                        Err(e) => part.error(&e, || flag_json(&f)),
                    }
                }
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let f = match sample_flag(&self.ambient, self.i1, self.i2, rng) {
                        Ok(f) => f,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    match classify_flag(&f, tol) {
                        Ok(l) if self.labels.contains(&l) => {
                            part.seen.insert(label_of(&l));
                            part.pass(None)
                        }
                        Ok(l) => part.fail(json!({ "got": l, "point": flag_json(&f) })),
                        Err(e) => part.error(&e, || flag_json(&f)),
                    }
                });
                let mut part = part.merge(sampled);
                let detail = if check == Check::Census {
                    let expected: BTreeSet<String> = self.labels.iter().map(label_of).collect();
                    let (detail, witness) = census_detail(&expected, &part.seen);
                    if let Some(w) = witness {
                        part.witness.get_or_insert(w);
                    }
                    detail
                } else {
                    Value::Null
                };
                part.record(check, detail)
            }
            Check::Equivariance => {
                let sampled = sharded(self.cfg, check, n, |rng, part| {
                    let f = if rng.random::<f64>() < 0.5 {
                        let l = self.labels[rng.random_range(0..self.labels.len())];
                        self.standard(&l)
                    } else {
                        sample_flag(&self.ambient, self.i1, self.i2, rng)
                    };
                    let f = match f {
                        Ok(f) => f,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let g = match random_group_element(&self.group, 1.0, rng) {
                        Ok(g) => g,
                        Err(e) => return part.error(&e, || Value::Null),
                    };
                    let moved = move_flag(&f, &g, tol);
                    match (classify_flag(&f, tol), moved.and_then(|m| classify_flag(&m, tol))) {
                        (Ok(a), Ok(b)) if a == b => part.pass(None),
                        (Ok(a), Ok(b)) => part.fail(json!({ "before": a, "after": b, "point": flag_json(&f) })),
                        (Err(e), _) | (_, Err(e)) => part.error(&e, || flag_json(&f)),
                    }
                });
                sampled.record(check, Value::Null)
            }
            _ => unreachable!("validated against the scenario"),
        })
    }
}

pub fn move_flag(f: &TwoStepFlagPoint<f64>, g: &DMatrix<f64>, tol: &TolerancePolicy) -> Result<TwoStepFlagPoint<f64>> {
    let amb = f.w1.ambient().clone();
    TwoStepFlagPoint::new(
        SubspacePoint::new(amb.clone(), g * f.w1.basis(), tol)?,
        SubspacePoint::new(amb, g * f.w2.basis(), tol)?,
        tol,
    )
}

fn stabilizer_record(cfg: &CampaignConfig, pair: StabilizerPair) -> Result<CheckRecord> {
    let tol = &cfg.tolerance;
    let (hn, gn) = pair.algebras();
    let mut part = Partial::default();
    let h = build_algebra::<BigRational>(hn, tol)?;
    let g = build_algebra::<BigRational>(gn, tol)?;
    let detail = match stabilizer_element(&h, &g, tol) {
        Ok(st) => {
            let cdim = centralizer_dimension(&st.v0, &g, tol)?;
            let value = json!({
                "h": hn.to_string(),
                "g": gn.to_string(),
                "dim_h": st.dim_h,
                "dim_complement": st.dim_complement,
                "complement_scalar": crate::numeric::literal::format_rational(&st.complement_scalar),
                "trace": st.trace,
                "centralizer_dim": cdim,
            });
            if cdim == h.dim() && st.trace == 0.0 {
                part.pass(None);
            } else {
                part.fail(value.clone());
            }
            value
        }
        Err(e) => {
            part.error(&e, || Value::Null);
            Value::Null
        }
    };
    Ok(part.record(Check::Stabilizer, detail))
}

/// A point file: an isotropic point carries `structure`, a subspace point
/// carries `ambient`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointInput {
    Isotropic(IsotropicPointDoc),
    Subspace(SubspacePointDoc),
}

impl PointInput {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("point JSON: {e}")))
    }

    pub fn center(&self, tol: &TolerancePolicy) -> Result<Center> {
        Ok(match self {
            PointInput::Isotropic(d) => Center::Isotropic(d.build(tol)?),
            PointInput::Subspace(d) => Center::Grassmann(d.build(tol)?),
        })
    }
}

/// The Lie algebra of the group acting on the variety containing `center`.
pub fn symmetry_algebra(center: &Center, tol: &TolerancePolicy) -> Result<MatrixLieAlgebra<f64>> {
    match center {
        Center::Grassmann(v) => crate::lie::orthogonal_algebra(v.ambient(), tol),
        Center::Isotropic(v) if v.n() >= 2 => build_algebra(AlgebraName::SoComplexRealified { n: v.n() }, tol),
        Center::Isotropic(_) => Err(Error::Invalid("the group is trivial for n = 1".into())),
    }
}
