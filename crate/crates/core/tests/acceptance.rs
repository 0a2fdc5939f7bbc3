//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use serde_json::Value;

use orbitscope::harness::{run_campaign, CampaignConfig, Check, Scenario, StabilizerPair, VerificationReport};
use orbitscope::isotropic::Duality;
use orbitscope::lie::{grassmann_codim_table, isotropic_codim_table};
use orbitscope::numeric::TolerancePolicy;

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    summary: String,
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn campaign(scenario: Scenario, samples: usize, checks: &[Check]) -> VerificationReport {
    let mut cfg = CampaignConfig::new(scenario, samples, SEED);
    cfg.checks = Some(checks.to_vec());
    cfg.threads = threads();
    run_campaign(&cfg).unwrap_or_else(|e| panic!("campaign {scenario:?}: {e}"))
}

fn gr(p: usize, q: usize, i: usize) -> Scenario {
    Scenario::Grassmann { p, q, i }
}

fn iso(n: usize) -> Scenario {
    Scenario::Isotropic { n, duality: None }
}

/// Every record clean: no failures, no fragile decisions, at least one test.
fn clean(reports: &[VerificationReport], check: Check) -> (bool, usize, Vec<String>) {
    let mut ok = true;
    let mut total = 0;
    let mut notes = Vec::new();
    for r in reports {
        let rec = r.record(check).expect("check ran");
        total += rec.counts.total;
        if !rec.passed || rec.counts.fragile > 0 || rec.counts.total == 0 {
            ok = false;
            notes.push(format!(
                "{:?}: failed {} fragile {} witness {}",
                r.config.scenario,
                rec.counts.failed,
                rec.counts.fragile,
                rec.witness.as_ref().map_or("-".into(), |w| w.to_string())
            ));
        }
    }
    (ok, total, notes)
}

fn min_margin(reports: &[VerificationReport], check: Check) -> f64 {
    reports
        .iter()
        .filter_map(|r| r.record(check)?.counts.min_margin)
        .fold(f64::INFINITY, f64::min)
}

fn codim_grassmann() -> Outcome {
    let tol = TolerancePolicy::default();
    let (mut rows, mut bad) = (0, Vec::new());
    for m in 1..=6 {
        for p in 0..=m {
            let q = m - p;
            for i in 1..=m {
                let table = grassmann_codim_table::<BigRational>(p, q, i, &tol)
                    .unwrap_or_else(|e| panic!("gr({p},{q},{i}): {e}"));
                for row in table {
                    rows += 1;
                    if row.lie != row.nu * (row.nu + 1) / 2 || !row.matched {
                        bad.push(format!("gr({p},{q},{i}) {:?}", row));
                    }
                }
            }
        }
    }
    Outcome {
        passed: bad.is_empty() && rows > 0,
        summary: format!("{rows} labels, {} mismatches {:?}", bad.len(), bad),
    }
}

fn codim_isotropic() -> Outcome {
    let tol = TolerancePolicy::default();
    let (mut rows, mut bad) = (0, Vec::new());
    for n in 1..=5 {
        for d in [Duality::SelfDual, Duality::AntiSelfDual] {
            let table = isotropic_codim_table::<BigRational>(n, d, &tol).unwrap_or_else(|e| panic!("iso({n}): {e}"));
            for row in table {
                rows += 1;
                let k = row.nu / 2;
                if row.nu % 2 != 0 || row.lie != k * k || !row.matched {
                    bad.push(format!("iso({n},{d}) {:?}", row));
                }
            }
        }
    }
    Outcome {
        passed: bad.is_empty() && rows > 0,
        summary: format!("{rows} labels, {} mismatches {:?}", bad.len(), bad),
    }
}

fn zero_locus() -> Outcome {
    let reports: Vec<_> = [gr(2, 2, 2), gr(3, 2, 2), iso(3), iso(4)]
        .into_iter()
        .map(|s| campaign(s, 1000, &[Check::ZeroLocus]))
        .collect();
    let (ok, total, notes) = clean(&reports, Check::ZeroLocus);
    Outcome {
        passed: ok,
        summary: format!(
            "{total} verdicts, min margin {:.3e} {}",
            min_margin(&reports, Check::ZeroLocus),
            notes.join("; ")
        ),
    }
}

fn lemma() -> Outcome {
    let reports: Vec<_> = [2, 3, 4].into_iter().map(|n| campaign(iso(n), 1000, &[Check::Lemma])).collect();
    let (ok, total, notes) = clean(&reports, Check::Lemma);
    let counts_match = reports.iter().all(|r| r.record(Check::Lemma).unwrap().counts.total == 1000);
    Outcome {
        passed: ok && counts_match,
        summary: format!("{total} maximal isotropics {}", notes.join("; ")),
    }
}

fn closure() -> Outcome {
    let reports: Vec<_> = [gr(2, 2, 2), gr(3, 2, 2), iso(2), iso(3), iso(4)]
        .into_iter()
        .map(|s| campaign(s, 1000, &[Check::Closure]))
        .collect();
    let (ok, total, notes) = clean(&reports, Check::Closure);
    let mut covered = true;
    for r in &reports {
        let detail = &r.record(Check::Closure).unwrap().detail;
        for center in detail.as_array().into_iter().flatten() {
            covered &= center["full_rank_labels"] == center["observed"];
        }
    }
    Outcome {
        passed: ok && covered,
        summary: format!("{total} perturbations, all full-rank labels seen: {covered} {}", notes.join("; ")),
    }
}

fn slice() -> Outcome {
    let reports: Vec<_> = [gr(2, 2, 2), iso(2), iso(3)]
        .into_iter()
        .map(|s| campaign(s, 1000, &[Check::Slice]))
        .collect();
    let (mut ok, total, notes) = clean(&reports, Check::Slice);
    let mut worst: f64 = 0.0;
    for r in &reports {
        for chart in r.record(Check::Slice).unwrap().detail.as_array().into_iter().flatten() {
            let rt = chart["round_trip"]["worst_round_trip"].as_f64().unwrap_or(f64::INFINITY);
            worst = worst.max(rt);
            ok &= rt <= 1e-8
                && chart["round_trip"]["points"] == 100
                && chart["concordance"]["points"] == 1000
                && chart["concordance"]["agree"] == 1000;
        }
    }
    Outcome {
        passed: ok,
        summary: format!("{total} charts, worst round trip {worst:.3e} {}", notes.join("; ")),
    }
}

fn density() -> Outcome {
    let reports = [
        campaign(gr(2, 2, 2), 1, &[Check::Density]),
        campaign(iso(3), 1, &[Check::Density]),
    ];
    let (mut ok, total, notes) = clean(&reports, Check::Density);
    let mut lines = Vec::new();
    for r in &reports {
        for probe in r.record(Check::Density).unwrap().detail.as_array().into_iter().flatten() {
            let get = |k: &str| probe[k].as_f64().unwrap_or(f64::NAN);
            let nu = probe["center"]["nu"].as_u64().unwrap_or(0);
            let defining = matches!(r.config.scenario, Scenario::Grassmann { .. }) && nu == 1;
            let good = probe["points"] == 100
                && get("max_value") <= 1e-6
                && if defining {
                    get("min_gradient") >= 1e-6
                } else {
                    get("max_gradient") <= 1e-6
                };
            ok &= good;
            lines.push(format!(
                "{} grad [{:.1e},{:.1e}]",
                probe["center"],
                get("min_gradient"),
                get("max_gradient")
            ));
        }
    }
    Outcome {
        passed: ok,
        summary: format!("{total} orbits; {} {}", lines.join(", "), notes.join("; ")),
    }
}

fn stabilizer() -> Outcome {
    let mut pairs = Vec::new();
    for m in 2..=4 {
        for p in 0..=m {
            pairs.push(StabilizerPair::OrthogonalInSpecialLinear { p, q: m - p });
        }
    }
    pairs.extend([2, 3].map(|n| StabilizerPair::ComplexInSplit { n }));
    let reports: Vec<_> = pairs
        .into_iter()
        .map(|p| campaign(Scenario::Stabilizer(p), 1, &[Check::Stabilizer]))
        .collect();
    let (ok, total, notes) = clean(&reports, Check::Stabilizer);
    let exact = reports.iter().all(|r| {
        let d = &r.record(Check::Stabilizer).unwrap().detail;
        d["centralizer_dim"] == d["dim_h"]
    });
    Outcome {
        passed: ok && exact,
        summary: format!("{total} pairs {}", notes.join("; ")),
    }
}

fn equivariance() -> Outcome {
    let scenarios = [
        gr(2, 2, 2),
        gr(3, 2, 2),
        iso(3),
        iso(4),
        Scenario::Flags { p: 2, q: 2, i1: 1, i2: 2 },
        Scenario::Flags { p: 2, q: 1, i1: 1, i2: 2 },
    ];
    let reports: Vec<_> = scenarios.into_iter().map(|s| campaign(s, 500, &[Check::Equivariance])).collect();
    let (ok, total, notes) = clean(&reports, Check::Equivariance);
    Outcome {
        passed: ok && total == 500 * reports.len(),
        summary: format!("{total} group elements {}", notes.join("; ")),
    }
}

fn census() -> Outcome {
    let scenarios = [
        gr(2, 2, 2),
        gr(3, 2, 2),
        iso(3),
        iso(4),
        Scenario::Flags { p: 2, q: 2, i1: 1, i2: 2 },
    ];
    let reports: Vec<_> = scenarios.into_iter().map(|s| campaign(s, 100_000, &[Check::Census])).collect();
    let (ok, total, notes) = clean(&reports, Check::Census);
    let sizes: Vec<String> = reports
        .iter()
        .map(|r| {
            let d: &Value = &r.record(Check::Census).unwrap().detail;
            format!("{}/{}", d["observed"], d["expected"])
        })
        .collect();
    Outcome {
        passed: ok,
        summary: format!("{total} samples, labels observed/expected {} {}", sizes.join(" "), notes.join("; ")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("grassmann codimension concordance", 30, codim_grassmann),
        ("isotropic codimension concordance", 60, codim_isotropic),
        ("zero-locus equivalence", 60, zero_locus),
        ("maximal isotropic structure", 120, lemma),
        ("closure monotonicity", 120, closure),
        ("slice charts", 120, slice),
        ("defining density", 60, density),
        ("stabilizer element", 10, stabilizer),
        ("equivariance", 60, equivariance),
        ("finiteness census", 120, census),
    ];
    let mut failures = 0;
    for (idx, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let passed = outcome.passed && in_time;
        failures += usize::from(!passed);
        println!(
            "criterion {:>2} {:<36} {} {:>7.2}s/{}s  {}",
            idx + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget,
            outcome.summary
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
