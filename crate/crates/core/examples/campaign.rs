//! A seeded verification campaign, printed as a report.

use orbitscope::harness::{run_campaign, CampaignConfig, Scenario};

fn main() -> orbitscope::Result<()> {
    let cfg = CampaignConfig::new(Scenario::Isotropic { n: 3, duality: None }, 500, 42);
    let report = run_campaign(&cfg)?;
    for rec in &report.records {
        println!(
            "{:<14} passed {} ({} of {}, fragile {})",
            rec.check.name(),
            rec.passed,
            rec.counts.passed,
            rec.counts.total,
            rec.counts.fragile
        );
    }
    println!("campaign passed: {}", report.passed);
    Ok(())
}
