//! Maximal isotropic subspaces of C^n: labels, Hodge sign and adapted bases.

use std::sync::Arc;

use orbitscope::isotropic::{
    adapted_basis, classify_isotropic_report, enumerate_isotropic_labels, standard_isotropic_representative,
    standard_structure, Duality,
};
use orbitscope::numeric::TolerancePolicy;

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    for n in 2..=4 {
        let st = Arc::new(standard_structure::<f64>(n)?);
        for d in [Duality::SelfDual, Duality::AntiSelfDual] {
            for l in enumerate_isotropic_labels(n, d) {
                let v = standard_isotropic_representative(&l, &st)?;
                let rep = classify_isotropic_report(&v, &tol)?;
                let adapted = adapted_basis(&v, &tol)?;
                println!(
                    "n={n} ({},{}) nu={} codim={} hodge={:?} parity agrees={} adapted residual={:.1e}",
                    l.r, l.s, l.nu, l.codim, rep.hodge.duality, rep.parity_agrees, adapted.residual
                );
            }
        }
    }
    Ok(())
}
