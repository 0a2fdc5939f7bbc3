//! Zero-locus verdicts of the Gram-determinant sections on each orbit.

use std::sync::Arc;

use num_rational::BigRational;
use orbitscope::exterior::{sigma_k_at, zero_locus_verdict};
use orbitscope::grassmann::{enumerate_labels, standard_representative, QuadraticSpace};
use orbitscope::numeric::TolerancePolicy;

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    let amb = Arc::new(QuadraticSpace::<BigRational>::standard(3, 2));
    for l in enumerate_labels(3, 2, 3) {
        let v = standard_representative(&l, &amb)?;
        let zeros: Vec<bool> = (1..=3)
            .map(|k| zero_locus_verdict(&v, k, &tol).map(|z| z.zero))
            .collect::<orbitscope::Result<_>>()?;
        println!("{l}: sigma_k = 0 for k = 1..3: {zeros:?}");
    }
    let v = standard_representative(&enumerate_labels(3, 2, 3)[0], &amb)?;
    let doc = serde_json::to_string(&sigma_k_at(&v, 2, &tol)?.doc())?;
    println!("sigma_2 at the first orbit: {doc}");
    Ok(())
}
