//! Orbit labels of subspaces of R^{2,2}: the full list, a few points, and a flag.

use std::sync::Arc;

use num_rational::BigRational;
use orbitscope::grassmann::{
    classify, classify_flag, closure_partial_order, enumerate_labels, QuadraticSpace, SubspacePoint, TwoStepFlagPoint,
};
use orbitscope::numeric::{self, TolerancePolicy};

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    let amb = Arc::new(QuadraticSpace::<BigRational>::standard(2, 2));
    let labels = enumerate_labels(2, 2, 2);
    println!("orbits on Gr(2, R^(2,2)):");
    for l in &labels {
        let below: Vec<String> = labels
            .iter()
            .filter(|m| *m != l && closure_partial_order(l, m).unwrap_or(false))
            .map(|m| m.to_string())
            .collect();
        println!("  {l} codim {} closure contains {:?}", l.codim, below);
    }

    let point = |cols, data: &[i64]| SubspacePoint::new(amb.clone(), numeric::from_integers(4, cols, data), &tol);
    let positive = point(2, &[1, 0, 0, 1, 0, 0, 0, 0])?;
    let null = point(2, &[1, 0, 0, 1, 1, 0, 0, 1])?;
    let mixed = point(2, &[1, 0, 0, 0, 0, 1, 0, 0])?;
    for (name, v) in [("span(e1,e2)", &positive), ("span(e1+e3,e2+e4)", &null), ("span(e1,e3)", &mixed)] {
        println!("{name}: {}", classify(v, &tol)?);
    }

    let line = point(1, &[1, 0, 1, 0])?;
    let plane = point(2, &[1, 0, 0, 1, 1, 0, 0, 0])?;
    let flag = TwoStepFlagPoint::new(line, plane, &tol)?;
    println!("flag span(e1+e3) in span(e1+e3,e2): {:?}", classify_flag(&flag, &tol)?);
    Ok(())
}
