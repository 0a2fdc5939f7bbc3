//! Orbit codimension from the Lie algebra against the closed formula, and the
//! trace-zero stabilizer element.

use num_rational::BigRational;
use orbitscope::isotropic::Duality;
use orbitscope::lie::{
    build_algebra, centralizer_dimension, grassmann_codim_table, isotropic_codim_table, stabilizer_element, AlgebraName,
};
use orbitscope::numeric::TolerancePolicy;

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    for row in grassmann_codim_table::<BigRational>(3, 3, 3, &tol)? {
        println!("Gr(3, R^(3,3)) {row:?}");
    }
    for row in isotropic_codim_table::<BigRational>(4, Duality::SelfDual, &tol)? {
        println!("IGr(4) self-dual {row:?}");
    }
    let h = build_algebra::<BigRational>(AlgebraName::So { p: 2, q: 1 }, &tol)?;
    let g = build_algebra::<BigRational>(AlgebraName::Sl { n: 3 }, &tol)?;
    let v0 = stabilizer_element(&h, &g, &tol)?;
    println!(
        "so(2,1) in sl(3): complement scalar {}, trace {}, centralizer dim {}",
        v0.complement_scalar,
        v0.trace,
        centralizer_dimension(&v0.v0, &g, &tol)?
    );
    Ok(())
}
