//! The top section near the codimension-one orbit, where it defines a
//! hypersurface, and near deeper orbits, where it vanishes to higher order.

use std::sync::Arc;

use orbitscope::grassmann::{enumerate_labels, standard_representative, QuadraticSpace};
use orbitscope::isotropic::{standard_isotropic_representative, standard_structure, IsotropicLabel};
use orbitscope::lie::{build_algebra, AlgebraName};
use orbitscope::numeric::TolerancePolicy;
use orbitscope::rng::stream;
use orbitscope::slice::{density_probe, Center};

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    let mut rng = stream(3, 0);
    let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
    let h = build_algebra::<f64>(AlgebraName::So { p: 2, q: 2 }, &tol)?;
    for l in enumerate_labels(2, 2, 2).into_iter().filter(|l| l.nu > 0) {
        let r = density_probe(&Center::Grassmann(standard_representative(&l, &amb)?), &h, 100, &tol, &mut rng)?;
        println!("{l}: max |value| {:.1e} gradient [{:.1e}, {:.1e}] defining {}", r.max_value, r.min_gradient, r.max_gradient, r.defining);
    }
    let st = Arc::new(standard_structure::<f64>(3)?);
    let hi = build_algebra::<f64>(AlgebraName::SoComplexRealified { n: 3 }, &tol)?;
    let v = standard_isotropic_representative(&IsotropicLabel::new(3, 1, 0).expect("label"), &st)?;
    let r = density_probe(&Center::Isotropic(v), &hi, 100, &tol, &mut rng)?;
    println!("IGr(3) (1,0): max |value| {:.1e} max gradient {:.1e} defining {}", r.max_value, r.max_gradient, r.defining);
    Ok(())
}
