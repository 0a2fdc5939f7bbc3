//! Slice charts at the non-open orbits of Gr(2, R^(2,2)).

use std::sync::Arc;

use orbitscope::grassmann::{enumerate_labels, standard_representative, QuadraticSpace};
use orbitscope::lie::{build_algebra, AlgebraName};
use orbitscope::numeric::TolerancePolicy;
use orbitscope::rng::stream;
use orbitscope::slice::{build_slice_chart, Center};

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    let mut rng = stream(7, 0);
    let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
    let h = build_algebra::<f64>(AlgebraName::So { p: 2, q: 2 }, &tol)?;
    for l in enumerate_labels(2, 2, 2).into_iter().filter(|l| l.nu > 0) {
        let center = Center::Grassmann(standard_representative(&l, &amb)?);
        let chart = build_slice_chart(&center, &h, 0.5, &tol, &mut rng)?;
        let s = chart.summary(100, 500, &mut rng);
        println!(
            "{l}: chart dim {} orbit dim {} radius {:.3} worst round trip {:.1e} concordance {}/{}",
            s.chart_dim, s.orbit_dim, s.radius, s.round_trip.worst_round_trip, s.concordance.agree, s.concordance.points
        );
    }
    Ok(())
}
