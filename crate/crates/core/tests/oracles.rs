//! Frozen values checked against independent exact oracles.

mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use common::{q, rows};
use orbitscope::exterior::{gram_determinant_form, zero_verdict_from_restriction};
use orbitscope::grassmann::{
    classify, classify_flag, enumerate_labels, restrict_form, sample_uniform, standard_representative, OrbitLabel,
    QuadraticSpace, SubspacePoint, TwoStepFlagPoint,
};
use orbitscope::isotropic::{
    adapted_basis, classify_isotropic, enumerate_isotropic_labels, real_columns, sample_isotropic,
    standard_structure, AdaptedBasis, Duality, IsotropicPoint,
};
use orbitscope::lie::{
    build_algebra, centralizer_dimension, group_residual, random_group_element, stabilizer_element, AlgebraName,
};
use orbitscope::numeric::{self, Field, Inertia, TolerancePolicy};
use orbitscope::slice::{ChartFrame, Center};

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn to_dm(m: &[Vec<BigRational>]) -> DMatrix<BigRational> {
    DMatrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j].clone())
}

fn from_dm(m: &DMatrix<BigRational>) -> Vec<Vec<BigRational>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].clone()).collect()).collect()
}

fn split22() -> Arc<QuadraticSpace<BigRational>> {
    Arc::new(QuadraticSpace::standard(2, 2))
}

fn point(amb: &Arc<QuadraticSpace<BigRational>>, n: usize, i: usize, entries: &[i64]) -> SubspacePoint<BigRational> {
    SubspacePoint::new(amb.clone(), numeric::from_integers(n, i, entries), &tol()).unwrap()
}

#[test]
fn antidiagonal_block_form_has_split_inertia() {
    let m = rows(&[&[0, 0, 0, 1], &[0, 1, 0, 0], &[0, 0, -1, 0], &[1, 0, 0, 0]]);
    assert_eq!(common::inertia(&m), (2, 2, 0));
    let got = numeric::inertia_of(&to_dm(&m), &tol()).unwrap();
    assert_eq!(got, Inertia::new(2, 2, 0));
    let got = numeric::inertia_of(&numeric::to_f64_matrix(&to_dm(&m)), &tol()).unwrap();
    assert_eq!(got, Inertia::new(2, 2, 0));
}

#[test]
fn gram_of_three_planar_vectors_has_rank_two() {
    // vectors e1, e1+e2, e2 as columns
    let b = rows(&[&[1, 1, 0], &[0, 1, 1]]);
    let g = common::gram(&common::diag(&[1, 1]), &b);
    assert_eq!(common::rank(&g), 2);
    assert_eq!(numeric::rank_of(&to_dm(&g), &tol()), 2);
    assert_eq!(numeric::rank_of(&numeric::to_f64_matrix(&to_dm(&g)), &tol()), 2);
}

#[test]
fn generic_planes_in_four_space_meet_in_zero() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let amb = Arc::new(QuadraticSpace::<f64>::standard(4, 0));
    for _ in 0..50 {
        let a = sample_uniform(&amb, 2, &mut rng).unwrap();
        let b = sample_uniform(&amb, 2, &mut rng).unwrap();
        // dimension count: 2 + 2 − 4 = 0
        let x = numeric::subspace_intersection(a.basis(), b.basis(), &tol()).unwrap();
        assert_eq!(x.ncols(), 0);
    }
}

#[test]
fn restriction_of_a_half_isotropic_plane() {
    let v = point(&split22(), 4, 2, &[1, 0, 0, 1, 1, 0, 0, 0]);
    let g = common::gram(&common::diag(&[1, 1, -1, -1]), &rows(&[&[1, 0], &[0, 1], &[1, 0], &[0, 0]]));
    assert_eq!(g, rows(&[&[0, 0], &[0, 1]]));
    assert_eq!(from_dm(&restrict_form(&v)), g);
}

#[test]
fn degenerate_line_plus_positive_line() {
    // span(e1, e2+e4): Gram diag(1, 0)
    let v = point(&split22(), 4, 2, &[1, 0, 0, 1, 0, 0, 0, 1]);
    assert_eq!(classify(&v, &tol()).unwrap(), OrbitLabel::new(1, 0, 1));
    assert_eq!(classify(&v, &tol()).unwrap().codim, 1);
}

#[test]
fn totally_isotropic_representative_round_trips() {
    let l = OrbitLabel::new(0, 0, 2);
    let v = standard_representative(&l, &split22()).unwrap();
    let r = from_dm(&restrict_form(&v));
    assert_eq!(common::inertia(&r), (0, 0, 2));
    assert_eq!(classify(&v, &tol()).unwrap(), l);
}

#[test]
fn flag_with_one_dimensional_defect() {
    // W1 = span(e1+e3) isotropic, W2 = span(e1, e3) a hyperbolic plane containing it
    let amb = split22();
    let w1 = point(&amb, 4, 1, &[1, 0, 1, 0]);
    let w2 = point(&amb, 4, 2, &[1, 0, 0, 0, 0, 1, 0, 0]);
    let flag = TwoStepFlagPoint::new(w1, w2, &tol()).unwrap();
    let label = classify_flag(&flag, &tol()).unwrap();
    // ℓ = dim rad(W1) − dim(W1 ∩ W2^⊥) = 1 − 0, since W2 is nondegenerate
    // and W1 ⊂ W2 meets W2^⊥ trivially
    assert_eq!((label.r1, label.s1, label.r2, label.s2, label.ell), (0, 0, 1, 1, 1));
}

fn brute_labels(p: usize, q: usize, i: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for r in 0..=i {
        for s in 0..=i - r {
            let nu = i - r - s;
            // an i-plane with this restriction exists iff r+nu ≤ p and s+nu ≤ q
            if r + nu <= p && s + nu <= q {
                out.push((r, s, nu));
            }
        }
    }
    out
}

#[test]
fn label_enumerations_match_direct_count() {
    for (p, qq, i, n) in [(1, 1, 1, 3), (2, 2, 2, 6)] {
        let mut got: Vec<_> = enumerate_labels(p, qq, i).into_iter().map(|l| (l.r, l.s, l.nu)).collect();
        got.sort();
        let mut want = brute_labels(p, qq, i);
        want.sort();
        assert_eq!(got, want);
        assert_eq!(got.len(), n);
    }
}

#[test]
fn generic_planes_are_nondegenerate() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
    for _ in 0..10_000 {
        let v = sample_uniform(&amb, 2, &mut rng).unwrap();
        assert_eq!(classify(&v, &tol()).unwrap().nu, 0);
    }
}

#[test]
fn second_compound_of_a_diagonal_form() {
    let r = common::diag(&[1, 1, -1]);
    let got = gram_determinant_form(&to_dm(&r), 2).unwrap().gram;
    let idx = common::subsets(3, 2);
    for (a, ia) in idx.iter().enumerate() {
        for (b, ib) in idx.iter().enumerate() {
            assert_eq!(got[(a, b)], common::minor(&r, ia, ib));
        }
    }
    assert_eq!(from_dm(&got), common::diag(&[1, -1, -1]));
}

#[test]
fn sections_of_a_rank_one_restriction() {
    let r = to_dm(&common::diag(&[1, 0]));
    let s2 = gram_determinant_form(&r, 2).unwrap().gram;
    assert_eq!(from_dm(&s2), rows(&[&[0]]));
    assert!(zero_verdict_from_restriction(&r, 2, &tol()).unwrap().zero);
    assert!(!zero_verdict_from_restriction(&r, 1, &tol()).unwrap().zero);
}

#[test]
fn one_dimensional_complex_structure() {
    let st = standard_structure::<BigRational>(1).unwrap();
    assert_eq!(from_dm(&st.j), rows(&[&[0, -1], &[1, 0]]));
    assert_eq!(from_dm(&st.b_imag), rows(&[&[0, 1], &[1, 0]]));
    assert_eq!(common::inertia(&from_dm(&st.b_imag)), (1, 1, 0));
}

#[test]
fn imaginary_real_points_flip_signature() {
    for n in 1..=5 {
        let st = Arc::new(standard_structure::<BigRational>(n).unwrap());
        // i·ℝⁿ: columns (0; e_j)
        let b = DMatrix::from_fn(2 * n, n, |a, c| if a == c + n { q(1) } else { q(0) });
        let v = IsotropicPoint::new(st, b, &tol()).unwrap();
        assert_eq!(common::inertia(&from_dm(&v.real_restriction())), (0, n, 0));
        let l = classify_isotropic(&v, &tol()).unwrap();
        assert_eq!((l.r, l.s), (0, n));
    }
}

#[test]
fn adapted_gram_of_a_complex_line() {
    let st = Arc::new(standard_structure::<f64>(2).unwrap());
    // z = (1, i) is isotropic; V = span_R(z, i z)
    let z = DMatrix::from_row_slice(
        2,
        2,
        &[
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(0.0, 1.0),
            num_complex::Complex64::new(0.0, 1.0),
            num_complex::Complex64::new(-1.0, 0.0),
        ],
    );
    let v = IsotropicPoint::new(st, real_columns(&z), &tol()).unwrap();
    let a = adapted_basis(&v, &tol()).unwrap();
    assert_eq!(a.k, 1);
    let want = AdaptedBasis::expected_gram(1, 0, 0);
    assert_eq!(want.shape(), (2, 2));
    assert_eq!(want[(0, 1)].re, 1.0);
    assert_eq!(want[(0, 0)].norm(), 0.0);
    assert!(a.residual <= 1e-12, "{}", a.residual);
}

#[test]
fn random_adapted_bases_have_small_residual() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let st = Arc::new(standard_structure::<f64>(4).unwrap());
    for d in [Duality::SelfDual, Duality::AntiSelfDual] {
        for _ in 0..200 {
            let v = sample_isotropic(&st, d, &mut rng);
            assert!(adapted_basis(&v, &tol()).unwrap().residual <= 1e-8);
        }
    }
}

#[test]
fn generic_isotropic_points_are_nondegenerate() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let st = Arc::new(standard_structure::<f64>(3).unwrap());
    for k in 0..10_000 {
        let d = if k % 2 == 0 { Duality::SelfDual } else { Duality::AntiSelfDual };
        let v = sample_isotropic(&st, d, &mut rng);
        assert_eq!(classify_isotropic(&v, &tol()).unwrap().nu, 0);
    }
}

#[test]
fn self_dual_labels_in_three_dimensions() {
    // n − s even with r + s + nu = 3 and nu even
    let mut want = Vec::new();
    for s in 0..=3usize {
        for nu in (0..=3 - s).step_by(2) {
            let r = 3 - s - nu;
            if (3 - s) % 2 == 0 {
                want.push((r, s, nu));
            }
        }
    }
    want.sort();
    let mut got: Vec<_> = enumerate_isotropic_labels(3, Duality::SelfDual)
        .into_iter()
        .map(|l| (l.r, l.s, l.nu))
        .collect();
    got.sort();
    assert_eq!(got, want);
    assert_eq!(got, vec![(0, 1, 2), (0, 3, 0), (2, 1, 0)]);
}

#[test]
fn realified_complex_orthogonal_algebra_dimension() {
    let h = build_algebra::<f64>(AlgebraName::SoComplexRealified { n: 3 }, &tol()).unwrap();
    assert_eq!(h.dim(), 2 * 3);
}

#[test]
fn stabilizer_element_eigenvalues() {
    let h = build_algebra::<BigRational>(AlgebraName::So { p: 2, q: 0 }, &tol()).unwrap();
    let g = build_algebra::<BigRational>(AlgebraName::Sl { n: 2 }, &tol()).unwrap();
    let st = stabilizer_element(&h, &g, &tol()).unwrap();
    assert_eq!(st.complement_scalar, BigRational::new(q(-1).to_integer(), q(2).to_integer()));
    // eigenvalues {1, −1/2, −1/2}: characteristic polynomial (x−1)(x+1/2)²
    let c = common::char_poly(&from_dm(&st.v0));
    let want = [q(-1) / q(4), q(-3) / q(4), q(0), q(1)];
    assert_eq!(c, want);
    for (p, qq) in [(1, 1), (2, 1), (3, 0), (2, 2), (3, 1), (4, 0)] {
        let h = build_algebra::<BigRational>(AlgebraName::So { p, q: qq }, &tol()).unwrap();
        let g = build_algebra::<BigRational>(AlgebraName::Sl { n: p + qq }, &tol()).unwrap();
        let st = stabilizer_element(&h, &g, &tol()).unwrap();
        let (dh, de) = (h.dim() as i64, (g.dim() - h.dim()) as i64);
        assert_eq!(st.complement_scalar, q(-dh) / q(de));
    }
}

#[test]
fn centralizer_dimensions() {
    let cases = [
        (AlgebraName::So { p: 2, q: 0 }, AlgebraName::Sl { n: 2 }, 1),
        (AlgebraName::So { p: 2, q: 1 }, AlgebraName::Sl { n: 3 }, 3),
        (AlgebraName::SoComplexRealified { n: 2 }, AlgebraName::SoSplit { n: 2 }, 2),
    ];
    for (hn, gn, want) in cases {
        let h = build_algebra::<BigRational>(hn, &tol()).unwrap();
        let g = build_algebra::<BigRational>(gn, &tol()).unwrap();
        let st = stabilizer_element(&h, &g, &tol()).unwrap();
        assert_eq!(centralizer_dimension(&st.v0, &g, &tol()).unwrap(), want, "{hn} in {gn}");
    }
}

#[test]
fn exponentials_preserve_the_form() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for name in [AlgebraName::So { p: 2, q: 2 }, AlgebraName::SoComplexRealified { n: 3 }, AlgebraName::Sl { n: 3 }] {
        let h = build_algebra::<f64>(name, &tol()).unwrap();
        for scale in [0.1, 0.5, 1.0] {
            let g = random_group_element(&h, scale, &mut rng).unwrap();
            assert!(group_residual(&h, &g) <= 1e-9, "{name}");
        }
    }
}

#[test]
fn line_field_section_off_the_orbit() {
    let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
    let v = standard_representative(&OrbitLabel::new(1, 0, 1), &amb).unwrap();
    let frame = ChartFrame::new(&Center::Grassmann(v), &tol()).unwrap();
    let zero = DVector::zeros(frame.chart_dim());
    assert!(frame.defining_section_at(&zero).unwrap().norm() <= 1e-12);
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut positive = 0;
    for _ in 0..50 {
        let x = DVector::from_fn(frame.chart_dim(), |_, _| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)) * 1e-3;
        let val = frame.defining_section_at(&x).unwrap();
        assert!(val.norm() > 0.0);
        // a nearby point in (r+1, s) has positive transversal value
        if classify_center(&frame, &x) == OrbitLabel::new(2, 0, 0) {
            assert!(val[(0, 0)] > 0.0);
            positive += 1;
        }
    }
    assert!(positive > 0);
}

fn classify_center(frame: &ChartFrame, x: &DVector<f64>) -> OrbitLabel {
    match frame.point_at(x) {
        Center::Grassmann(v) => classify(&v, &tol()).unwrap(),
        Center::Isotropic(_) => unreachable!(),
    }
}

#[test]
fn hermitian_frames_near_the_center() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for n in 2..=4 {
        let st = Arc::new(standard_structure::<f64>(n).unwrap());
        for l in enumerate_isotropic_labels(n, Duality::SelfDual).into_iter().filter(|l| l.nu > 0) {
            let v = orbitscope::isotropic::standard_isotropic_representative(&l, &st).unwrap();
            let frame = ChartFrame::new(&Center::Isotropic(v), &tol()).unwrap();
            for _ in 0..1000 / n {
                let x = DVector::from_fn(frame.chart_dim(), |_, _| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)) * 1e-3;
                let h = frame.hermitian_frame(&x).unwrap();
                assert!(h.hermitian_residual <= 1e-10, "{l}: {}", h.hermitian_residual);
            }
        }
    }
}

#[test]
fn float_and_rational_backends_agree_on_integer_forms() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    for _ in 0..200 {
        let n = rand::Rng::random_range(&mut rng, 1..=5usize);
        let mut m = vec![vec![q(0); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rand::Rng::random_range(&mut rng, -2..=2i64);
                m[i][j] = q(v);
                m[j][i] = q(v);
            }
        }
        let (p, s, z) = common::inertia(&m);
        assert_eq!(numeric::inertia_of(&to_dm(&m), &tol()).unwrap(), Inertia::new(p, s, z));
        assert_eq!(numeric::rank_of(&to_dm(&m), &tol()), common::rank(&m));
        let f = numeric::to_f64_matrix(&to_dm(&m));
        assert_eq!(f64::inertia_report(&f, &tol()).unwrap().certified().unwrap(), Inertia::new(p, s, z));
    }
}
