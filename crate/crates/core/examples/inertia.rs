//! Certified inertia in both backends, and what an ambiguous decision looks like.

use nalgebra::DMatrix;
use num_rational::BigRational;
use orbitscope::numeric::{self, TolerancePolicy};

fn main() -> orbitscope::Result<()> {
    let tol = TolerancePolicy::default();
    let anti: DMatrix<BigRational> = numeric::from_integers(4, 4, &[0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0]);
    println!("antidiagonal 4x4, exact: {:?}", numeric::inertia_of(&anti, &tol)?);
    println!("antidiagonal 4x4, float: {:?}", numeric::inertia_of(&numeric::to_f64_matrix(&anti), &tol)?);

    for small in [1e-15, 1e-9, 1e-3] {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, small]));
        match numeric::inertia_of(&m, &tol) {
            Ok(i) => println!("diag(1, {small:e}) -> {i:?}"),
            Err(e) => println!("diag(1, {small:e}) -> {e} (ambiguous: {})", e.is_ambiguity()),
        }
    }
    Ok(())
}
