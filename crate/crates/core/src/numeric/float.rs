use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use super::{Inertia, InertiaReport, RankReport, TolerancePolicy, AMBIGUITY_BAND};
use crate::error::{Error, Result};

fn in_band(v: f64, theta: f64) -> bool {
    v > theta / AMBIGUITY_BAND && v <= theta * AMBIGUITY_BAND
}

pub(super) fn check_symmetric(m: &DMatrix<f64>, tol: &TolerancePolicy) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "symmetric form must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite matrix entry".into()));
    }
    let residual = (m - m.transpose()).norm();
    let threshold = tol.threshold(m.norm());
    if residual > threshold {
        return Err(Error::Asymmetric {
            residual,
            threshold,
        });
    }
    Ok(())
}

pub(super) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub(super) fn rank_report(m: &DMatrix<f64>, tol: &TolerancePolicy) -> RankReport {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let threshold = tol.threshold(smax);
    let rank = s.iter().filter(|&&v| v > threshold).count();
    RankReport {
        rank,
        threshold,
        smallest_kept: s[..rank].last().copied(),
        largest_dropped: s.get(rank).copied(),
        ambiguous: s.iter().any(|&v| in_band(v, threshold)),
    }
}

pub(super) fn inertia_report(m: &DMatrix<f64>, tol: &TolerancePolicy) -> Result<InertiaReport> {
    check_symmetric(m, tol)?;
    if m.nrows() == 0 {
        return Ok(InertiaReport::exact(Inertia::default()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = tol.threshold(scale);
    let count = |cut: f64| {
        let mut out = Inertia::default();
        for &lam in &eig {
            if lam > cut {
                out.positive += 1;
            } else if lam < -cut {
                out.negative += 1;
            } else {
                out.nullity += 1;
            }
        }
        out
    };
    let inertia = count(threshold);
    let lower = count(threshold * AMBIGUITY_BAND);
    let upper = count(threshold / AMBIGUITY_BAND);
    let smallest_nonzero = eig
        .iter()
        .map(|v| v.abs())
        .filter(|&a| a > threshold)
        .reduce(f64::min);
    let largest_zero = eig
        .iter()
        .map(|v| v.abs())
        .filter(|&a| a <= threshold)
        .reduce(f64::max);
    let (inertia, upper_candidate) = if lower != upper {
        (lower, Some(upper))
    } else {
        (inertia, None)
    };
    Ok(InertiaReport {
        inertia,
        threshold,
        smallest_nonzero,
        largest_zero,
        upper_candidate,
    })
}

/// Orthonormal kernel basis from the right singular vectors.
pub(super) fn nullspace(m: &DMatrix<f64>, tol: &TolerancePolicy) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    // pad to at least square so that V^T is complete
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let s = &svd.singular_values;
    let smax = s.iter().fold(0.0f64, |a, &v| a.max(v));
    let theta = tol.threshold(smax);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= theta).collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vt.row(i).adjoint());
    }
    out
}

/// Orthonormal basis for the column span (QR, columns assumed independent).
pub(crate) fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = m.shape();
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let q = m.clone().qr().q();
    q.columns(0, k.min(n)).into_owned()
}

/// Orthonormal basis of the column span with numerically dependent columns
/// removed.
pub(crate) fn range_basis(m: &DMatrix<f64>, tol: &TolerancePolicy) -> DMatrix<f64> {
    pivoted_range(m, tol)
}

/// Complex-orthonormal basis of the complex column span.
pub(crate) fn complex_range_basis(m: &DMatrix<Complex64>, tol: &TolerancePolicy) -> DMatrix<Complex64> {
    pivoted_range(m, tol)
}

// Pivoted Gram-Schmidt: the largest remaining column is taken next and the
// rest are deflated against it. The SVD's left factor is not used here since
// it drifts out of the span on rank-deficient input.
fn pivoted_range<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, tol: &TolerancePolicy) -> DMatrix<T> {
    let n = m.nrows();
    let mut rest: Vec<DVector<T>> = m.column_iter().map(|c| c.into_owned()).collect();
    let scale = rest.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let theta = tol.threshold(scale);
    let mut out: Vec<DVector<T>> = Vec::new();
    while !rest.is_empty() && out.len() < n {
        let (idx, norm) = rest
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if norm <= theta {
            break;
        }
        let mut q = rest.swap_remove(idx);
        for e in &out {
            let p = e.dotc(&q);
            q -= e * p;
        }
        let qn = q.norm();
        if qn <= theta {
            continue;
        }
        q.unscale_mut(qn);
        for c in rest.iter_mut() {
            let p = q.dotc(c);
            *c -= &q * p;
        }
        out.push(q);
    }
    if out.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&out)
}

/// Complex kernel basis, orthonormal for the Hermitian product.
pub(crate) fn complex_nullspace(m: &DMatrix<Complex64>, tol: &TolerancePolicy) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let mut padded = DMatrix::zeros(rows.max(cols), cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let s = &svd.singular_values;
    let smax = s.iter().fold(0.0f64, |a, &v| a.max(v));
    let theta = tol.threshold(smax);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= theta).collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vt.row(i).adjoint());
    }
    out
}

pub(super) fn diagonalize_form(
    form: &DMatrix<f64>,
    tol: &TolerancePolicy,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    check_symmetric(form, tol)?;
    let n = form.nrows();
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), Vec::new()));
    }
    let sym = (form + form.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let theta = tol.threshold(scale);
    let mut order: Vec<usize> = (0..n).collect();
    // positives, then negatives, then zeros
    let class = |l: f64| {
        if l > theta {
            0
        } else if l < -theta {
            1
        } else {
            2
        }
    };
    order.sort_by_key(|&i| class(eig.eigenvalues[i]));
    let mut t = DMatrix::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    for (j, &i) in order.iter().enumerate() {
        let lam = eig.eigenvalues[i];
        let (s, v) = match class(lam) {
            0 => (1.0 / lam.sqrt(), 1.0),
            1 => (1.0 / (-lam).sqrt(), -1.0),
            _ => (1.0, 0.0),
        };
        t.set_column(j, &(eig.eigenvectors.column(i) * s));
        d.push(v);
    }
    Ok((t, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix_is_orthonormal() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let k = nullspace(&m, &TolerancePolicy::default());
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn diagonalization_puts_positives_first() {
        let form = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (t, d) = diagonalize_form(&form, &TolerancePolicy::default()).unwrap();
        assert_eq!(d, vec![1.0, -1.0, 0.0]);
        let out = t.transpose() * &form * &t;
        assert!((out - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))).norm() < 1e-12);
    }

    #[test]
    fn range_basis_drops_dependent_columns() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0]);
        assert_eq!(range_basis(&m, &TolerancePolicy::default()).ncols(), 2);
    }
}
