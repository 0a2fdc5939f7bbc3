//! Exterior powers of a restricted form and the sections `σ_k`.
//!
//! `σ_k(V)` is the matrix of `Λᵏ(b|_V)` in the basis `v_I = v_{i₁}∧…∧v_{i_k}`
//! of `ΛᵏV`: entry `(I, J)` is `det(R[I, J])` with `R = b|_V`. It vanishes
//! exactly when `rank R < k`.
//!
//! Float zero test: `‖σ_k‖_F ≤ θ·σ₁⋯σ_{k−1}` where `σ_j` are the singular
//! values of `R` and `θ` is the rank threshold of `R`. This scales like the
//! minors themselves, so the verdict agrees with the rank decision on `R`
//! whenever that decision is outside the ambiguity band.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{restrict_form, SubspacePoint};
use crate::numeric::{self, Field, ScalarMatrix, TolerancePolicy};

/// Strictly increasing `k`-subsets of `0..i` in lexicographic order.
pub fn multi_indices(i: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, i: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..i {
            if i - j < k - cur.len() {
                break;
            }
            cur.push(j);
            go(j + 1, i, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= i {
        go(0, i, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

fn submatrix<T: Field>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])].clone())
}

/// `k`-th compound matrix: all `k×k` minors, rows and columns indexed
/// lexicographically.
pub fn compound_matrix<T: Field>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let rows = multi_indices(m.nrows(), k);
    let cols = multi_indices(m.ncols(), k);
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        numeric::determinant(&submatrix(m, &rows[a], &cols[b]))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionValue<T: Field> {
    pub k: usize,
    pub gram: DMatrix<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectionValueDoc {
    pub k: usize,
    pub gram: ScalarMatrix,
}

impl<T: Field> SectionValue<T> {
    pub fn doc(&self) -> SectionValueDoc {
        SectionValueDoc {
            k: self.k,
            gram: T::to_literal(&self.gram),
        }
    }
}

/// `Λᵏ` of a restricted form, as a `C(i,k)×C(i,k)` Gram-determinant matrix.
pub fn gram_determinant_form<T: Field>(restriction: &DMatrix<T>, k: usize) -> Result<SectionValue<T>> {
    let i = restriction.nrows();
    if !restriction.is_square() {
        return Err(Error::Dimension("restriction must be square".into()));
    }
    if k == 0 || k > i {
        return Err(Error::Invalid(format!("k = {k} outside 1..={i}")));
    }
    Ok(SectionValue {
        k,
        gram: compound_matrix(restriction, k),
    })
}

pub fn sigma_k_at<T: Field>(v: &SubspacePoint<T>, k: usize, tol: &TolerancePolicy) -> Result<SectionValue<T>> {
    let r = restrict_form(v);
    certify_rank(&r, tol)?;
    gram_determinant_form(&r, k)
}

/// Zero-locus verdict for one `k` with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroVerdict {
    pub k: usize,
    pub zero: bool,
    /// `‖σ_k‖_F`.
    pub norm: f64,
    /// The threshold the norm was compared with (0 for exact fields).
    pub threshold: f64,
    /// Smallest nonzero singular value of the restriction.
    pub margin: Option<f64>,
    pub rank: usize,
}

fn certify_rank<T: Field>(r: &DMatrix<T>, tol: &TolerancePolicy) -> Result<usize> {
    let report = T::rank_report(r, tol);
    if report.ambiguous {
        // the inertia report names both candidate labels
        T::inertia_report(r, tol)?.certified()?;
        return report.certified();
    }
    Ok(report.rank)
}

/// Verdict from a restriction `R` directly (shared by the isotropic case,
/// where `R = Re b|_V`).
pub fn zero_verdict_from_restriction<T: Field>(
    r: &DMatrix<T>,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<ZeroVerdict> {
    let rank = certify_rank(r, tol)?;
    let section = gram_determinant_form(r, k)?;
    let norm = numeric::to_f64_matrix(&section.gram).norm();
    if T::KIND == numeric::FieldKind::Rational {
        return Ok(ZeroVerdict {
            k,
            zero: section.gram.iter().all(|v| v.is_zero()),
            norm,
            threshold: 0.0,
            margin: None,
            rank,
        });
    }
    let rf = numeric::to_f64_matrix(r);
    let mut s: Vec<f64> = rf.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let theta = tol.threshold(s.first().copied().unwrap_or(0.0));
    let scale: f64 = s.iter().take(k - 1).product();
    let threshold = theta * scale.max(f64::MIN_POSITIVE);
    let margin = s.iter().copied().filter(|&v| v > theta).reduce(f64::min);
    Ok(ZeroVerdict {
        k,
        zero: norm <= threshold,
        norm,
        threshold,
        margin,
        rank,
    })
}

pub fn zero_locus_verdict<T: Field>(
    v: &SubspacePoint<T>,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<ZeroVerdict> {
    zero_verdict_from_restriction(&restrict_form(v), k, tol)
}

pub fn zero_locus_indicator<T: Field>(v: &SubspacePoint<T>, k: usize, tol: &TolerancePolicy) -> Result<bool> {
    zero_locus_verdict(v, k, tol).map(|z| z.zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SectionContext {
    Grassmann,
    IsotropicGrassmann { n: usize },
}

/// Order of the first BGG operator whose canonical solution is `σ_k`.
pub fn bgg_order(k: usize, i: usize, ctx: SectionContext) -> Result<usize> {
    match ctx {
        SectionContext::Grassmann => {
            if k == 0 || k > i {
                return Err(Error::Invalid(format!("k = {k} outside 1..={i}")));
            }
            Ok(if k < i { 1 } else { 3 })
        }
        SectionContext::IsotropicGrassmann { n } => {
            if k == 0 || k > n {
                return Err(Error::Invalid(format!("k = {k} outside 1..={n}")));
            }
            Ok(match n - k {
                0 => 3,
                1 => 2,
                _ => 1,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::QuadraticSpace;
    use num_rational::BigRational;
    use std::sync::Arc;

    fn rat(n: usize, v: &[i64]) -> DMatrix<BigRational> {
        numeric::from_integers(n, n, v)
    }

    #[test]
    fn lexicographic_indices() {
        assert_eq!(multi_indices(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(multi_indices(4, 0), vec![Vec::<usize>::new()]);
        assert!(multi_indices(2, 3).is_empty());
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn gram_determinant_examples() {
        let one = gram_determinant_form(&rat(2, &[1, 0, 0, 1]), 2).unwrap();
        assert_eq!(one.gram, rat(1, &[1]));
        let zero = gram_determinant_form(&rat(2, &[1, 0, 0, 0]), 2).unwrap();
        assert_eq!(zero.gram, rat(1, &[0]));
        let d = gram_determinant_form(&rat(3, &[1, 0, 0, 0, 1, 0, 0, 0, -1]), 2).unwrap();
        assert_eq!(d.gram, rat(3, &[1, 0, 0, 0, -1, 0, 0, 0, -1]));
        assert!(gram_determinant_form(&rat(2, &[1, 0, 0, 1]), 3).is_err());
        assert!(gram_determinant_form(&rat(2, &[1, 0, 0, 1]), 0).is_err());
    }

    #[test]
    fn sigma_examples() {
        let tol = TolerancePolicy::default();
        let amb = Arc::new(QuadraticSpace::<f64>::standard(2, 2));
        let pt = |v: &[i64]| SubspacePoint::new(amb.clone(), numeric::from_integers(4, 2, v), &tol).unwrap();
        let open = pt(&[1, 0, 0, 1, 0, 0, 0, 0]);
        assert!(sigma_k_at(&open, 2, &tol).unwrap().gram[(0, 0)].abs() > 0.5);
        let iso = pt(&[1, 0, 0, 1, 1, 0, 0, 1]);
        assert!(sigma_k_at(&iso, 1, &tol).unwrap().gram.norm() < 1e-15);
        let half = pt(&[1, 0, 0, 1, 0, 0, 0, 1]);
        assert!(zero_locus_indicator(&half, 2, &tol).unwrap());
        assert!(!zero_locus_indicator(&half, 1, &tol).unwrap());
        assert!(!zero_locus_indicator(&open, 1, &tol).unwrap());
        assert!(!zero_locus_indicator(&open, 2, &tol).unwrap());
    }

    #[test]
    fn near_boundary_restriction_is_an_error() {
        let tol = TolerancePolicy::default();
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2e-9]);
        let err = zero_verdict_from_restriction(&r, 2, &tol).unwrap_err();
        assert!(err.is_ambiguity());
    }

    #[test]
    fn bgg_orders() {
        assert_eq!(bgg_order(2, 2, SectionContext::Grassmann).unwrap(), 3);
        assert_eq!(bgg_order(1, 2, SectionContext::Grassmann).unwrap(), 1);
        let iso = SectionContext::IsotropicGrassmann { n: 4 };
        assert_eq!(bgg_order(3, 4, iso).unwrap(), 2);
        assert_eq!(bgg_order(4, 4, iso).unwrap(), 3);
        assert_eq!(bgg_order(2, 4, iso).unwrap(), 1);
        assert!(bgg_order(5, 4, iso).is_err());
    }

    #[test]
    fn top_section_is_the_determinant() {
        let m = rat(3, &[2, 1, 0, 1, -1, 3, 0, 3, 4]);
        let top = gram_determinant_form(&m, 3).unwrap();
        assert_eq!(top.gram[(0, 0)], numeric::determinant(&m));
    }
}
