use nalgebra::DMatrix;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Inertia;
use crate::error::{Error, Result};

pub(super) fn inv_sqrt(x: &BigRational) -> Option<BigRational> {
    if !x.is_positive() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rd, rn))
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut DMatrix<BigRational>) -> Vec<usize> {
    let (rows, cols) = m.shape();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !m[(r, col)].is_zero()) else {
            continue;
        };
        m.swap_rows(p, row);
        let piv = m[(row, col)].clone();
        for c in col..cols {
            m[(row, c)] = &m[(row, c)] / &piv;
        }
        for r in 0..rows {
            if r == row || m[(r, col)].is_zero() {
                continue;
            }
            let f = m[(r, col)].clone();
            for c in col..cols {
                let v = &m[(row, c)] * &f;
                m[(r, c)] -= v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub(super) fn rank(m: &DMatrix<BigRational>) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Kernel basis with one column per free variable (the free entry set to 1).
pub(super) fn nullspace(m: &DMatrix<BigRational>) -> DMatrix<BigRational> {
    let cols = m.ncols();
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = DMatrix::zeros(cols, free.len());
    for (j, &f) in free.iter().enumerate() {
        out[(f, j)] = BigRational::one();
        for (r, &p) in pivots.iter().enumerate() {
            out[(p, j)] = -a[(r, f)].clone();
        }
    }
    out
}

fn check_symmetric(m: &DMatrix<BigRational>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "symmetric form must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m != &m.transpose() {
        return Err(Error::Asymmetric {
            residual: f64::NAN,
            threshold: 0.0,
        });
    }
    Ok(())
}

/// Scales by the positive lcm of all denominators to get an integer matrix.
fn clear_denominators(m: &DMatrix<BigRational>) -> DMatrix<BigInt> {
    let l = m.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    m.map(|v| v.numer() * (&l / v.denom()))
}

/// Exact inertia by fraction-free symmetric elimination.
///
/// Bareiss steps keep every entry an integer; each step uses a nonzero
/// diagonal pivot moved into place by a simultaneous row/column swap. If only
/// off-diagonal entries remain, the congruence `row_i += row_j, col_i += col_j`
/// creates the diagonal entry `2·a_ij`. The pivots are leading principal minors
/// `d_k` of a congruent matrix, so the LDLᵀ diagonal has sign
/// `sign(d_k)·sign(d_{k−1})`.
pub(super) fn inertia(m: &DMatrix<BigRational>) -> Result<Inertia> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut a = clear_denominators(m);
    let mut prev = BigInt::one();
    let mut out = Inertia::default();
    for k in 0..n {
        if let Some(p) = (k..n).find(|&i| !a[(i, i)].is_zero()) {
            a.swap_rows(k, p);
            a.swap_columns(k, p);
        } else if let Some((i, j)) = (k..n)
            .flat_map(|i| (k..n).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && !a[(i, j)].is_zero())
        {
            for c in 0..n {
                let v = a[(j, c)].clone();
                a[(i, c)] += v;
            }
            for r in 0..n {
                let v = a[(r, j)].clone();
                a[(r, i)] += v;
            }
            a.swap_rows(k, i);
            a.swap_columns(k, i);
        } else {
            out.nullity += n - k;
            return Ok(out);
        }
        let piv = a[(k, k)].clone();
        let sign = piv.sign() == prev.sign();
        if sign {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&piv * &a[(i, j)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
        }
        for i in k + 1..n {
            a[(i, k)] = BigInt::zero();
            a[(k, i)] = BigInt::zero();
        }
        prev = piv;
    }
    debug_assert!(prev.sign() != Sign::NoSign || n == 0);
    Ok(out)
}

/// Congruence diagonalisation `Tᵀ·m·T = diag(d)` with positive entries first,
/// then negative, then zero.
pub(super) fn diagonalize_form(
    m: &DMatrix<BigRational>,
) -> Result<(DMatrix<BigRational>, Vec<BigRational>)> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut a = m.clone();
    let mut t = DMatrix::<BigRational>::identity(n, n);
    let swap = |a: &mut DMatrix<BigRational>, t: &mut DMatrix<BigRational>, i: usize, j: usize| {
        a.swap_rows(i, j);
        a.swap_columns(i, j);
        t.swap_columns(i, j);
    };
    for k in 0..n {
        if let Some(p) = (k..n).find(|&i| !a[(i, i)].is_zero()) {
            swap(&mut a, &mut t, k, p);
        } else if let Some((i, j)) = (k..n)
            .flat_map(|i| (k..n).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && !a[(i, j)].is_zero())
        {
            for c in 0..n {
                let v = a[(j, c)].clone();
                a[(i, c)] += v;
            }
            for r in 0..n {
                let v = a[(r, j)].clone();
                a[(r, i)] += v;
            }
            for r in 0..n {
                let v = t[(r, j)].clone();
                t[(r, i)] += v;
            }
            swap(&mut a, &mut t, k, i);
        } else {
            break;
        }
        let piv = a[(k, k)].clone();
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for c in 0..n {
                let v = &a[(k, c)] * &f;
                a[(i, c)] -= v;
            }
            for r in 0..n {
                let v = &a[(r, k)] * &f;
                a[(r, i)] -= v;
            }
            for r in 0..n {
                let v = &t[(r, k)] * &f;
                t[(r, i)] -= v;
            }
        }
    }
    let class = |v: &BigRational| {
        if v.is_positive() {
            0
        } else if v.is_negative() {
            1
        } else {
            2
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| class(&a[(i, i)]));
    let mut tt = DMatrix::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    for (j, &i) in order.iter().enumerate() {
        tt.set_column(j, &t.column(i));
        d.push(a[(i, i)].clone());
    }
    Ok((tt, d))
}
