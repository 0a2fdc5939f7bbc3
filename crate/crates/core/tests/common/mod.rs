//! Small exact oracles that share no code with the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rows(m: &[&[i64]]) -> Vec<Vec<BigRational>> {
    m.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
}

/// Rank by fraction arithmetic row reduction.
pub fn rank(m: &[Vec<BigRational>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let (nr, nc) = (a.len(), a.first().map_or(0, Vec::len));
    let mut r = 0;
    for c in 0..nc {
        let Some(p) = (r..nr).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..nr {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in 0..nc {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

/// Characteristic polynomial coefficients `c_0..c_n` of `det(xI − A)`, by
/// Faddeev–LeVerrier.
pub fn char_poly(a: &[Vec<BigRational>]) -> Vec<BigRational> {
    let n = a.len();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    s += &a[i][l] * &m[l][j];
                }
                if i == j {
                    s += &coeffs[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        m = next;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &m[l][i];
            }
        }
        coeffs[n - k] = -tr / q(k as i64);
    }
    coeffs
}

fn sign_changes(c: &[BigRational]) -> usize {
    let signs: Vec<bool> = c.iter().filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Inertia of a symmetric matrix from Descartes' rule, exact because every
/// root of its characteristic polynomial is real.
pub fn inertia(a: &[Vec<BigRational>]) -> (usize, usize, usize) {
    let c = char_poly(a);
    let zero = c.iter().take_while(|v| v.is_zero()).count();
    let c = &c[zero..];
    let pos = sign_changes(c);
    let flipped: Vec<BigRational> = c
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 1 { -v.clone() } else { v.clone() })
        .collect();
    (pos, sign_changes(&flipped), zero)
}

/// Determinant by cofactor expansion.
pub fn det(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut total = BigRational::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> = a[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &a[0][j] * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `k×k` minor of rows `r` and columns `c`.
pub fn minor(a: &[Vec<BigRational>], r: &[usize], c: &[usize]) -> BigRational {
    let sub: Vec<Vec<BigRational>> = r.iter().map(|&i| c.iter().map(|&j| a[i][j].clone()).collect()).collect();
    det(&sub)
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Gram matrix `Bᵀ G B` for integer data.
pub fn gram(g: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let (n, i) = (b.len(), b[0].len());
    (0..i)
        .map(|a| {
            (0..i)
                .map(|c| {
                    let mut s = BigRational::zero();
                    for x in 0..n {
                        for y in 0..n {
                            s += &b[x][a] * &g[x][y] * &b[y][c];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn diag(entries: &[i64]) -> Vec<Vec<BigRational>> {
    let n = entries.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { q(entries[i]) } else { q(0) }).collect()).collect()
}
