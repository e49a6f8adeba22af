//! Small dense exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn rank_int(rows: &[Vec<BigInt>]) -> usize {
    rank(&to_rat(rows))
}

pub fn to_rat(rows: &[Vec<BigInt>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().cloned().map(Rational::from_integer).collect())
        .collect()
}

/// Basis of the right null space {x : M x = 0}, where `cols` is the row length
/// (needed when `rows` is empty).
pub fn kernel(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Determinant of a square integer matrix (Bareiss fraction-free elimination).
pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn det_i128(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let p = (k + 1..n).find(|&i| a[i][k] != 0)?;
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j]
                    .checked_mul(a[k][k])?
                    .checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    Some(sign * a[n - 1][n - 1])
}

fn small(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    use num_traits::ToPrimitive;
    rows.iter()
        .map(|r| r.iter().map(|x| x.to_i64().map(i128::from)).collect())
        .collect()
}

/// Primitive normal of the hyperplane spanned by `dim - 1` integer vectors,
/// or `None` if they are dependent. Uses signed cofactors, in machine
/// integers when the entries are small.
pub fn hyperplane_normal(rows: &[Vec<BigInt>], dim: usize) -> Option<Vec<BigInt>> {
    debug_assert_eq!(rows.len() + 1, dim);
    let fast = small(rows).and_then(|m| {
        let mut out = Vec::with_capacity(dim);
        for j in 0..dim {
            let minor: Vec<Vec<i128>> = m
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let d = det_i128(minor)?;
            out.push(if j % 2 == 0 { d } else { -d });
        }
        Some(out)
    });
    let v: Vec<BigInt> = match fast {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => (0..dim)
            .map(|j| {
                let minor: Vec<Vec<BigInt>> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let d = det_int(&minor);
                if j % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .collect(),
    };
    if v.iter().all(Zero::is_zero) {
        return None;
    }
    Some(super::rational::primitive_int(&v))
}

pub fn abs_det_int(m: &[Vec<BigInt>]) -> BigInt {
    det_int(m).abs()
}

/// Solves the square system A x = b; `None` if A is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.iter().map(|r| r[n].clone()).collect())
}

/// Inverse of a square rational matrix.
pub fn inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}
