//! Small matrices over the graded scalar ring.

use super::{Parity, ScalarExpr};
use crate::{Error, Result};

pub type Matrix = Vec<Vec<ScalarExpr>>;

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Inverse `N` with `N * M = 1`, by Gauss-Jordan elimination using row
/// operations that multiply from the left only.
pub fn left_inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::NotInvertible("matrix is not square".into()));
    }
    let mut a = m.clone();
    let mut inv: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        ScalarExpr::one()
                    } else {
                        ScalarExpr::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].body().is_zero())
            .ok_or_else(|| Error::NotInvertible(format!("no invertible pivot in column {col}")))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].inverse()?;
        a[col] = a[col].iter().map(|e| &p * e).collect();
        inv[col] = inv[col].iter().map(|e| &p * e).collect();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in 0..n {
                let d = &f * &a[col][k];
                a[r][k] = &a[r][k] - &d;
                let d = &f * &inv[col][k];
                inv[r][k] = &inv[r][k] - &d;
            }
        }
    }
    Ok(inv)
}

/// Determinant of a matrix with even entries, by cofactor expansion.
pub fn determinant(m: &Matrix) -> ScalarExpr {
    let n = m.len();
    match n {
        0 => ScalarExpr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ScalarExpr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Matrix = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &determinant(&minor);
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}

/// Berezinian `det(A - B D^{-1} C) / det D` of an even supermatrix whose
/// rows and columns carry the given parities.
pub fn berezinian(m: &Matrix, rows: &[Parity], cols: &[Parity]) -> Result<ScalarExpr> {
    let pick = |ps: &[Parity], p: Parity| -> Vec<usize> {
        ps.iter()
            .enumerate()
            .filter(|(_, q)| **q == p)
            .map(|(i, _)| i)
            .collect()
    };
    let (re, ro) = (pick(rows, Parity::Even), pick(rows, Parity::Odd));
    let (ce, co) = (pick(cols, Parity::Even), pick(cols, Parity::Odd));
    if re.len() != ce.len() || ro.len() != co.len() {
        return Err(Error::NotInvertible("block sizes do not match".into()));
    }
    let block = |rs: &[usize], cs: &[usize]| -> Matrix {
        rs.iter()
            .map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect())
            .collect()
    };
    let a = block(&re, &ce);
    let b = block(&re, &co);
    let c = block(&ro, &ce);
    let d = block(&ro, &co);
    if d.is_empty() {
        return Ok(determinant(&a));
    }
    let dinv = left_inverse(&d)?;
    let bdc = mat_mul(&b, &mat_mul(&dinv, &c));
    let schur: Matrix = a
        .iter()
        .zip(&bdc)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect();
    determinant(&schur).div_ref(&determinant(&d))
}
