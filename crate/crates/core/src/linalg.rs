//! Small dense linear algebra over a [`Scalar`] backend.

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

/// LU factorization with partial pivoting chosen by `pivot_score`.
struct Lu<S> {
    a: Matrix<S>,
    perm: Vec<usize>,
    sign: i64,
}

fn factor<S: Scalar>(m: &Matrix<S>) -> Result<Lu<S>> {
    let n = m.len();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1;
    for k in 0..n {
        let (p, score) = (k..n)
            .map(|i| (i, a[i][k].pivot_score()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if score <= 0.0 {
            return Err(CoreError::DegenerateMetric(format!("singular matrix (column {k})")));
        }
        if p != k {
            a.swap(p, k);
            perm.swap(p, k);
            sign = -sign;
        }
        let inv = a[k][k].try_recip()?;
        for i in k + 1..n {
            if a[i][k].is_identically_zero() {
                continue;
            }
            let f = a[i][k].clone() * &inv;
            for j in k + 1..n {
                let t = f.clone() * &a[k][j];
                a[i][j] = a[i][j].clone() - &t;
            }
            a[i][k] = f;
        }
    }
    Ok(Lu { a, perm, sign })
}

pub fn det<S: Scalar>(m: &Matrix<S>) -> Result<S> {
    let lu = match factor(m) {
        Ok(lu) => lu,
        Err(CoreError::DegenerateMetric(_)) => return Ok(m[0][0].zero_like()),
        Err(e) => return Err(e),
    };
    let mut d = lu.a[0][0].int_like(lu.sign);
    for k in 0..m.len() {
        d = d * &lu.a[k][k];
    }
    Ok(d)
}

pub fn inverse<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let n = m.len();
    let lu = factor(m)?;
    let zero = m[0][0].zero_like();
    let mut out = vec![vec![zero.clone(); n]; n];
    let diag_inv: Vec<S> = (0..n).map(|k| lu.a[k][k].try_recip()).collect::<Result<_>>()?;
    for col in 0..n {
        // solve L z = P e_col, then U x = z
        let mut z: Vec<S> = (0..n).map(|i| zero.int_like((lu.perm[i] == col) as i64)).collect();
        for i in 0..n {
            for j in 0..i {
                if !lu.a[i][j].is_identically_zero() {
                    z[i] = z[i].clone() - &(lu.a[i][j].clone() * &z[j]);
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                if !lu.a[i][j].is_identically_zero() {
                    z[i] = z[i].clone() - &(lu.a[i][j].clone() * &z[j]);
                }
            }
            z[i] = z[i].clone() * &diag_inv[i];
        }
        for i in 0..n {
            out[i][col] = z[i].clone();
        }
    }
    Ok(out)
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let p = b[0].len();
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut acc = a[i][0].clone() * &b[0][j];
                    for k in 1..b.len() {
                        acc = acc + &(a[i][k].clone() * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `Σ_j m_ij v^j`.
pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| {
            let mut acc = row[0].clone() * &v[0];
            for j in 1..v.len() {
                acc = acc + &(row[j].clone() * &v[j]);
            }
            acc
        })
        .collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].clone() * &b[0];
    for i in 1..a.len() {
        acc = acc + &(a[i].clone() * &b[i]);
    }
    acc
}

/// Float matrix of primal values.
pub fn values<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|v| v.value()).collect()).collect()
}
