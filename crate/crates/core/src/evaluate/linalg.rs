//! Dense LU factorisation with partial pivoting, for the small systems that
//! policy evaluation produces.

use crate::error::{Error, Result};

pub struct Lu {
    n: usize,
    /// Row-major packed L (unit diagonal, below) and U (on/above diagonal).
    factors: Vec<f64>,
    perm: Vec<usize>,
    original: Vec<f64>,
}

impl Lu {
    /// Factorises the row-major `n x n` matrix `a`.
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut m = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
                .expect("non-empty range");
            if m[pivot * n + k].abs() <= f64::EPSILON * scale * n as f64 {
                return Err(Error::Singular);
            }
            if pivot != k {
                for c in 0..n {
                    m.swap(k * n + c, pivot * n + c);
                }
                perm.swap(k, pivot);
            }
            let d = m[k * n + k];
            for i in k + 1..n {
                let f = m[i * n + k] / d;
                m[i * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        m[i * n + c] -= f * m[k * n + c];
                    }
                }
            }
        }
        Ok(Lu {
            n,
            factors: m,
            perm,
            original: a.to_vec(),
        })
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.factors[i * n + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.factors[i * n + k] * x[k];
            }
            x[i] = s / self.factors[i * n + i];
        }
        x
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                b[i] - (0..n)
                    .map(|k| self.original[i * n + k] * x[k])
                    .sum::<f64>()
            })
            .collect()
    }

    /// Solves `A x = b`, refining until `‖b − Ax‖∞ ≤ tol` or a few rounds
    /// have passed. Returns the solution and its final residual norm.
    pub fn solve_refined(&self, b: &[f64], tol: f64) -> (Vec<f64>, f64) {
        let mut x = self.substitute(b);
        let mut norm = max_abs(&self.residual(&x, b));
        for _ in 0..4 {
            if norm <= tol {
                break;
            }
            let r = self.residual(&x, b);
            let dx = self.substitute(&r);
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let candidate_norm = max_abs(&self.residual(&candidate, b));
            if candidate_norm >= norm {
                break;
            }
            x = candidate;
            norm = candidate_norm;
        }
        (x, norm)
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Row-major `I − c·P`.
pub fn identity_minus(p: &[Vec<f64>], c: f64) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = f64::from(u8::from(i == j)) - c * p[i][j];
        }
    }
    a
}

/// Row-major `I − c·Pᵀ`.
pub fn identity_minus_transpose(p: &[Vec<f64>], c: f64) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = f64::from(u8::from(i == j)) - c * p[j][i];
        }
    }
    a
}
