//! Dense direct solves by Gaussian elimination with partial pivoting.

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Solves `A x = b` for square complex `A`.
pub fn solve_complex(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::InvalidInput(format!(
            "cannot solve a {}x{} system with a right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m: Vec<C64> = a.data().to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .expect("non-empty pivot range");
        if m[pivot * n + col].norm() == 0.0 {
            return Err(Error::RankDeficient { sigma_min: 0.0 });
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let inv = 1.0 / m[col * n + col];
        for row in (col + 1)..n {
            let factor = m[row * n + col] * inv;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[row * n + k] -= factor * v;
            }
            let xc = x[col];
            x[row] -= factor * xc;
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}

/// Solves `J x = r` for a square real matrix given row-major.
pub fn solve_real(j: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    let n = r.len();
    if j.len() != n * n {
        return Err(Error::InvalidInput("real system shape mismatch".into()));
    }
    let mut m = j.to_vec();
    let mut x = r.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs()))
            .expect("non-empty pivot range");
        if m[pivot * n + col] == 0.0 {
            return Err(Error::RankDeficient { sigma_min: 0.0 });
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let inv = 1.0 / m[col * n + col];
        let (head, tail) = m.split_at_mut((col + 1) * n);
        let pivot_row = &head[col * n..];
        for (offset, row) in tail.chunks_mut(n).enumerate() {
            let factor = row[col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                row[k] -= factor * pivot_row[k];
            }
            x[col + 1 + offset] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}
