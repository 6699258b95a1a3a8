//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! The columns of `W = M V` are orthogonalized pairwise by unitary plane
//! rotations accumulated into `V`. At convergence the column norms of `W` are
//! the singular values and the normalized columns are the left singular
//! vectors. `V` stays square, so for a wide `N x (N+1)` input its trailing
//! column spans the right null space.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `M = S diag(D) V^dagger` with `S` of size `m x r`, `D` of length
/// `r = min(m, n)`, and the full unitary `V` of size `n x n`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub left: ComplexMatrix,
    pub values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let r = self.values.len();
        let scaled = ComplexMatrix::from_fn(self.left.rows(), r, |i, j| {
            self.left[(i, j)] * self.values[j]
        });
        let v_thin = ComplexMatrix::from_fn(self.right.rows(), r, |i, j| self.right[(i, j)]);
        scaled.matmul(&v_thin.adjoint())
    }

    /// `sigma_1 / sigma_r`.
    pub fn condition_number(&self) -> f64 {
        let last = *self.values.last().unwrap_or(&0.0);
        self.values.first().copied().unwrap_or(0.0) / last
    }

    pub fn right_vector(&self, j: usize) -> Vec<C64> {
        self.right.column(j)
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    m.ensure_finite()?;

    // Column-major working copies: w[j] is column j of M V.
    let mut w: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|j| {
            let mut e = vec![ZERO; cols];
            e[j] = ONE;
            e
        })
        .collect();

    let tol = 2.0 * f64::EPSILON * rows.max(4) as f64;
    // Columns already at rounding level carry no direction worth rotating.
    let negligible = (f64::EPSILON * m.frobenius_norm()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                if rotate_pair(&mut w, &mut v, i, j, tol, negligible) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = w.iter().map(|c| col_norm(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let r = rows.min(cols);
    let values: Vec<f64> = order[..r].iter().map(|&j| norms[j]).collect();
    let mut right = ComplexMatrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        right.set_column(dst, &v[src]);
    }

    let scale = values
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(f64::MIN_POSITIVE);
    let mut left_cols: Vec<Vec<C64>> = Vec::with_capacity(r);
    for (k, &src) in order[..r].iter().enumerate() {
        if values[k] > scale * 1e-13 {
            let inv = 1.0 / values[k];
            left_cols.push(w[src].iter().map(|&z| z * inv).collect());
        } else {
            left_cols.push(orthonormal_complement(&left_cols, rows));
        }
    }
    let mut left = ComplexMatrix::zeros(rows, r);
    for (j, c) in left_cols.iter().enumerate() {
        left.set_column(j, c);
    }

    Ok(SvdResult {
        left,
        values,
        right,
    })
}

fn col_norm(c: &[C64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes columns `i` and `j`; returns whether a rotation was applied.
fn rotate_pair(
    w: &mut [Vec<C64>],
    v: &mut [Vec<C64>],
    i: usize,
    j: usize,
    tol: f64,
    negligible: f64,
) -> bool {
    let (alpha, beta, gamma) = {
        let (a, b) = (&w[i], &w[j]);
        let mut alpha = 0.0;
        let mut beta = 0.0;
        let mut gamma = ZERO;
        for (x, y) in a.iter().zip(b) {
            alpha += x.norm_sqr();
            beta += y.norm_sqr();
            gamma += x.conj() * y;
        }
        (alpha, beta, gamma)
    };
    let g = gamma.norm();
    if g == 0.0 || g <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
        return false;
    }
    // Rotate in the plane spanned by a_i and e^{-i arg(gamma)} a_j.
    let phase = gamma.conj() / g;
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let t = if zeta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    apply_rotation(w, i, j, c, s, phase);
    apply_rotation(v, i, j, c, s, phase);
    true
}

fn apply_rotation(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yp = *y * phase;
        let xi = *x;
        *x = xi * c - yp * s;
        *y = xi * s + yp * c;
    }
}

/// A unit vector orthogonal to every column in `basis`.
fn orthonormal_complement(basis: &[Vec<C64>], dim: usize) -> Vec<C64> {
    for k in 0..dim {
        let mut cand = vec![ZERO; dim];
        cand[k] = ONE;
        for _ in 0..2 {
            for b in basis {
                let proj: C64 = b.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                for (c, x) in cand.iter_mut().zip(b) {
                    *c -= proj * x;
                }
            }
        }
        let n = col_norm(&cand);
        if n > 1e-6 {
            return cand.into_iter().map(|z| z / n).collect();
        }
    }
    unreachable!("fewer basis vectors than dimensions always leaves a complement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::SVD_RECONSTRUCTION;

    fn check_invariants(m: &ComplexMatrix, s: &SvdResult) {
        let scale = s.values[0].max(1.0);
        assert!(s.reconstruct().max_abs_diff(m) <= SVD_RECONSTRUCTION * scale);
        assert!(s.left.unitarity_defect() <= SVD_RECONSTRUCTION);
        assert!(s.right.unitarity_defect() <= SVD_RECONSTRUCTION);
        assert!(s.values.windows(2).all(|p| p[0] >= p[1]));
        assert!(s.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn wide_matrix_has_null_right_vector() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let s = svd(&m).unwrap();
        check_invariants(&m, &s);
        assert!((s.values[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.values[1] - 1.0).abs() < 1e-14);
        let null = s.right_vector(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let overlap = null[0] * h - null[2] * h;
        assert!((overlap.norm() - 1.0).abs() < 1e-14);
        assert!(m.matvec(&null).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn identity_and_diagonal() {
        let s = svd(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0, 1.0]);
        let d =
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 2.0]]);
        let s = svd(&d).unwrap();
        assert_eq!(s.values, vec![3.0, 2.0, 1.0]);
        check_invariants(&d, &s);
    }

    #[test]
    fn tall_rank_deficient_matrix_gets_orthonormal_left_factor() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]]);
        let s = svd(&m).unwrap();
        check_invariants(&m, &s);
        assert!(s.values[1] < 1e-15);
    }

    #[test]
    fn complex_entries() {
        let m = ComplexMatrix::from_fn(3, 4, |i, j| {
            C64::new(
                (i * 3 + j) as f64 * 0.1 - 0.4,
                ((i + 2 * j) % 5) as f64 * 0.3,
            )
        });
        let s = svd(&m).unwrap();
        check_invariants(&m, &s);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(f64::INFINITY, 0.0);
        assert!(matches!(svd(&m), Err(Error::NonFinite { .. })));
    }
}
