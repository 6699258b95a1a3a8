//! Hermitian eigendecomposition (cyclic complex Jacobi) and the unitary
//! propagator `exp(-i M t)` built from it.

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::tolerances::HERMITIAN;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigResult {
    pub fn vector(&self, j: usize) -> StateVector {
        StateVector::new(self.vectors.column(j))
    }

    /// `max_j ||H u_j - lambda_j u_j||`.
    pub fn max_residual(&self, h: &ComplexMatrix) -> f64 {
        (0..self.values.len())
            .map(|j| {
                let u = self.vectors.column(j);
                h.matvec(&u)
                    .iter()
                    .zip(&u)
                    .map(|(hu, x)| (hu - x * self.values[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `sum_j f(lambda_j) u_j u_j^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * weights[k] * u[(j, k)].conj())
                .sum()
        })
    }
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigResult> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    m.ensure_finite()?;
    m.ensure_hermitian(HERMITIAN)?;

    let n = m.rows();
    // Symmetrize exactly so rounding in the input cannot bias the result.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);

    let threshold = f64::EPSILON * (n.max(2) as f64) * a.frobenius_norm();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence {
            routine: "Hermitian Jacobi eigensolver",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(EigResult { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zeroes `a[p][q]` with `a <- J^dagger a J`, `v <- v J`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if g < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    // Phase e^{-i phi} on q makes the pivot real; then a real Jacobi rotation.
    let phase = apq.conj() / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J_pp = c, J_pq = s, J_qp = -s phase, J_qq = c phase.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase * (-s);
    let jqq = phase * c;

    let n = a.rows();
    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * jpp + y * jqp;
        a[(i, q)] = x * jpq + y * jqq;
    }
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = jpp.conj() * x + jqp.conj() * y;
        a[(q, j)] = jpq.conj() * x + jqq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for i in 0..n {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = x * jpp + y * jqp;
        v[(i, q)] = x * jpq + y * jqq;
    }
}

/// Cached eigendata of a Hermitian generator for repeated evolution.
#[derive(Clone, Debug)]
pub struct HermitianEvolver {
    eig: EigResult,
}

impl HermitianEvolver {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            eig: eig_hermitian(m)?,
        })
    }

    pub fn from_eig(eig: EigResult) -> Self {
        Self { eig }
    }

    pub fn eig(&self) -> &EigResult {
        &self.eig
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.eig.map_spectrum(|l| C64::from_polar(1.0, -l * t))
    }

    /// `exp(-i M t) psi` in `O(n^2)`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> StateVector {
        let u = &self.eig.vectors;
        let coeffs = u.adjoint_matvec(psi.amplitudes());
        let rotated: Vec<C64> = coeffs
            .iter()
            .zip(&self.eig.values)
            .map(|(&c, &l)| c * C64::from_polar(1.0, -l * t))
            .collect();
        StateVector::new(u.matvec(&rotated))
    }
}

/// `exp(-i M t)` for Hermitian `M`.
pub fn expm_i(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(HermitianEvolver::new(m)?.propagator(t))
}
