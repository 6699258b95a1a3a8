//! Phase factors for even real polynomials.
//!
//! Newton's method runs in the `W_x` convention, where the scalar map is
//! `e^{iψ0 Z} ∏_j W(x) e^{iψ_j Z}` with `W(x) = [[x, i√(1-x²)], [i√(1-x²), x]]`
//! and symmetric phases `ψ_j = ψ_{d-j}`. The solved phases are then rewritten
//! for the reflection `R(x) = [[x, √(1-x²)], [√(1-x²), -x]]`, which is what
//! the one-ancilla dilation realizes on each eigenvalue of the encoded matrix.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::Serialize;

use super::filter::FilterPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{solve_real, C64, ONE, ZERO};
use crate::tolerances;

const MAX_NEWTON_ITERATIONS: usize = 60;
const NEWTON_TOLERANCE: f64 = 1e-14;
const STALL_LIMIT: usize = 6;

/// Phases `(φ_1, ..., φ_l)` in the reflection convention, so that
/// `Re <0| e^{iφ_1 Z} R e^{iφ_2 Z} R ... e^{iφ_l Z} R |0> = target(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseFactorSequence {
    pub phases: Vec<f64>,
    /// The symmetric `W_x`-convention phases `(ψ_0, ..., ψ_l)` they came from.
    pub symmetric_phases: Vec<f64>,
    #[serde(skip)]
    pub target: Option<FilterPolynomial>,
    /// Sup-norm misfit of the scalar map on a Chebyshev grid of `max(4l, 64)` points.
    pub residual: f64,
}

impl PhaseFactorSequence {
    pub fn degree(&self) -> usize {
        self.phases.len()
    }

    /// The empty sequence, realizing the constant 1.
    pub fn identity() -> Self {
        Self {
            phases: Vec::new(),
            symmetric_phases: Vec::new(),
            target: None,
            residual: 0.0,
        }
    }

    /// `<0|U_φ|0>` at `x`; its real part is the realized polynomial.
    pub fn response(&self, x: f64) -> C64 {
        reflection_response(&self.phases, x)
    }
}

/// Phases for the filter polynomial.
pub fn solve_phases(poly: &FilterPolynomial) -> Result<PhaseFactorSequence> {
    if poly.k == 0 {
        return Ok(PhaseFactorSequence {
            target: Some(poly.clone()),
            ..PhaseFactorSequence::identity()
        });
    }
    let mut seq = solve_even_polynomial(|x| poly.eval(x), poly.degree())?;
    seq.target = Some(poly.clone());
    Ok(seq)
}

/// Phases for any even real polynomial `f` of even `degree >= 2` with
/// `|f| <= 1` on `[-1, 1]`.
pub fn solve_even_polynomial(
    f: impl Fn(f64) -> f64 + Sync,
    degree: usize,
) -> Result<PhaseFactorSequence> {
    if degree % 2 == 1 {
        return Err(Error::Parity { degree });
    }
    if degree == 0 {
        return Err(Error::InvalidInput(
            "degree-0 targets have no phase sequence".into(),
        ));
    }
    let k = degree / 2;
    let unknowns = k + 1;
    let nodes: Vec<f64> = (1..=unknowns)
        .map(|i| (PI * (2 * i - 1) as f64 / (4 * unknowns) as f64).cos())
        .collect();
    let targets: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();

    let mut reduced = vec![0.0; unknowns];
    reduced[0] = FRAC_PI_4;
    let mut best = (f64::INFINITY, reduced.clone());
    let mut stalled = 0;
    let mut iterations = 0;
    while iterations < MAX_NEWTON_ITERATIONS {
        iterations += 1;
        let psi = expand_symmetric(&reduced, degree);
        let rows: Vec<(f64, Vec<f64>)> = nodes
            .par_iter()
            .zip(&targets)
            .map(|(&x, &t)| {
                let (value, grad) = value_and_gradient(&psi, x);
                let mut folded = vec![0.0; unknowns];
                for (j, g) in grad.iter().enumerate() {
                    folded[j.min(degree - j)] += g;
                }
                (value - t, folded)
            })
            .collect();
        let err = rows.iter().map(|(r, _)| r.abs()).fold(0.0, f64::max);
        if err < best.0 {
            best = (err, reduced.clone());
            stalled = 0;
        } else {
            stalled += 1;
        }
        if err < NEWTON_TOLERANCE || stalled >= STALL_LIMIT {
            break;
        }
        let jacobian: Vec<f64> = rows.iter().flat_map(|(_, g)| g.iter().copied()).collect();
        let residual: Vec<f64> = rows.iter().map(|(r, _)| *r).collect();
        let Ok(step) = solve_real(&jacobian, &residual) else {
            break;
        };
        for (p, s) in reduced.iter_mut().zip(&step) {
            *p -= s;
        }
    }

    let symmetric = expand_symmetric(&best.1, degree);
    let phases = to_reflection_phases(&symmetric);
    let grid = (4 * degree).max(64);
    let residual = (0..grid)
        .into_par_iter()
        .map(|j| {
            let x = (PI * (j as f64 + 0.5) / grid as f64).cos();
            (reflection_response(&phases, x).re - f(x)).abs()
        })
        .reduce(|| 0.0, f64::max);
    if residual > tolerances::PHASE_RESIDUAL {
        return Err(Error::PhaseSolve {
            residual,
            iterations,
        });
    }
    Ok(PhaseFactorSequence {
        phases,
        symmetric_phases: symmetric,
        target: None,
        residual,
    })
}

fn expand_symmetric(reduced: &[f64], degree: usize) -> Vec<f64> {
    (0..=degree).map(|j| reduced[j.min(degree - j)]).collect()
}

/// Rewrites symmetric `W_x` phases for the reflection convention.
///
/// `W(x) = i e^{-iπ/4 Z} R(x) e^{-iπ/4 Z}`, so adjacent quarter turns merge
/// into `-π/2` shifts, the global `i^l` becomes `+π` on the first phase when
/// `l/2` is odd, and the trailing phase folds into the first because both
/// act on `|0>` of the projected block.
fn to_reflection_phases(psi: &[f64]) -> Vec<f64> {
    let d = psi.len() - 1;
    let mut out = Vec::with_capacity(d);
    let global = if (d / 2) % 2 == 1 { PI } else { 0.0 };
    out.push(psi[0] + psi[d] - FRAC_PI_2 + global);
    out.extend(psi[1..d].iter().map(|p| p - FRAC_PI_2));
    out
}

/// `<0| e^{iφ_1 Z} R(x) ... e^{iφ_l Z} R(x) |0>`.
pub fn reflection_response(phases: &[f64], x: f64) -> C64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut row = [ONE, ZERO];
    for &phi in phases {
        let e = C64::from_polar(1.0, phi);
        let (a, b) = (row[0] * e, row[1] * e.conj());
        row = [a * x + b * s, a * s - b * x];
    }
    row[0]
}

/// `Re <0|U_W|0>` and its gradient with respect to each `ψ_j`.
fn value_and_gradient(psi: &[f64], x: f64) -> (f64, Vec<f64>) {
    let d = psi.len() - 1;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let is = C64::new(0.0, s);
    let phase: Vec<C64> = psi.iter().map(|&p| C64::from_polar(1.0, p)).collect();

    // prefix[j] = <0| (product before P_j)
    let mut prefix = Vec::with_capacity(d + 1);
    let mut row = [ONE, ZERO];
    for (j, e) in phase.iter().enumerate() {
        prefix.push(row);
        row = [row[0] * e, row[1] * e.conj()];
        if j < d {
            row = [row[0] * x + row[1] * is, row[0] * is + row[1] * x];
        }
    }
    let value = row[0].re;

    // suffix[j] = (product after P_j) |0>
    let mut suffix = vec![[ZERO; 2]; d + 1];
    let mut col = [ONE, ZERO];
    for j in (0..=d).rev() {
        suffix[j] = col;
        let e = phase[j];
        col = [e * col[0], e.conj() * col[1]];
        if j > 0 {
            col = [col[0] * x + col[1] * is, col[0] * is + col[1] * x];
        }
    }

    let i = C64::new(0.0, 1.0);
    let grad = (0..=d)
        .map(|j| {
            let (p, q, e) = (prefix[j], suffix[j], phase[j]);
            (p[0] * i * e * q[0] - p[1] * i * e.conj() * q[1]).re
        })
        .collect();
    (value, grad)
}
