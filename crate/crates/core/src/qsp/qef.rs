//! Projection of `|𝟏>` onto the zero-energy eigenvector of the dilation.

use serde::Serialize;

use super::apply::apply_qsp;
use super::filter::{apply_filter_matrix, build_filter, FilterReport};
use super::phases::solve_phases;
use crate::blockenc::{BlockEncoding, OracleCostModel, QueryCounts};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::problem::AugmentedSystem;
use crate::tolerances;

/// Filtered state after post-selection on the block ancilla.
#[derive(Clone, Debug, Serialize)]
pub struct QefResult {
    /// Normalized, in the `(2N + 1)`-dimensional dilation space.
    pub output_state: StateVector,
    pub success_probability: f64,
    pub fidelity_vs_target: f64,
    pub degree_used: usize,
    pub query_count: QueryCounts,
    pub filter: FilterReport,
    /// `||circuit output - direct polynomial output||`, when checked.
    pub oracle_deviation: Option<f64>,
    /// Set when the phase solve failed and the polynomial was applied directly.
    pub direct_fallback: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct QefOptions {
    /// Compare the circuit with the direct recurrence and fail on mismatch.
    pub verify_against_direct: bool,
}

impl Default for QefOptions {
    fn default() -> Self {
        Self {
            verify_against_direct: cfg!(test) || cfg!(debug_assertions),
        }
    }
}

/// Filters `|𝟏>` down to `|v_{N+1}>` with suppression `epsilon`, using the
/// certified gap `1 / (kappa alpha)` of `B / alpha`.
pub fn qef_solve(sys: &AugmentedSystem, epsilon: f64) -> Result<QefResult> {
    let mut cost = OracleCostModel::counter_only(sys.n() + 1);
    qef_solve_with(sys, epsilon, &mut cost, QefOptions::default())
}

pub fn qef_solve_with(
    sys: &AugmentedSystem,
    epsilon: f64,
    cost: &mut OracleCostModel,
    options: QefOptions,
) -> Result<QefResult> {
    let delta = sys.gap_lower_bound() / sys.alpha;
    let poly = build_filter(delta, epsilon)?;
    let h = sys.b.scale(1.0 / sys.alpha);
    let initial = sys.initial_state();
    let before = cost.counts();

    let (filtered, direct_fallback, oracle_deviation) = match solve_phases(&poly) {
        Ok(phases) => {
            let enc = BlockEncoding::dilate(&sys.b, sys.alpha)?;
            let out = apply_qsp(&enc, &phases, &initial, cost)?;
            let deviation = options
                .verify_against_direct
                .then(|| out.sub(&apply_filter_matrix(&h, &poly, &initial)).norm());
            if let Some(d) = deviation {
                if d > tolerances::QSP_VS_DIRECT {
                    return Err(Error::Numerical(format!(
                        "QSP output deviates from the direct filter by {d:e}"
                    )));
                }
            }
            (out, false, deviation)
        }
        Err(Error::PhaseSolve { .. }) => {
            cost.charge_block_encoding_use(poly.degree() as u64);
            (apply_filter_matrix(&h, &poly, &initial), true, None)
        }
        Err(e) => return Err(e),
    };

    let success_probability = filtered.norm_sqr().min(1.0);
    let output_state = filtered.normalized()?;
    let fidelity_vs_target = output_state.fidelity(&sys.target_state());
    let after = cost.counts();
    Ok(QefResult {
        output_state,
        success_probability,
        fidelity_vs_target,
        degree_used: poly.degree(),
        query_count: QueryCounts {
            o_c1: after.o_c1 - before.o_c1,
            o_c2: after.o_c2 - before.o_c2,
            o_b: after.o_b - before.o_b,
            o_b1: after.o_b1 - before.o_b1,
            alpha_model: after.alpha_model,
        },
        filter: poly.report(),
        oracle_deviation,
        direct_fallback,
    })
}
