//! Eigenstate filtering by quantum signal processing: the filter polynomial,
//! its phase factors, the simulated circuit, and the end-to-end projection
//! onto the null vector of the augmented system.

mod apply;
mod filter;
mod phases;
mod qef;

pub use apply::apply_qsp;
pub use filter::{
    apply_filter_matrix, build_filter, direct_filter_apply, eval_filter, grid_sup_error,
    FilterPolynomial, FilterReport,
};
pub use phases::{reflection_response, solve_even_polynomial, solve_phases, PhaseFactorSequence};
pub use qef::{qef_solve, qef_solve_with, QefOptions, QefResult};
