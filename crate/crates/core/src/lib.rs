//! Classical simulation of two eigenstate-based linear-system solvers.
//!
//! A linear system `A x = b` is rewritten as the null right singular vector of
//! the augmented matrix `C = (A | b / beta)`, which is the zero-energy
//! eigenvector of the Hermitian dilation `B = [[0, C], [C^dagger, 0]]`. Two
//! routes prepare that eigenvector from the basis state `|1> = (0, ..., 0, 1)`:
//!
//! * [`qsp`]: a Chebyshev eigenstate filter applied through quantum signal
//!   processing on a block-encoding of `B`;
//! * [`qrt`]: a probe qubit driven at resonance with the zero-energy
//!   transition of `B`.
//!
//! [`driver`] ties both to the two-phase `beta` calibration and to solution
//! extraction, and [`fit`] provides the scaling fits used by the sweeps.

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockenc;
pub mod driver;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod problem;
pub mod qrt;
pub mod qsp;
pub mod tolerances;

pub use error::{Error, Result};
