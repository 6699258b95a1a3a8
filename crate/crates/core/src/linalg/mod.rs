//! Dense complex linear algebra: SVD, Hermitian eigendecomposition, unitary
//! propagators, Chebyshev evaluation and direct solves.

mod chebyshev;
mod eigen;
mod matrix;
mod solve;
mod state;
mod svd;

pub use chebyshev::{chebyshev_t, cosh_ratio};
pub use eigen::{eig_hermitian, expm_i, EigResult, HermitianEvolver};
pub use matrix::{ComplexMatrix, C64, ONE, ZERO};
pub use solve::{solve_complex, solve_real};
pub use state::StateVector;
pub use svd::{svd, SvdResult};
