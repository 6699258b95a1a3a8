//! Numerical tolerances shared by the operations and their tests.
//!
//! Every threshold that decides pass/fail lives here so the checks in the
//! library, the unit tests and the acceptance suite read the same numbers.

/// Hermiticity check: `max |M_ij - conj(M_ji)|`.
pub const HERMITIAN: f64 = 1e-12;

/// Deviation of a normalized state from unit norm.
pub const UNIT_NORM: f64 = 1e-10;

/// SVD reconstruction, relative to `max(1, sigma_1)`, and orthonormality of the factors.
pub const SVD_RECONSTRUCTION: f64 = 1e-10;

/// Eigen-residual `||H u - lambda u||`, relative to `max(1, |lambda_max|)`.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Unitarity of propagators and dilations.
pub const UNITARY: f64 = 1e-10;

/// Largest admissible `sigma_{N+1}` of the augmented matrix.
pub const NULL_SINGULAR_VALUE: f64 = 1e-10;

/// Slack applied to every comparison of the interlacing chain.
pub const INTERLACING_SLACK: f64 = 1e-9;

/// Slack for the gap bound `Delta >= 1/kappa` and the norm bound on `sigma_1(C)`.
pub const SPECTRAL_BOUND: f64 = 1e-8;

/// Condition-number reproduction for generated instances (relative to `max(1, kappa)`).
pub const CONDITION_NUMBER: f64 = 1e-8;

/// Angle (radians) between `v_{N+1}` and the normalized `(x, -beta)`.
pub const THEOREM1_ANGLE: f64 = 1e-8;

/// Smallest singular value of `A` still treated as nonsingular.
pub const RANK_DEFICIENCY: f64 = 1e-12;

/// Smallest `|d1|` for which the solution decomposition is defined.
pub const DEGENERATE_D1: f64 = 1e-12;

/// Encoding error of an exact dilation.
pub const DILATION_ERROR: f64 = 1e-10;

/// Admissible overshoot of `||B / alpha||` above one (rounding only).
pub const NORMALIZATION_SLACK: f64 = 1e-12;

/// Sup-norm fit of the QSP scalar map to its target polynomial.
pub const PHASE_RESIDUAL: f64 = 1e-10;

/// Agreement between the QSP circuit and the direct polynomial application.
pub const QSP_VS_DIRECT: f64 = 1e-8;

/// Hard cap on the half-degree `k` of the filter polynomial.
pub const MAX_FILTER_HALF_DEGREE: usize = 10_000;

/// Post-selection starvation threshold on the acceptance rate `d0^2`.
pub const POST_SELECTION_FLOOR: f64 = 0.01;

/// Residual acceptance constant: `residual <= RESIDUAL_CONSTANT * epsilon`.
pub const RESIDUAL_CONSTANT: f64 = 5.0;

/// Target interval for `d0` and `d1` after beta calibration.
pub const CALIBRATED_AMPLITUDE_RANGE: (f64, f64) = (0.4, 0.8);
