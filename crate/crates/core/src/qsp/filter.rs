//! The Chebyshev eigenstate filter
//! `R_k(w; Δ) = T_k(-1 + 2(w² - Δ²)/(1 - Δ²)) / T_k(-1 - 2Δ²/(1 - Δ²))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cosh_ratio, ComplexMatrix, StateVector, C64};
use crate::problem::AugmentedSystem;
use crate::tolerances;

/// Degree-`2k` filter that is 1 at `w = 0` and at most `sup_error` in
/// magnitude on `Δ <= |w| <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterPolynomial {
    pub k: usize,
    pub delta: f64,
    /// Chebyshev coefficients in `w`, orders `0..=2k`; odd orders are zero.
    pub coeffs: Vec<f64>,
    pub sup_error: f64,
}

/// Summary exported with solver reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterReport {
    pub k: usize,
    pub delta: f64,
    pub sup_error: f64,
}

impl FilterPolynomial {
    /// The filter of half-degree `k` at gap `delta`.
    pub fn with_half_degree(k: usize, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            k,
            delta,
            coeffs: chebyshev_coefficients(k, delta),
            sup_error: grid_sup_error(k, delta),
        })
    }

    pub fn degree(&self) -> usize {
        2 * self.k
    }

    pub fn eval(&self, w: f64) -> f64 {
        eval_filter(self.k, self.delta, w)
    }

    /// Sum of the Chebyshev series; agrees with [`FilterPolynomial::eval`].
    pub fn eval_series(&self, w: f64) -> f64 {
        let theta = w.clamp(-1.0, 1.0).acos();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * (n as f64 * theta).cos())
            .sum()
    }

    pub fn report(&self) -> FilterReport {
        FilterReport {
            k: self.k,
            delta: self.delta,
            sup_error: self.sup_error,
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta = {delta}; need 0 < delta < 1"
        )));
    }
    Ok(())
}

/// Argument of `T_k` as a function of `w`.
fn chebyshev_argument(delta: f64, w: f64) -> f64 {
    let d2 = delta * delta;
    -1.0 + 2.0 * (w * w - d2) / (1.0 - d2)
}

/// `R_k(w; Δ)` evaluated as a ratio that never forms `T_k(y0)` itself.
pub fn eval_filter(k: usize, delta: f64, w: f64) -> f64 {
    if k == 0 || w == 0.0 {
        return 1.0;
    }
    let kf = k as f64;
    let y0 = chebyshev_argument(delta, 0.0);
    let theta0 = (-y0).acosh();
    let y = chebyshev_argument(delta, w);
    // T_k(y0) = (-1)^k cosh(k theta0)
    let denom_sign = if k % 2 == 1 { -1.0 } else { 1.0 };
    if y.abs() <= 1.0 {
        let inv_cosh = 2.0 * (-kf * theta0).exp() / (1.0 + (-2.0 * kf * theta0).exp());
        denom_sign * (kf * y.acos()).cos() * inv_cosh
    } else {
        let num_sign = if y < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        num_sign * denom_sign * cosh_ratio(kf * y.abs().acosh(), kf * theta0)
    }
}

/// `max |R_k|` over a grid on `[Δ, 1]` with about `10k` points per unit
/// length; both endpoints are included.
pub fn grid_sup_error(k: usize, delta: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let points = ((10.0 * k as f64 * (1.0 - delta)).ceil() as usize).max(16) + 1;
    (0..points)
        .map(|i| delta + (1.0 - delta) * i as f64 / (points - 1) as f64)
        .map(|w| eval_filter(k, delta, w).abs())
        .fold(0.0, f64::max)
}

/// Interpolates `R_k` at `2k + 1` Chebyshev nodes.
fn chebyshev_coefficients(k: usize, delta: f64) -> Vec<f64> {
    let m = 2 * k + 1;
    let nodes: Vec<f64> = (0..m)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
        .collect();
    let values: Vec<f64> = nodes
        .iter()
        .map(|t| eval_filter(k, delta, t.cos()))
        .collect();
    (0..m)
        .map(|n| {
            if n % 2 == 1 {
                return 0.0;
            }
            let s: f64 = nodes
                .iter()
                .zip(&values)
                .map(|(t, f)| f * (n as f64 * t).cos())
                .sum();
            let scale = if n == 0 { 1.0 } else { 2.0 };
            scale * s / m as f64
        })
        .collect()
}

/// Smallest half-degree whose grid-certified suppression reaches `epsilon`,
/// found by doubling and then bisection.
pub fn build_filter(delta: f64, epsilon: f64) -> Result<FilterPolynomial> {
    check_delta(delta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon}; need 0 < epsilon < 1"
        )));
    }
    let cap = tolerances::MAX_FILTER_HALF_DEGREE;
    let overflow = || Error::DegreeOverflow {
        cap,
        delta,
        epsilon,
    };
    let mut hi = 1usize;
    while grid_sup_error(hi, delta) > epsilon {
        if hi >= cap {
            return Err(overflow());
        }
        hi = (2 * hi).min(cap);
    }
    let mut lo = hi / 2; // fails, or is zero
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if grid_sup_error(mid, delta) <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    FilterPolynomial::with_half_degree(hi, delta)
}

/// `R_k(M; Δ) v` for Hermitian `M` with `||M|| <= 1`, by the three-term
/// recurrence normalized by `T_j(y0)` so no intermediate overflows.
pub fn apply_filter_matrix(
    m: &ComplexMatrix,
    poly: &FilterPolynomial,
    state: &StateVector,
) -> StateVector {
    let k = poly.k;
    if k == 0 {
        return state.clone();
    }
    let d2 = poly.delta * poly.delta;
    let scale = 2.0 / (1.0 - d2);
    let apply_y = |v: &[C64]| -> Vec<C64> {
        let mv = m.matvec(v);
        let mmv = m.matvec(&mv);
        v.iter()
            .zip(&mmv)
            .map(|(&x, &y)| -x + (y - x * d2) * scale)
            .collect()
    };
    let theta0 = (-chebyshev_argument(poly.delta, 0.0)).acosh();
    // rho_j = T_j(y0) / T_{j+1}(y0)
    let rho = |j: usize| -cosh_ratio(j as f64 * theta0, (j + 1) as f64 * theta0);

    let mut prev = state.amplitudes().to_vec();
    let mut cur: Vec<C64> = apply_y(&prev).into_iter().map(|z| z * rho(0)).collect();
    for j in 1..k {
        let (rj, rjm) = (rho(j), rho(j - 1));
        let next: Vec<C64> = apply_y(&cur)
            .into_iter()
            .zip(&prev)
            .map(|(y, &p)| y * (2.0 * rj) - p * (rj * rjm))
            .collect();
        prev = cur;
        cur = next;
    }
    StateVector::new(cur)
}

/// `R_k(B / alpha) v` on the dilation of `sys`, without any QSP circuit.
pub fn direct_filter_apply(
    sys: &AugmentedSystem,
    poly: &FilterPolynomial,
    state: &StateVector,
) -> StateVector {
    apply_filter_matrix(&sys.b.scale(1.0 / sys.alpha), poly, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::chebyshev_t;

    #[test]
    fn first_order_hand_formula() {
        let delta = 0.5;
        let p = FilterPolynomial::with_half_degree(1, delta).unwrap();
        for i in 0..=20 {
            let w = -1.0 + 0.1 * i as f64;
            let hand = (1.25 - 2.0 * w * w) / 1.25;
            assert!((p.eval(w) - hand).abs() < 1e-15, "w = {w}");
        }
        assert_eq!(p.eval(0.0), 1.0);
        assert!((p.eval(1.0) + 0.6).abs() < 1e-15);
        assert_eq!(p.coeffs.len(), 3);
        assert!(p.coeffs[1] == 0.0);
    }

    #[test]
    fn unit_at_origin_and_bounded_by_one() {
        for &delta in &[0.01, 0.1, 0.5, 0.9] {
            for k in [0, 1, 2, 7, 50, 400] {
                assert_eq!(eval_filter(k, delta, 0.0), 1.0);
                for i in 0..=400 {
                    let w = -1.0 + i as f64 / 200.0;
                    assert!(eval_filter(k, delta, w).abs() <= 1.0 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn matches_naive_ratio_at_low_degree() {
        let delta: f64 = 0.3;
        let y0 = -1.0 - 2.0 * delta * delta / (1.0 - delta * delta);
        for k in 0..12 {
            for i in 0..=50 {
                let w = i as f64 / 50.0;
                let y = -1.0 + 2.0 * (w * w - delta * delta) / (1.0 - delta * delta);
                let naive = chebyshev_t(k, y) / chebyshev_t(k, y0);
                assert!((eval_filter(k, delta, w) - naive).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn chebyshev_series_reproduces_filter() {
        let p = FilterPolynomial::with_half_degree(9, 0.2).unwrap();
        for i in 0..=64 {
            let w = -1.0 + i as f64 / 32.0;
            assert!((p.eval_series(w) - p.eval(w)).abs() < 1e-12);
        }
        assert!(p.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0));
    }

    #[test]
    fn sup_error_is_the_reciprocal_denominator() {
        let (k, delta) = (17, 0.15);
        let y0: f64 = -1.0 - 2.0 * delta * delta / (1.0 - delta * delta);
        let exact = 1.0 / (k as f64 * (-y0).acosh()).cosh();
        assert!((grid_sup_error(k, delta) - exact).abs() < 1e-15);
    }

    #[test]
    fn build_filter_is_minimal() {
        for &(delta, eps) in &[(0.1, 1e-3), (0.05, 1e-6), (0.5, 0.2)] {
            let p = build_filter(delta, eps).unwrap();
            assert!(p.sup_error <= eps);
            if p.k > 1 {
                assert!(grid_sup_error(p.k - 1, delta) > eps);
            }
        }
    }

    #[test]
    fn degree_overflow_reported() {
        assert!(matches!(
            build_filter(1e-6, 1e-12),
            Err(Error::DegreeOverflow { .. })
        ));
        assert!(build_filter(0.0, 0.1).is_err());
        assert!(build_filter(0.5, 1.5).is_err());
    }

    #[test]
    fn matrix_filter_acts_on_eigenvalues() {
        let lambdas = [0.0, 0.3, -0.3, 0.9, -1.0];
        let m = ComplexMatrix::from_diagonal(&lambdas.map(|l| C64::new(l, 0.0)));
        let p = FilterPolynomial::with_half_degree(40, 0.25).unwrap();
        let out = apply_filter_matrix(&m, &p, &StateVector::from_real(&[1.0; 5]));
        for (i, l) in lambdas.iter().enumerate() {
            assert!((out.amplitudes()[i].re - p.eval(*l)).abs() < 1e-13);
        }
    }
}
