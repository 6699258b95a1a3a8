/// Chebyshev polynomial of the first kind, `T_k(y)`.
///
/// Inside `[-1, 1]` this is `cos(k arccos y)`; outside it switches to the
/// hyperbolic branch `sign(y)^k cosh(k arccosh |y|)`, which stays accurate
/// where the three-term recurrence would overflow or lose digits.
pub fn chebyshev_t(k: usize, y: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if y.abs() <= 1.0 {
        (k as f64 * y.acos()).cos()
    } else {
        let magnitude = (k as f64 * y.abs().acosh()).cosh();
        if y < 0.0 && k % 2 == 1 {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// `cosh(x) / cosh(y)` for `x, y >= 0` without overflow.
pub fn cosh_ratio(x: f64, y: f64) -> f64 {
    debug_assert!(x >= 0.0 && y >= 0.0);
    (x - y).exp() * (1.0 + (-2.0 * x).exp()) / (1.0 + (-2.0 * y).exp())
}
