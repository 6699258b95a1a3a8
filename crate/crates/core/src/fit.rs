//! Ordinary least-squares fits used by the scaling experiments.

use serde::Serialize;

use crate::error::{Error, Result};

/// `y ≈ slope·x + intercept` with the coefficient of determination.
///
/// `r_squared` is always `1 - SS_res / SS_tot` with `SS_tot` taken about the
/// mean of `y`, also for fits forced through the origin. That is the stricter
/// of the two conventions in use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "fit needs two equal-length series with at least 2 points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "fit data contains non-finite values".into(),
        ));
    }
    Ok(())
}

fn r_squared(x: &[f64], y: &[f64], slope: f64, intercept: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        };
    }
    1.0 - ss_res / ss_tot
}

/// Least squares for `y = slope·x`.
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check(x, y)?;
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all abscissae are zero".into()));
    }
    let slope = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx;
    Ok(LinearFit {
        slope,
        intercept: 0.0,
        r_squared: r_squared(x, y, slope, 0.0),
    })
}

/// Least squares for `y = slope·x + intercept`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("abscissae have zero spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: r_squared(x, y, slope, intercept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines_have_unit_r_squared() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let f = fit_through_origin(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-14 && (f.r_squared - 1.0).abs() < 1e-14);
        let y: Vec<f64> = x.iter().map(|v| -v + 7.0).collect();
        let f = fit_linear(&x, &y).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-14 && (f.intercept - 7.0).abs() < 1e-13);
        assert!((f.predict(10.0) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_origin_fit() {
        // slope = (1*1 + 2*3) / (1 + 4) = 7/5; mean y = 2, SS_tot = 2,
        // SS_res = (1 - 1.4)^2 + (3 - 2.8)^2 = 0.2
        let f = fit_through_origin(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!((f.slope - 1.4).abs() < 1e-15);
        assert!((f.r_squared - 0.9).abs() < 1e-14);
    }

    #[test]
    fn offset_data_penalizes_origin_fit() {
        let x = [1.0, 2.0, 3.0];
        let y = [10.0, 11.0, 12.0];
        assert!(fit_through_origin(&x, &y).unwrap().r_squared < 0.0);
        assert!((fit_linear(&x, &y).unwrap().r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(fit_linear(&[1.0], &[1.0]).is_err());
        assert!(fit_linear(&[2.0, 2.0], &[1.0, 3.0]).is_err());
        assert!(fit_through_origin(&[0.0, 0.0], &[1.0, 3.0]).is_err());
        assert!(fit_through_origin(&[1.0, 2.0], &[1.0]).is_err());
    }
}
