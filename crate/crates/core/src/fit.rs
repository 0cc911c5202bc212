//! Log-log least squares with a Student-t confidence half-width on the slope.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LandauError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// (lambda, measured) pairs
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log residuals
    pub residual: f64,
    pub predicted: f64,
    /// 95% half-width on the slope
    pub half_width: f64,
}

impl ScalingFit {
    pub fn within(&self, tol: f64) -> bool {
        (self.slope - self.predicted).abs() <= tol
    }

    /// Recompute from the stored samples.
    pub fn refit(&self) -> Result<ScalingFit> {
        fit_power_law(&self.samples, self.predicted)
    }
}

/// Fits log(measured) = intercept + slope * log(lambda).
pub fn fit_power_law(samples: &[(f64, f64)], predicted: f64) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(LandauError::Degenerate(format!("{} samples, need at least 4", samples.len())));
    }
    if samples.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(LandauError::Degenerate("non-positive or non-finite sample".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 1e-300 {
        return Err(LandauError::Degenerate("all abscissae equal".into()));
    }
    if syy == 0.0 {
        return Err(LandauError::Degenerate("constant samples".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let residual = (sse / n).sqrt();
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| LandauError::Degenerate(format!("{e}")))?
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        residual,
        predicted,
        half_width: t * se,
    })
}
