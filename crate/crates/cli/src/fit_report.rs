//! Log-log slope summaries with pass/fail against a configured exponent tolerance.

use landau_core::fit::fit_power_law;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSeries {
    pub name: String,
    /// (lambda, measured)
    pub samples: Vec<(f64, f64)>,
    pub predicted: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub n: usize,
    pub slope: f64,
    pub predicted: f64,
    pub intercept: f64,
    pub residual: f64,
    pub half_width: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// A fit that could not be formed is reported, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    Fitted(FitSummary),
    Degenerate { name: String, reason: String },
}

impl FitOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, FitOutcome::Fitted(f) if f.passed)
    }
}

pub fn fit_one(series: &FitSeries) -> CliResult<FitSummary> {
    let mut samples = series.samples.clone();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let f = fit_power_law(&samples, series.predicted)?;
    Ok(FitSummary {
        name: series.name.clone(),
        n: samples.len(),
        slope: f.slope,
        predicted: f.predicted,
        intercept: f.intercept,
        residual: f.residual,
        half_width: f.half_width,
        tolerance: series.tolerance,
        passed: f.within(series.tolerance),
    })
}

pub fn fit_report(series: &[FitSeries]) -> CliResult<Vec<FitSummary>> {
    series.iter().map(fit_one).collect()
}

pub fn fit_or_flag(series: &FitSeries) -> FitOutcome {
    match fit_one(series) {
        Ok(f) => FitOutcome::Fitted(f),
        Err(e) => FitOutcome::Degenerate { name: series.name.clone(), reason: e.to_string() },
    }
}
