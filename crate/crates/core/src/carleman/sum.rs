//! sum_k (1 + 2k)^(-1/d) |m_tau(t, k)| against 1 + |t|^(2/d - 1).
//!
//! Beyond omega_K > |tau| the terms decrease in k and
//!   sum_{k > K} <= (1 + 2K)^(-1/d) int_{omega_K}^inf e^{-(omega - |tau|)|t|} d omega
//!              = (1 + 2K)^(-1/d) e^{-(omega_K - |tau|)|t|} / |t|.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleman::multiplier::{frequency, multiplier_omega};
use crate::carleman::check_tau;
use crate::error::{LandauError, Result};

/// Tail allowance relative to the normaliser 1 + |t|^(2/d - 1).
pub const MULT_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSum {
    pub t: f64,
    pub tau: f64,
    pub d: u32,
    pub value: f64,
    pub ratio: f64,
    pub k_max: u32,
    pub tail_bound: f64,
}

fn tail(t: f64, tau: f64, d: u32, n: u32, k: u32) -> f64 {
    let w = frequency(k, n);
    if w <= tau.abs() {
        return f64::INFINITY;
    }
    (1.0 + 2.0 * k as f64).powf(-1.0 / d as f64) * (-(w - tau.abs()) * t.abs()).exp() / t.abs()
}

fn default_k_max(t: f64, tau: f64, n: u32, den: f64) -> u32 {
    let gap = (1.0 / (MULT_TAIL_TOL * den * t.abs())).ln().max(0.0) / t.abs();
    let w = tau.abs() + 1.0 + gap;
    (((w * w - n as f64) / 2.0).ceil().max(1.0)) as u32
}

pub fn multiplier_sum_check(t: f64, tau: f64, d: u32, k_max: Option<u32>) -> Result<MultiplierSum> {
    if d < 3 || d % 2 == 0 {
        return Err(LandauError::UnsupportedDimension(d));
    }
    let n = (d - 1) / 2;
    check_tau(tau, n)?;
    if t == 0.0 || !t.is_finite() {
        return Err(LandauError::InvalidInput(format!("t = {t}: the sum diverges at t = 0")));
    }
    let den = 1.0 + t.abs().powf(2.0 / d as f64 - 1.0);
    let k_max = k_max.unwrap_or_else(|| default_k_max(t, tau, n, den));
    let tail_bound = tail(t, tau, d, n, k_max);
    if !(tail_bound <= MULT_TAIL_TOL * den) {
        return Err(LandauError::TailBound { tail: tail_bound, value: den });
    }
    let inv_d = -1.0 / d as f64;
    let value: f64 = (0..=k_max)
        .rev()
        .map(|k| (1.0 + 2.0 * k as f64).powf(inv_d) * multiplier_omega(t, tau, frequency(k, n)).abs())
        .sum();
    Ok(MultiplierSum { t, tau, d, value, ratio: value / den, k_max, tail_bound })
}

/// Every (tau, t) pair, in row-major order.
pub fn multiplier_sum_sweep(taus: &[f64], ts: &[f64], d: u32) -> Result<Vec<MultiplierSum>> {
    let pts: Vec<(f64, f64)> = taus.iter().flat_map(|&a| ts.iter().map(move |&t| (a, t))).collect();
    pts.par_iter().map(|&(tau, t)| multiplier_sum_check(t, tau, d, None)).collect()
}
