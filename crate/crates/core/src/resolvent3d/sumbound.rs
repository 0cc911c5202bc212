//! The level sum sum_k lambda_k^rho(q) e^(-Im sqrt(z - lambda_k) |t|) / |z - lambda_k|^(1/2)
//! against |t|^(-1-2 rho) + k0^rho (k0^(1/2) + delta(z)^(-1/2)), d = 3.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::exponent::rho;
use crate::quadrature::gauss_legendre_on;
use crate::resolvent3d::kernel::sqrt_upper;
use crate::resolvent3d::threshold;

pub const SUM_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSum {
    pub value: f64,
    pub k_max: u32,
    /// bound on the omitted terms k > k_max
    pub tail_bound: f64,
}

/// Nearest level to Re z.
fn nearest_level(z: c64) -> u32 {
    ((z.re - 1.0) / 2.0).round().max(0.0) as u32
}

/// For k > K with lambda_K > Re z: Im sqrt(w) >= sqrt((lambda_k - Re z)/2) and lambda_k^rho
/// <= lambda_K^rho, so the tail is at most the integral
/// lambda_K^rho sqrt(2)/|t| e^(-|t| sqrt((lambda_K - Re z)/2)).
fn tail_bound(t: f64, z: c64, rho_q: f64, k: u32) -> f64 {
    let lam = threshold(k);
    if lam <= z.re {
        return f64::INFINITY;
    }
    lam.powf(rho_q) * std::f64::consts::SQRT_2 / t.abs() * (-t.abs() * ((lam - z.re) / 2.0).sqrt()).exp()
}

/// Smallest K (at least 2 k0 + 50) whose tail bound is below `tol`.
fn k_for_tail(t: f64, z: c64, rho_q: f64, tol: f64) -> Result<u32> {
    let k0 = nearest_level(z);
    let c = t.abs() / std::f64::consts::SQRT_2;
    // ignore lambda^rho <= 1 when solving, then confirm
    let u = ((std::f64::consts::SQRT_2 / (t.abs() * tol)).ln() / c).max(0.0);
    let k_star = ((z.re + 2.0 * u * u - 1.0) / 2.0).ceil().max(0.0);
    if k_star > 2e8 {
        return Err(LandauError::TailBound { tail: tol, value: k_star });
    }
    let mut k = (k_star as u32).max(2 * k0 + 50);
    while tail_bound(t, z, rho_q, k) > tol {
        k = k.saturating_mul(2);
    }
    Ok(k)
}

/// Relative change of the summand per unit k beyond which the remaining terms are summed
/// by the midpoint Euler-Maclaurin rule instead of one by one.
const SMOOTH_RATE: f64 = 0.02;
/// Fewer smooth terms than this are cheaper to add directly.
const MIN_SMOOTH_TERMS: u32 = 4096;

/// The summand at a real index x (lambda = 2x + 1).
fn summand(t: f64, z: c64, rho_q: f64, x: f64) -> Result<f64> {
    let lam = 2.0 * x + 1.0;
    let w = z - lam;
    Ok(lam.powf(rho_q) * (-sqrt_upper(w)?.im * t.abs()).exp() / w.norm().sqrt())
}

fn direct_sum(t: f64, z: c64, rho_q: f64, lo: u32, hi: u32) -> Result<f64> {
    // compensated summation: up to ~10^7 terms of widely varying size
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in lo..=hi {
        let y = summand(t, z, rho_q, k as f64)? - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    Ok(sum)
}

/// First k from which the summand changes by at most SMOOTH_RATE per step. With
/// g = lambda - Re z the log-derivative in k is at most |t|/sqrt(g) + 3/g.
fn smooth_from(t: f64, z: c64) -> u32 {
    let gap = (2.0 * t.abs() / SMOOTH_RATE).powi(2).max(6.0 / SMOOTH_RATE);
    ((z.re + gap - 1.0) / 2.0).ceil().max(0.0) as u32
}

/// sum_{k=a}^{b} f(k) as the integral over [a - 1/2, b + 1/2] minus (f'(b + 1/2) -
/// f'(a - 1/2))/24; the remainder is O(r^4) relative for a per-step rate r. The integral
/// runs in s = sqrt(lambda - Re z), where the exponential factor is close to e^(-|t| s).
fn smooth_sum(t: f64, z: c64, rho_q: f64, a: u32, b: u32) -> Result<f64> {
    let (xa, xb) = (a as f64 - 0.5, b as f64 + 0.5);
    let s_of = |x: f64| (2.0 * x + 1.0 - z.re).sqrt();
    let (sa, sb) = (s_of(xa), s_of(xb));
    let mut integral = 0.0;
    let mut lo = sa;
    while lo < sb {
        let hi = (lo + (1.0 / t.abs()).min(0.25 * lo)).min(sb);
        let (nodes, weights) = gauss_legendre_on(16, lo, hi);
        for (s, w) in nodes.iter().zip(&weights) {
            let x = 0.5 * (s * s + z.re - 1.0);
            integral += w * s * summand(t, z, rho_q, x)?;
        }
        lo = hi;
    }
    let fprime = |x: f64| -> Result<f64> { Ok(summand(t, z, rho_q, x + 0.5)? - summand(t, z, rho_q, x - 0.5)?) };
    Ok(integral - (fprime(xb)? - fprime(xa)?) / 24.0)
}

/// Sum over k <= k_max (chosen from the tail bound when None).
pub fn kernel_sum_lhs(t: f64, z: c64, q: f64, k_max: Option<u32>) -> Result<KernelSum> {
    if t == 0.0 || !t.is_finite() {
        return Err(LandauError::InvalidInput("kernel sum needs t != 0".into()));
    }
    if z.im == 0.0 || !(z.im.abs() < 1.0) {
        return Err(LandauError::InvalidInput(format!("z = {z} outside 0 < |Im z| < 1")));
    }
    let rho_q = rho(3, q)?;
    let k_max = match k_max {
        Some(k) => k,
        None => k_for_tail(t, z, rho_q, SUM_TAIL_TOL)?,
    };
    let tail = tail_bound(t, z, rho_q, k_max);
    if !(tail <= SUM_TAIL_TOL) {
        return Err(LandauError::TailBound { tail, value: f64::NAN });
    }
    let k1 = smooth_from(t, z);
    let value = if k_max > k1.saturating_add(MIN_SMOOTH_TERMS) {
        direct_sum(t, z, rho_q, 0, k1)? + smooth_sum(t, z, rho_q, k1 + 1, k_max)?
    } else {
        direct_sum(t, z, rho_q, 0, k_max)?
    };
    Ok(KernelSum { value, k_max, tail_bound: tail })
}

/// delta(z) = distance from z to the thresholds.
pub fn spectral_distance(z: c64) -> f64 {
    let k = nearest_level(z);
    let mut d = (z - threshold(k)).norm();
    if k > 0 {
        d = d.min((z - threshold(k - 1)).norm());
    }
    d.min((z - threshold(k + 1)).norm())
}

pub fn kernel_sum_rhs(t: f64, z: c64, q: f64, k0: u32) -> Result<f64> {
    let rho_q = rho(3, q)?;
    let k0f = (k0.max(1)) as f64;
    Ok(t.abs().powf(-1.0 - 2.0 * rho_q) + k0f.powf(rho_q) * (k0f.sqrt() + spectral_distance(z).powf(-0.5)))
}

/// z = lambda_k0 + delta e^(i theta): |Im z| = delta sin(theta) in (0, 1), delta(z) = delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumLattice {
    pub qs: Vec<f64>,
    pub k0s: Vec<u32>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub deltas: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl Default for SumLattice {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            qs: vec![3.0, 4.0, 5.0],
            k0s: vec![5, 10, 20, 40],
            t_min: 0.01,
            t_max: 10.0,
            t_count: 7,
            deltas: vec![0.1, 0.5, 1.0],
            thetas: vec![PI / 6.0, PI / 3.0, 2.0 * PI / 3.0],
        }
    }
}

impl SumLattice {
    pub fn ts(&self) -> Vec<f64> {
        if self.t_count == 1 {
            return vec![self.t_min];
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.t_count).map(|i| (a + (b - a) * i as f64 / (self.t_count - 1) as f64).exp()).collect()
    }

    /// Twice as many t samples (the old ones included) and one new angle per gap in theta,
    /// a third of the way along so pi/2 (|Im z| = delta) is never hit.
    pub fn refined(&self) -> Self {
        let mut thetas = self.thetas.clone();
        for w in self.thetas.windows(2) {
            thetas.push((2.0 * w[0] + w[1]) / 3.0);
        }
        thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { t_count: 2 * self.t_count - 1, thetas, ..self.clone() }
    }

    pub fn points(&self) -> Vec<SumSample> {
        let mut out = Vec::new();
        for &q in &self.qs {
            for &k0 in &self.k0s {
                for &t in &self.ts() {
                    for &delta in &self.deltas {
                        for &theta in &self.thetas {
                            let z = c64::new(threshold(k0), 0.0) + c64::from_polar(delta, theta);
                            out.push(SumSample { q, k0, t, delta, theta, z_re: z.re, z_im: z.im, lhs: 0.0, rhs: 0.0, ratio: 0.0 });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumSample {
    pub q: f64,
    pub k0: u32,
    pub t: f64,
    pub delta: f64,
    pub theta: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumCheck {
    pub max_ratio: f64,
    pub argmax: SumSample,
    pub samples: Vec<SumSample>,
}

pub fn kernel_sum_check(lattice: &SumLattice) -> Result<SumCheck> {
    let samples: Vec<Result<SumSample>> = lattice
        .points()
        .into_par_iter()
        .map(|mut s| {
            let z = c64::new(s.z_re, s.z_im);
            s.lhs = kernel_sum_lhs(s.t, z, s.q, None)?.value;
            s.rhs = kernel_sum_rhs(s.t, z, s.q, s.k0)?;
            s.ratio = s.lhs / s.rhs;
            Ok(s)
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let argmax = samples
        .iter()
        .cloned()
        .fold(None::<SumSample>, |b, s| match b {
            Some(b) if b.ratio >= s.ratio => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| LandauError::InvalidInput("empty lattice".into()))?;
    Ok(SumCheck { max_ratio: argmax.ratio, argmax, samples })
}
