//! Lower bounds for ||P_k||_{q' -> q} by nonlinear power iteration.
//!
//! ||P_k||_{q'->q} = sup ||g||_q^2 / ||g||_2^2 over g in the range of P_k. The iteration
//! g -> P_k(|g|^(q-2) g), renormalized in L^2, never decreases ||g||_q / ||g||_2. It runs in
//! the span of phi_{k,m}, m <= M, a subspace of the range, so every iterate is a lower bound.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::RadialTable;
use crate::cluster::assemble::Channel;
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::laguerre::ln_factorial;
use crate::level::LevelIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjNormOptions {
    /// span is m <= k + m_extra
    pub m_extra: u32,
    pub tol: f64,
    pub max_iter: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for ProjNormOptions {
    fn default() -> Self {
        Self { m_extra: 16, tol: 1e-5, max_iter: 500, random_starts: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRun {
    pub start: String,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    #[serde(skip)]
    pub coefficients: Vec<c64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjNormEstimate {
    pub k: u32,
    pub q: f64,
    /// lower bound for ||P_k||_{q'->q}
    pub value: f64,
    /// flagged false when the best run hit the step cap
    pub converged: bool,
    pub best_start: String,
    pub runs: Vec<PowerRun>,
}

impl ProjNormEstimate {
    /// ||P_k||_{q'->2} = ||P_k||_{q'->q}^(1/2)
    pub fn q_prime_to_two(&self) -> f64 {
        self.value.sqrt()
    }
}

/// The span phi_{k,m}, m <= m_hi, on a polar grid.
pub struct LevelSpan<'g> {
    pub grid: &'g PolarGrid<f64>,
    pub k: u32,
    pub channels: Vec<Channel>,
    table: RadialTable<f64>,
}

impl<'g> LevelSpan<'g> {
    pub fn new(grid: &'g PolarGrid<f64>, k: u32, m_hi: u32) -> Result<Self> {
        grid.require_calibrated(k, m_hi)?;
        let table = grid.radial_table(k, k, m_hi)?;
        Ok(Self { grid, k, channels: (0..=m_hi).map(|m| (k, m)).collect(), table })
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn field(&self, c: &[c64]) -> Vec<c64> {
        self.grid.synthesize(c, &self.table, &self.channels).expect("span resolved by grid")
    }

    pub fn project(&self, f: &[c64]) -> Vec<c64> {
        self.grid.project(f, &self.table, &self.channels).expect("span resolved by grid")
    }

    pub fn index_of(&self, m: u32) -> usize {
        m as usize
    }
}

fn normalize(c: &mut [c64]) -> f64 {
    let n = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// ||g||_q^2 for unit coefficient vectors.
fn ratio(span: &LevelSpan, g: &[c64], q: f64) -> f64 {
    span.grid.lp_norm(g, q).powi(2)
}

/// Power iteration from `start` (need not be normalized).
pub fn power_iteration(span: &LevelSpan, q: f64, start: &[c64], label: &str, tol: f64, max_iter: usize) -> Result<PowerRun> {
    let mut c = start.to_vec();
    if normalize(&mut c) == 0.0 {
        return Err(LandauError::Degenerate("start vector has zero projection".into()));
    }
    let mut g = span.field(&c);
    let mut value = ratio(span, &g, q);
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let h: Vec<c64> = g.iter().map(|v| v * v.norm().powf(q - 2.0)).collect();
        let mut next = span.project(&h);
        if normalize(&mut next) == 0.0 {
            break;
        }
        let g_next = span.field(&next);
        let v_next = ratio(span, &g_next, q);
        let gain = (v_next - value) / value;
        c = next;
        g = g_next;
        value = v_next;
        history.push(value);
        if gain.abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(PowerRun { start: label.to_string(), value, iterations, converged, history, coefficients: c })
}

pub fn random_coefficients(n: usize, seed: u64) -> Vec<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| c64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Grid resolving the span m <= k + m_extra with enough angular nodes that |g|^q
/// (q even) and its projection are free of aliasing.
pub fn projnorm_grid(k: u32, m_extra: u32, q: f64, radial_density: f64) -> Result<PolarGrid<f64>> {
    let m_hi = k + m_extra;
    let band = (k + m_extra) as f64;
    let need = (q / 2.0 * band).ceil() as usize + 8;
    let n_theta = need.div_ceil(16) * 16;
    PolarGrid::for_basis(k, m_hi, radial_density, n_theta, 1e-8, crate::grid::DEFAULT_POINT_BUDGET)
}

/// Best of ring, zonal and seeded random starts.
pub fn projection_norm_estimate(
    k: LevelIndex,
    q: f64,
    grid: &PolarGrid<f64>,
    opts: &ProjNormOptions,
) -> Result<ProjNormEstimate> {
    k.require_planar()?;
    if !(q >= 2.0) || !q.is_finite() {
        return Err(LandauError::InvalidExponent(format!("q = {q} outside [2, inf)")));
    }
    let m_hi = k.k + opts.m_extra;
    let span = LevelSpan::new(grid, k.k, m_hi)?;
    let n = span.dim();
    let mut starts: Vec<(String, Vec<c64>)> = Vec::new();
    let unit = |m: u32| {
        let mut c = vec![c64::new(0.0, 0.0); n];
        c[m as usize] = c64::new(1.0, 0.0);
        c
    };
    starts.push(("ring".into(), unit(0)));
    if k.k != 0 {
        starts.push(("zonal".into(), unit(k.k)));
    }
    for i in 0..opts.random_starts {
        let seed = opts.seed.wrapping_add(i as u64);
        starts.push((format!("random:{seed}"), random_coefficients(n, seed)));
    }
    let mut runs = Vec::new();
    for (label, c) in starts {
        runs.push(power_iteration(&span, q, &c, &label, opts.tol, opts.max_iter)?);
    }
    let mut best = 0;
    for i in 1..runs.len() {
        if runs[i].value > runs[best].value * (1.0 + 1e-6) {
            best = i;
        }
    }
    Ok(ProjNormEstimate {
        k: k.k,
        q,
        value: runs[best].value,
        converged: runs[best].converged,
        best_start: runs[best].start.clone(),
        runs,
    })
}

/// ||phi_{k,0}||_q^2 in closed form:
/// ||phi_{k,0}||_q^q = (2 pi)^(1-q/2) (k!)^(-q/2) Gamma(kq/2 + 1) (q/2)^(-(kq/2 + 1)).
pub fn ring_norm_closed_form(k: u32, q: f64) -> f64 {
    let kf = k as f64;
    let a = kf * q / 2.0 + 1.0;
    let ln = (1.0 - q / 2.0) * (2.0 * std::f64::consts::PI).ln() - q / 2.0 * ln_factorial(k as u64)
        + statrs::function::gamma::ln_gamma(a)
        - a * (q / 2.0).ln();
    (ln * 2.0 / q).exp()
}

/// ||P_0||_{q'->q} attained by the Gaussian: (2 pi)^(-1) (4 pi / q)^(2/q).
pub fn lowest_level_norm(q: f64) -> f64 {
    (4.0 * std::f64::consts::PI / q).powf(2.0 / q) / (2.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_two_is_unit() {
        let g = projnorm_grid(3, 6, 2.0, 8.0).unwrap();
        let e = projection_norm_estimate(LevelIndex::planar(3), 2.0, &g, &ProjNormOptions { m_extra: 6, ..Default::default() }).unwrap();
        assert!((e.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lowest_level_matches_gaussian_extremizer() {
        let g = projnorm_grid(0, 12, 6.0, 8.0).unwrap();
        let opts = ProjNormOptions { m_extra: 12, random_starts: 2, ..Default::default() };
        let e = projection_norm_estimate(LevelIndex::planar(0), 6.0, &g, &opts).unwrap();
        let exact = lowest_level_norm(6.0);
        assert!((exact - 0.2036).abs() < 1e-4);
        assert!(e.value <= exact * (1.0 + 1e-8));
        assert!(e.value >= exact * (1.0 - 1e-3), "{} vs {exact}", e.value);
    }

    #[test]
    fn ring_is_fixed_point_with_closed_form_value() {
        for (k, q) in [(5u32, 4.0), (12, 6.0)] {
            let g = projnorm_grid(k, 8, q, 8.0).unwrap();
            let span = LevelSpan::new(&g, k, k + 8).unwrap();
            let mut c = vec![c64::new(0.0, 0.0); span.dim()];
            c[0] = c64::new(1.0, 0.0);
            let run = power_iteration(&span, q, &c, "ring", 1e-12, 5).unwrap();
            let exact = ring_norm_closed_form(k, q);
            assert!((run.history[0] - exact).abs() < 1e-9 * exact);
            assert!((run.value - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn iterates_nondecreasing() {
        let g = projnorm_grid(6, 10, 4.0, 8.0).unwrap();
        let span = LevelSpan::new(&g, 6, 16).unwrap();
        let run = power_iteration(&span, 4.0, &random_coefficients(span.dim(), 3), "r", 1e-9, 200).unwrap();
        assert!(run.history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(run.history.last().unwrap() > &run.history[0]);
    }
}
