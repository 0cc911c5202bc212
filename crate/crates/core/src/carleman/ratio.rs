//! ||e^{tau x_d} u||_{L^6(R^3)} / ||e^{tau x_d} H_0 u||_{L^{6/5}(R^3)} on the product of a
//! polar grid and the axial grid.
//!
//! Per-slice planar norms do not depend on tau, so a sweep computes them once and only
//! reweights. The weight is applied as e^{tau (x_d - M)}, M the endpoint of I where it
//! peaks, so nothing overflows; e^{tau M} cancels in the ratio.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleman::{is_admissible, resonance_distance};
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::resolvent3d::{AxialGrid, LayeredFunction};

const P_LHS: f64 = 6.0;
const P_RHS: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanRatio {
    pub tau: f64,
    /// ||e^{tau (x_d - M)} u||_6
    pub lhs: f64,
    /// ||e^{tau (x_d - M)} H_0 u||_{6/5}
    pub rhs: f64,
    pub ratio: f64,
    /// M
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanRow {
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanSweep {
    pub rows: Vec<CarlemanRow>,
    /// max ratio over admissible tau: the empirical C_I
    pub c_i: f64,
    pub argmax_tau: f64,
}

/// Planar ||u(., x_j)||_6^6 and ||H_0 u(., x_j)||_{6/5}^{6/5} per axial node.
struct SliceNorms {
    nodes: Vec<f64>,
    h: f64,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    interval: (f64, f64),
}

fn slice_powers(grid: &PolarGrid<f64>, f: &LayeredFunction, p: f64) -> Result<Vec<f64>> {
    let k_max = f.channels.iter().map(|c| c.0).max().unwrap_or(0);
    let m_max = f.channels.iter().map(|c| c.1).max().unwrap_or(0);
    grid.require_calibrated(k_max, m_max)?;
    let table = grid.radial_table(0, k_max, m_max)?;
    (0..f.axial.n)
        .map(|j| {
            let coef: Vec<c64> = f.data.iter().map(|r| r[j]).collect();
            if coef.iter().all(|c| *c == c64::new(0.0, 0.0)) {
                return Ok(0.0);
            }
            let s = grid.synthesize(&coef, &table, &f.channels)?;
            Ok(grid.lp_norm(&s, p).powf(p))
        })
        .collect()
}

fn check_support(u: &LayeredFunction, interval: (f64, f64)) -> Result<()> {
    if !(interval.0 < interval.1) {
        return Err(LandauError::InvalidInput(format!("interval {interval:?}")));
    }
    let peak = u.data.iter().flatten().fold(0.0f64, |a, c| a.max(c.norm()));
    if peak == 0.0 {
        return Err(LandauError::Degenerate("u = 0".into()));
    }
    let h = u.axial.h();
    for r in &u.data {
        for (j, c) in r.iter().enumerate() {
            let t = u.axial.node(j);
            let outside = t < interval.0 - 1e-12 * h || t > interval.1 + 1e-12 * h;
            if (outside || j == 0 || j + 1 == r.len()) && c.norm() > 1e-12 * peak {
                return Err(LandauError::InvalidInput(format!("u not supported in {interval:?} inside the axial window (node {t})")));
            }
        }
    }
    Ok(())
}

impl SliceNorms {
    fn new(u: &LayeredFunction, grid: &PolarGrid<f64>, interval: (f64, f64)) -> Result<Self> {
        check_support(u, interval)?;
        let hu = u.apply_h0_minus(c64::new(0.0, 0.0));
        Ok(Self {
            nodes: u.axial.nodes(),
            h: u.axial.h(),
            lhs: slice_powers(grid, u, P_LHS)?,
            rhs: slice_powers(grid, &hu, P_RHS)?,
            interval,
        })
    }

    fn ratio(&self, tau: f64) -> Result<CarlemanRatio> {
        let shift = if tau >= 0.0 { self.interval.1 } else { self.interval.0 };
        let weighted = |pw: &[f64], p: f64| {
            let s: f64 = self.nodes.iter().zip(pw).map(|(&t, &v)| (p * tau * (t - shift)).exp() * v).sum();
            (s * self.h).powf(1.0 / p)
        };
        let lhs = weighted(&self.lhs, P_LHS);
        let rhs = weighted(&self.rhs, P_RHS);
        if !(rhs >= 1e-12) {
            return Err(LandauError::Degenerate(format!("weighted ||H_0 u||_(6/5) = {rhs:.3e} below 1e-12")));
        }
        Ok(CarlemanRatio { tau, lhs, rhs, ratio: lhs / rhs, shift })
    }
}

/// Three-dimensional ratio (d = 3, planar n = 1).
pub fn carleman_ratio(u: &LayeredFunction, tau: f64, grid: &PolarGrid<f64>, interval: (f64, f64)) -> Result<CarlemanRatio> {
    SliceNorms::new(u, grid, interval)?.ratio(tau)
}

pub fn carleman_sweep(u: &LayeredFunction, taus: &[f64], grid: &PolarGrid<f64>, interval: (f64, f64)) -> Result<CarlemanSweep> {
    let norms = SliceNorms::new(u, grid, interval)?;
    let rows: Vec<CarlemanRow> = taus
        .par_iter()
        .map(|&tau| {
            let r = norms.ratio(tau)?;
            Ok(CarlemanRow { tau, lhs: r.lhs, rhs: r.rhs, ratio: r.ratio, admissible: is_admissible(tau, 1) })
        })
        .collect::<Result<_>>()?;
    let mut best: Option<&CarlemanRow> = None;
    for r in rows.iter().filter(|r| r.admissible) {
        if best.is_none_or(|b| r.ratio > b.ratio) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| LandauError::InvalidInput("no admissible tau in the sweep".into()))?;
    Ok(CarlemanSweep { c_i: best.ratio, argmax_tau: best.tau, rows })
}

/// C^infinity step: 0 for s <= 0, 1 for s >= 1.
pub fn smooth_step(s: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = f(s);
    let b = f(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Plateau on `interval` with smooth edges of width `edge`.
pub fn plateau(x: f64, interval: (f64, f64), edge: f64) -> f64 {
    smooth_step((x - interval.0) / edge) * smooth_step((interval.1 - x) / edge)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub tau: f64,
    pub dist: f64,
    pub ratio: f64,
    pub admissible: bool,
}

/// Ratio for u = e^{-tau x_d} p(x_d) phi_{k,0}, p a plateau on I, as tau^2 approaches
/// 2k + 1 from above (tau^2 = 2k + 1 + delta). For tau = omega_k the conjugated operator
/// on this channel is -d^2 + 2 tau d, which nearly annihilates the plateau.
pub fn resonance_probe(
    k: u32,
    deltas: &[f64],
    grid: &PolarGrid<f64>,
    interval: (f64, f64),
    edge: f64,
    h: f64,
) -> Result<Vec<ProbeRow>> {
    let pad = 4.0 * h;
    let axial = AxialGrid::with_spacing(interval.0.abs().max(interval.1.abs()) + pad, h)?;
    deltas
        .iter()
        .map(|&delta| {
            let tau = ((2 * k + 1) as f64 + delta).sqrt();
            let shift = interval.1;
            let u = LayeredFunction::separable(vec![(k, 0)], &[c64::new(1.0, 0.0)], axial.clone(), |x| {
                (-tau * (x - shift)).exp() * plateau(x, interval, edge)
            });
            let r = carleman_ratio(&u, tau, grid, interval)?;
            Ok(ProbeRow { tau, dist: resonance_distance(tau, 1), ratio: r.ratio, admissible: is_admissible(tau, 1) })
        })
        .collect()
}
