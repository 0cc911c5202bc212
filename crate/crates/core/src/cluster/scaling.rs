//! k0 sweeps of cluster widths: upper mode (fixed V, calibrated C) and sharp mode
//! (per-k0 extremal V with ||V||_r = 1, certified and fitted against nu(r)).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::extremal::{extremal_potential_search, ExtremalOptions, ExtremalResult};
use crate::cluster::sharpness::{sharpness_certificate, SharpnessCertificate};
use crate::cluster::spectrum::{cluster_spectrum, ClusterReport};
use crate::error::{LandauError, Result};
use crate::exponent::nu;
use crate::fit::{fit_power_law, ScalingFit};
use crate::grid::{PolarGrid, DEFAULT_POINT_BUDGET};
use crate::level::{BasisTruncation, LevelIndex};
use crate::potential::PotentialSpec;

/// How grids and truncations scale with k0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    /// radial Gauss-Legendre nodes per unit length
    pub radial_density: f64,
    /// neighboring levels per side in the Galerkin space
    pub window: u32,
    /// angular channels kept beyond m = k0 (levels k0 +- window)
    pub m_extra: u32,
    pub calib_tol: f64,
    pub budget: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { radial_density: 8.0, window: 2, m_extra: 16, calib_tol: 1e-8, budget: DEFAULT_POINT_BUDGET }
    }
}

impl GridPolicy {
    pub fn truncation(&self, k0: u32) -> BasisTruncation {
        BasisTruncation::new(k0 + self.window, k0 + self.m_extra + self.window)
    }

    pub fn with_window(&self, window: u32) -> Self {
        Self { window, ..self.clone() }
    }

    /// Angular nodes for a non-radial W built from level k0: |g|^q for the power step and
    /// W^2 Fourier modes up to the full channel band must both be alias-free.
    pub fn sharp_n_theta(&self, k0: u32, q: f64) -> usize {
        let span = (k0 + self.m_extra) as f64;
        let t = self.truncation(k0);
        let band = (t.m_max + 2 * self.window) as f64 + k0 as f64;
        let need = (q / 2.0 * span).max(2.0 * span + band).ceil() as usize + 8;
        need.div_ceil(16) * 16
    }

    pub fn sharp_grid(&self, k0: u32, q: f64) -> Result<PolarGrid<f64>> {
        let t = self.truncation(k0);
        PolarGrid::for_basis(t.k_max, t.m_max, self.radial_density, self.sharp_n_theta(k0, q), self.calib_tol, self.budget)
    }

    /// Radial potentials only couple equal angular momenta, so few angular nodes suffice.
    pub fn radial_grid(&self, k0: u32) -> Result<PolarGrid<f64>> {
        let t = self.truncation(k0);
        PolarGrid::for_basis(t.k_max, t.m_max, self.radial_density, 16, self.calib_tol, self.budget)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperSweep {
    pub reports: Vec<ClusterReport>,
    pub v_norm: f64,
    pub nu: f64,
    /// calibrated on the smallest k0
    pub c: f64,
    /// the same calibration with the Galerkin window doubled
    pub c_window_doubled: f64,
    pub k_cal: u32,
    pub holds_all: bool,
    /// smallest k0 from which every later report has margin >= 0
    pub k_from: Option<u32>,
    /// max relative width change when the window is doubled
    pub window_change: f64,
    pub fit: Option<ScalingFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpSweep {
    pub r: f64,
    pub nu: f64,
    pub extremal: Vec<ExtremalResult>,
    pub certificates: Vec<SharpnessCertificate>,
    pub window_change: f64,
    pub all_certified: bool,
    pub fit: ScalingFit,
}

fn sorted_levels(k0_list: &[u32], window: u32) -> Result<Vec<u32>> {
    let mut ks = k0_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 4 {
        return Err(LandauError::Degenerate(format!("{} sweep points, need at least 4", ks.len())));
    }
    if ks[0] < 2 * window {
        return Err(LandauError::InvalidInput(format!("k0 = {} too small for window doubling from {window}", ks[0])));
    }
    Ok(ks)
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn upper_sweep(k0_list: &[u32], v: &PotentialSpec, policy: &GridPolicy) -> Result<UpperSweep> {
    v.validate()?;
    let ks = sorted_levels(k0_list, policy.window)?;
    let wide = policy.with_window(2 * policy.window);
    let grid_for = |p: &GridPolicy, k0: u32| if v.is_radial() { p.radial_grid(k0) } else { p.sharp_grid(k0, 2.0) };
    let runs: Vec<Result<(ClusterReport, f64, f64, f64)>> = ks
        .par_iter()
        .map(|&k0| {
            let g = grid_for(&wide, k0)?;
            let base = cluster_spectrum(LevelIndex::planar(k0), v, policy.truncation(k0), &g, policy.window)?;
            let doubled = cluster_spectrum(LevelIndex::planar(k0), v, wide.truncation(k0), &g, wide.window)?;
            let change = relative_change(base.delta_max, doubled.delta_max);
            Ok((base, change, v.lr_norm(&g)?, doubled.delta_max))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let nu_r = nu(2, v.r)?;
    let v_norm = runs[0].2;
    let lam0 = (2 * ks[0] + 1) as f64;
    let c = if v_norm > 0.0 { runs[0].0.delta_max / (v_norm * lam0.powf(nu_r)) } else { 0.0 };
    let c_window_doubled = if v_norm > 0.0 { runs[0].3 / (v_norm * lam0.powf(nu_r)) } else { 0.0 };
    let reports: Vec<ClusterReport> = runs.iter().map(|(r, _, _, _)| r.clone().with_bound(c, v_norm, nu_r)).collect();
    let ok: Vec<bool> = reports.iter().map(|r| r.margin.unwrap() >= -1e-12 * r.bound_rhs.unwrap().abs().max(1e-300)).collect();
    let holds_all = ok.iter().all(|&b| b);
    let k_from = (0..ks.len()).find(|&i| ok[i..].iter().all(|&b| b)).map(|i| ks[i]);
    let window_change = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let samples: Vec<(f64, f64)> = reports.iter().map(|r| ((2 * r.k0 + 1) as f64, r.delta_max)).collect();
    Ok(UpperSweep {
        reports,
        v_norm,
        nu: nu_r,
        c,
        c_window_doubled,
        k_cal: ks[0],
        holds_all,
        k_from,
        window_change,
        fit: fit_power_law(&samples, nu_r).ok(),
    })
}

pub fn sharp_sweep(k0_list: &[u32], r: f64, policy: &GridPolicy, opts: &ExtremalOptions) -> Result<SharpSweep> {
    let ks = sorted_levels(k0_list, policy.window)?;
    let q = 2.0 * r / (r - 1.0);
    let opts = ExtremalOptions { m_extra: policy.m_extra, ..opts.clone() };
    let runs: Vec<Result<(ExtremalResult, SharpnessCertificate, f64)>> = ks
        .par_iter()
        .map(|&k0| {
            let wide = policy.with_window(2 * policy.window);
            let g = wide.sharp_grid(k0, q)?;
            let e = extremal_potential_search(LevelIndex::planar(k0), r, &g, &opts)?;
            let v = e.spec.clone().expect("search stores its potential");
            let cert = sharpness_certificate(LevelIndex::planar(k0), &v, &g, policy.truncation(k0), policy.window)?;
            let doubled = cluster_spectrum(LevelIndex::planar(k0), &v, wide.truncation(k0), &g, wide.window)?;
            let change = relative_change(cert.width, doubled.delta_max);
            Ok((e, cert, change))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let nu_r = nu(2, r)?;
    let samples: Vec<(f64, f64)> = runs.iter().map(|(_, c, _)| ((2 * c.k0 + 1) as f64, c.width)).collect();
    let fit = fit_power_law(&samples, nu_r)?;
    let window_change = runs.iter().map(|x| x.2).fold(0.0, f64::max);
    let all_certified = runs.iter().all(|x| x.1.passed);
    let (extremal, certificates) = runs.into_iter().map(|(e, c, _)| (e, c)).unzip();
    Ok(SharpSweep { r, nu: nu_r, extremal, certificates, window_change, all_certified, fit })
}

/// Width fit for either mode; the sweep records carry the full detail.
pub fn width_scaling_experiment(k0_list: &[u32], mode: &WidthMode, policy: &GridPolicy) -> Result<ScalingFit> {
    match mode {
        WidthMode::Upper { potential } => {
            let s = upper_sweep(k0_list, potential, policy)?;
            let samples: Vec<(f64, f64)> = s.reports.iter().map(|r| ((2 * r.k0 + 1) as f64, r.delta_max)).collect();
            fit_power_law(&samples, s.nu)
        }
        WidthMode::Sharp { r, options } => Ok(sharp_sweep(k0_list, *r, policy, options)?.fit),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WidthMode {
    Upper { potential: PotentialSpec },
    Sharp { r: f64, options: ExtremalOptions },
}
