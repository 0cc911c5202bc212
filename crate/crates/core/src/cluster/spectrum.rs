use faer::c64;
use serde::{Deserialize, Serialize};

use crate::cluster::assemble::{angular_blocks, check_support, galerkin_matrix, level_channels, AngularModes, Channel};
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::level::{distance_to_spectrum, BasisTruncation, LevelIndex};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::potential::PotentialSpec;

/// Largest Galerkin block diagonalized densely.
pub const DEFAULT_DIM_CAP: usize = 4000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k0: u32,
    /// Real eigenvalues (V is real, so H is self-adjoint) with |E - lambda_k0| <= 1.
    pub eigenvalues: Vec<f64>,
    /// Set for eigenvalues sitting on the boundary of the cluster set (included).
    pub on_boundary: Vec<bool>,
    /// max dist(E, {2k+1}) over the reported eigenvalues
    pub delta_max: f64,
    pub window: u32,
    pub dimension: usize,
    pub bound_rhs: Option<f64>,
    pub margin: Option<f64>,
}

impl ClusterReport {
    /// Attaches C ||V||_r lambda^nu and the margin against delta_max.
    pub fn with_bound(mut self, c: f64, v_norm: f64, nu: f64) -> Self {
        let lam = (2 * self.k0 + 1) as f64;
        let rhs = c * v_norm * lam.powf(nu);
        self.bound_rhs = Some(rhs);
        self.margin = Some(rhs - self.delta_max);
        self
    }
}

/// All eigenvalues of diag(lambda_k) + V on the channels, using the angular-momentum
/// block structure when V is radial.
pub fn galerkin_eigenvalues(
    grid: &PolarGrid<f64>,
    channels: &[Channel],
    v: &PotentialSpec,
    dim_cap: usize,
) -> Result<Vec<f64>> {
    let k_lo = channels.iter().map(|c| c.0).min().unwrap_or(0);
    let k_hi = channels.iter().map(|c| c.0).max().unwrap_or(0);
    let m_max = channels.iter().map(|c| c.1).max().unwrap_or(0);
    let table = grid.radial_table(k_lo, k_hi, m_max)?;
    let samples = v.sample(grid)?;
    let modes = AngularModes::new(grid, &samples);
    let radial = modes.is_radial(1e-12);
    let blocks: Vec<Vec<usize>> = if radial { angular_blocks(channels) } else { vec![(0..channels.len()).collect()] };
    let mut out = Vec::with_capacity(channels.len());
    for block in blocks {
        if block.len() > dim_cap {
            return Err(LandauError::DimensionCap { dim: block.len(), cap: dim_cap });
        }
        let ch: Vec<Channel> = block.iter().map(|&i| channels[i]).collect();
        let mut h: CMat = galerkin_matrix(grid, &table, &ch, &modes, radial)?;
        for (i, &(k, _)) in ch.iter().enumerate() {
            h[(i, i)] += c64::new((2 * k + 1) as f64, 0.0);
        }
        let n = h.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)] == c64::new(0.0, 0.0)));
        if diagonal {
            out.extend((0..n).map(|i| h[(i, i)].re));
        } else {
            out.extend(hermitian_eigenvalues(&h)?);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Eigenvalues of H = H_0 + V truncated to levels k0-window..=k0+window and
/// m <= trunc.m_max, restricted to the cluster set |E - lambda_k0| <= 1.
pub fn cluster_spectrum(
    k0: LevelIndex,
    v: &PotentialSpec,
    trunc: BasisTruncation,
    grid: &PolarGrid<f64>,
    window: u32,
) -> Result<ClusterReport> {
    cluster_spectrum_capped(k0, v, trunc, grid, window, DEFAULT_DIM_CAP)
}

pub fn cluster_spectrum_capped(
    k0: LevelIndex,
    v: &PotentialSpec,
    trunc: BasisTruncation,
    grid: &PolarGrid<f64>,
    window: u32,
    dim_cap: usize,
) -> Result<ClusterReport> {
    k0.require_planar()?;
    if window > k0.k {
        return Err(LandauError::InvalidInput(format!("window {window} reaches below level 0 from k0 = {}", k0.k)));
    }
    let k_hi = k0.k + window;
    grid.require_calibrated(k_hi, trunc.m_max)?;
    check_support(v, grid)?;
    let channels = level_channels(k0.k - window, k_hi, trunc.m_max);
    let all = galerkin_eigenvalues(grid, &channels, v, dim_cap)?;
    let lam = k0.eigenvalue();
    let edge_tol = 1e-12;
    let mut eigenvalues = Vec::new();
    let mut on_boundary = Vec::new();
    for e in all {
        let d = (e - lam).abs();
        if d <= 1.0 + edge_tol {
            eigenvalues.push(e);
            on_boundary.push((d - 1.0).abs() <= edge_tol);
        }
    }
    let delta_max = eigenvalues.iter().map(|&e| distance_to_spectrum(e)).fold(0.0, f64::max);
    Ok(ClusterReport {
        k0: k0.k,
        eigenvalues,
        on_boundary,
        delta_max,
        window,
        dimension: channels.len(),
        bound_rhs: None,
        margin: None,
    })
}
