//! Birman-Schwinger operator |V|^(1/2) R_0(z) V^(1/2) in the truncated Landau basis.
//!
//! With G the Galerkin matrix of |V| and D = diag(1/(lambda_k - z)), the operator norm
//! equals ||G^(1/2) D G^(1/2)|| (polar decomposition of |V|^(1/2) Phi); the sign of V
//! is a unitary factor and drops out of the norm.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::basis::angular_momentum;
use crate::cluster::assemble::{angular_blocks, check_support, galerkin_matrix, level_channels, AngularModes, Channel};
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::level::{distance_to_spectrum, BasisTruncation};
use crate::linalg::{diag_scale, hermitian_eigenvalues, psd_sqrt, spectral_norm, CMat};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirmanSchwinger {
    /// Norm of the operator on levels 0..=k_max.
    pub value: f64,
    /// sum over k_max < k <= 2 k_max + 1 of ||P_k |V| P_k|| / |lambda_k - z|
    pub tail_exact: f64,
    /// Extrapolated remainder beyond 2 k_max + 1 (n_k ~ lambda_k^(-1/2)); an estimate.
    pub tail_estimate: f64,
    pub k_max: u32,
}

impl BirmanSchwinger {
    pub fn tail(&self) -> f64 {
        self.tail_exact + self.tail_estimate
    }
}

/// G^(1/2) D G^(1/2) for one block.
pub fn bs_block(g: &CMat, d: &[c64]) -> Result<CMat> {
    let s = psd_sqrt(g)?;
    let sd = diag_scale(d, &s, &vec![c64::new(1.0, 0.0); d.len()]);
    Ok(&s * &sd)
}

pub(crate) fn resolvent_diag(channels: &[Channel], z: c64) -> Vec<c64> {
    channels.iter().map(|&(k, _)| 1.0 / (c64::new((2 * k + 1) as f64, 0.0) - z)).collect()
}

/// Blocks (channel subsets) and their |V| Galerkin matrices on levels 0..=k_max.
pub(crate) fn abs_galerkin_blocks(
    grid: &PolarGrid<f64>,
    v: &PotentialSpec,
    trunc: BasisTruncation,
) -> Result<Vec<(Vec<Channel>, CMat)>> {
    let abs: Vec<f64> = v.sample(grid)?.into_iter().map(f64::abs).collect();
    let modes = AngularModes::new(grid, &abs);
    let radial = modes.is_radial(1e-12);
    let channels = level_channels(0, trunc.k_max, trunc.m_max);
    let table = grid.radial_table(0, trunc.k_max, trunc.m_max)?;
    let blocks = if radial { angular_blocks(&channels) } else { vec![(0..channels.len()).collect()] };
    blocks
        .into_iter()
        .map(|b| {
            let ch: Vec<Channel> = b.iter().map(|&i| channels[i]).collect();
            let g = galerkin_matrix(grid, &table, &ch, &modes, radial)?;
            Ok((ch, g))
        })
        .collect()
}

/// n_k = ||P_k |V| P_k|| on channels m <= m_hi of level k; the radial table is evaluated
/// on the grid radii, which only need to resolve the support of V.
fn level_norm(grid: &PolarGrid<f64>, modes: &AngularModes, radial: bool, k: u32, m_hi: u32) -> Result<f64> {
    let quarter = (grid.n_theta() / 4) as i64;
    let channels: Vec<Channel> = (0..=m_hi)
        .map(|m| (k, m))
        .filter(|&(k, m)| radial || angular_momentum(k, m).abs() < quarter)
        .collect();
    let table = grid.radial_table(k, k, m_hi)?;
    let g = galerkin_matrix(grid, &table, &channels, modes, radial)?;
    if radial {
        Ok((0..channels.len()).map(|i| g[(i, i)].re).fold(0.0, f64::max))
    } else {
        Ok(hermitian_eigenvalues(&g)?.last().cloned().unwrap_or(0.0))
    }
}

pub fn birman_schwinger_norm(
    z: c64,
    v: &PotentialSpec,
    trunc: BasisTruncation,
    grid: &PolarGrid<f64>,
) -> Result<BirmanSchwinger> {
    if z.im == 0.0 && distance_to_spectrum(z.re) < 1e-12 {
        return Err(LandauError::OnSpectrum(z.re));
    }
    grid.require_calibrated(trunc.k_max, trunc.m_max)?;
    check_support(v, grid)?;
    let mut value = 0.0f64;
    for (ch, g) in abs_galerkin_blocks(grid, v, trunc)? {
        let d = resolvent_diag(&ch, z);
        value = value.max(spectral_norm(&bs_block(&g, &d)?)?);
    }

    let abs: Vec<f64> = v.sample(grid)?.into_iter().map(f64::abs).collect();
    let modes = AngularModes::new(grid, &abs);
    let radial = modes.is_radial(1e-12);
    let k_tail = 2 * trunc.k_max + 1;
    let mut tail_exact = 0.0;
    let mut last = 0.0;
    for k in trunc.k_max + 1..=k_tail {
        let n_k = level_norm(grid, &modes, radial, k, trunc.m_max + (k - trunc.k_max))?;
        let lam = (2 * k + 1) as f64;
        tail_exact += n_k / (c64::new(lam, 0.0) - z).norm();
        last = n_k;
    }
    let lam_t = (2 * k_tail + 1) as f64;
    let mut tail_estimate = 0.0;
    let n_sum = 100_000u32;
    for k in k_tail + 1..=k_tail + n_sum {
        let lam = (2 * k + 1) as f64;
        tail_estimate += last * (lam_t / lam).sqrt() / (c64::new(lam, 0.0) - z).norm();
    }
    let lam_n = (2 * (k_tail + n_sum) + 1) as f64;
    tail_estimate += last * lam_t.sqrt() * lam_n.powf(-0.5) * lam_n / (lam_n - z.norm());

    let out = BirmanSchwinger { value, tail_exact, tail_estimate, k_max: trunc.k_max };
    if out.tail() > 0.1 * value && out.tail() > 0.0 {
        return Err(LandauError::TailBound { tail: out.tail(), value });
    }
    Ok(out)
}
