//! Galerkin matrices <phi_a, V phi_b> of a sampled potential in the Landau basis.

use faer::{c64, Mat};

use crate::basis::{angular_momentum, RadialTable};
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::level::{BasisTruncation, LevelIndex};
use crate::linalg::CMat;
use crate::potential::PotentialSpec;

/// (level k, angular index m)
pub type Channel = (u32, u32);

/// Channels k_lo..=k_hi, m = 0..=m_max, level-major.
pub fn level_channels(k_lo: u32, k_hi: u32, m_max: u32) -> Vec<Channel> {
    (k_lo..=k_hi).flat_map(|k| (0..=m_max).map(move |m| (k, m))).collect()
}

/// Indices of `channels` grouped by angular momentum (ascending l).
pub fn angular_blocks(channels: &[Channel]) -> Vec<Vec<usize>> {
    let mut keyed: Vec<(i64, usize)> = channels
        .iter()
        .enumerate()
        .map(|(i, &(k, m))| (angular_momentum(k, m), i))
        .collect();
    keyed.sort();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for (l, i) in keyed {
        if last != Some(l) {
            out.push(Vec::new());
            last = Some(l);
        }
        out.last_mut().unwrap().push(i);
    }
    out
}

/// Angular Fourier modes V_j(r_i) of a real field.
pub struct AngularModes {
    n_theta: usize,
    data: Vec<c64>,
}

impl AngularModes {
    pub fn new(grid: &PolarGrid<f64>, v: &[f64]) -> Self {
        Self { n_theta: grid.n_theta(), data: grid.angular_coefficients_real(v) }
    }

    pub fn at(&self, i: usize, l: i64) -> c64 {
        self.data[i * self.n_theta + l.rem_euclid(self.n_theta as i64) as usize]
    }

    /// True when every nonzero mode is negligible against the zero mode.
    pub fn is_radial(&self, rel_tol: f64) -> bool {
        let mut zero = 0.0f64;
        let mut rest = 0.0f64;
        for row in self.data.chunks(self.n_theta) {
            zero = zero.max(row[0].norm());
            rest = rest.max(row[1..].iter().fold(0.0f64, |a, v| a.max(v.norm())));
        }
        rest <= rel_tol * zero.max(f64::MIN_POSITIVE)
    }
}

/// Dense Galerkin matrix; with `same_l_only` the couplings between different angular
/// momenta are skipped (they vanish for radial potentials).
pub fn galerkin_matrix(
    grid: &PolarGrid<f64>,
    table: &RadialTable<f64>,
    channels: &[Channel],
    modes: &AngularModes,
    same_l_only: bool,
) -> Result<CMat> {
    let n = channels.len();
    let half = (grid.n_theta() / 2) as i64;
    let ls: Vec<i64> = channels.iter().map(|&(k, m)| angular_momentum(k, m)).collect();
    let weighted: Vec<Vec<f64>> = channels
        .iter()
        .map(|&(k, m)| {
            table.radial(k, m).iter().zip(grid.radial_weights()).map(|(r, w)| r * w).collect()
        })
        .collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Mat::<c64>::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let dl = ls[a] - ls[b];
            if same_l_only && dl != 0 {
                continue;
            }
            if dl.abs() >= half {
                return Err(LandauError::InvalidGrid(format!(
                    "coupling l = {dl} exceeds angular resolution n_theta = {}",
                    grid.n_theta()
                )));
            }
            let rb = table.radial(channels[b].0, channels[b].1);
            let mut acc = c64::new(0.0, 0.0);
            for i in 0..rb.len() {
                acc += modes.at(i, dl) * (weighted[a][i] * rb[i]);
            }
            acc *= two_pi;
            out[(a, b)] = acc;
            out[(b, a)] = acc.conj();
        }
    }
    Ok(out)
}

pub(crate) fn check_support(v: &PotentialSpec, grid: &PolarGrid<f64>) -> Result<()> {
    let out = v.outside_fraction(grid.extent());
    if out > 1e-6 {
        return Err(LandauError::InvalidGrid(format!(
            "potential mass outside the grid extent {:.3e} exceeds 1e-6",
            out
        )));
    }
    Ok(())
}

/// Finite section <phi_{k0,m}, V phi_{k0,m'}>, m, m' <= m_max.
pub fn assemble_projected_potential(
    k0: LevelIndex,
    v: &PotentialSpec,
    trunc: BasisTruncation,
    grid: &PolarGrid<f64>,
) -> Result<CMat> {
    k0.require_planar()?;
    grid.require_calibrated(k0.k, trunc.m_max)?;
    check_support(v, grid)?;
    let samples = v.sample(grid)?;
    let modes = AngularModes::new(grid, &samples);
    let table = grid.radial_table(k0.k, k0.k, trunc.m_max)?;
    let channels = level_channels(k0.k, k0.k, trunc.m_max);
    galerkin_matrix(grid, &table, &channels, &modes, false)
}
