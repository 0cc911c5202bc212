//! Functions on R^2 x R stored as axial profiles per Landau channel (k, m).

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::cluster::assemble::Channel;
use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::resolvent3d::kernel::halfline_resolvent_kernel;
use crate::resolvent3d::threshold;

/// Uniform axial nodes t_j = -half + j h, j = 0..n, weight h each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialGrid {
    pub half: f64,
    pub n: usize,
}

impl AxialGrid {
    pub fn new(half: f64, n: usize) -> Result<Self> {
        if !(half > 0.0) || n < 3 {
            return Err(LandauError::InvalidGrid(format!("axial grid half = {half}, n = {n}")));
        }
        Ok(Self { half, n })
    }

    /// Grid with spacing at most `h` covering [-half, half].
    pub fn with_spacing(half: f64, h: f64) -> Result<Self> {
        Self::new(half, (2.0 * half / h).ceil() as usize + 1)
    }

    /// Smallest symmetric extent (in steps of 1) on which `profile` keeps mass
    /// >= 1 - 1e-8 of its mass on [-limit, limit].
    pub fn auto<F: Fn(f64) -> f64>(profile: F, h: f64, limit: f64) -> Result<Self> {
        let full = Self::with_spacing(limit, h)?;
        let total: f64 = full.nodes().iter().map(|&t| profile(t).powi(2)).sum::<f64>() * full.h();
        let mut half = 1.0;
        while half < limit {
            let g = Self::with_spacing(half, h)?;
            let m: f64 = g.nodes().iter().map(|&t| profile(t).powi(2)).sum::<f64>() * g.h();
            if m >= (1.0 - 1e-8) * total {
                return Ok(g);
            }
            half += 1.0;
        }
        Ok(full)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half / (self.n - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half + j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredFunction {
    pub channels: Vec<Channel>,
    pub axial: AxialGrid,
    /// data[c][j]: coefficient of channel c at axial node j
    pub data: Vec<Vec<c64>>,
}

impl LayeredFunction {
    pub fn zeros(channels: Vec<Channel>, axial: AxialGrid) -> Self {
        let data = vec![vec![c64::new(0.0, 0.0); axial.n]; channels.len()];
        Self { channels, axial, data }
    }

    /// sum over listed channels of weight * phi_{k,m}(x_perp) * profile(x_d)
    pub fn separable<F: Fn(f64) -> f64>(channels: Vec<Channel>, weights: &[c64], axial: AxialGrid, profile: F) -> Self {
        let nodes = axial.nodes();
        let data = weights.iter().map(|&w| nodes.iter().map(|&t| w * profile(t)).collect()).collect();
        Self { channels, axial, data }
    }

    /// Projects planar(x) * profile(t) onto the channels; fails when the channels miss
    /// more than 1e-6 of the planar mass.
    pub fn project_separable<P, F>(grid: &PolarGrid<f64>, planar: P, channels: Vec<Channel>, axial: AxialGrid, profile: F) -> Result<Self>
    where
        P: Fn([f64; 2]) -> c64,
        F: Fn(f64) -> f64,
    {
        let k_max = channels.iter().map(|c| c.0).max().unwrap_or(0);
        let m_max = channels.iter().map(|c| c.1).max().unwrap_or(0);
        grid.require_calibrated(k_max, m_max)?;
        let field = grid.sample(planar);
        let mass = grid.inner(&field, &field).re;
        let table = grid.radial_table(0, k_max, m_max)?;
        let coef = grid.project(&field, &table, &channels)?;
        let kept: f64 = coef.iter().map(|c| c.norm_sqr()).sum();
        if mass > 0.0 && (mass - kept) > 1e-6 * mass {
            return Err(LandauError::InvalidInput(format!("channel truncation misses {:.3e} of the planar mass", (mass - kept) / mass)));
        }
        Ok(Self::separable(channels, &coef, axial, profile))
    }

    pub fn norm2_sq(&self) -> f64 {
        self.data.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>() * self.axial.h()
    }

    /// <self, other> (conjugate on other)
    pub fn inner(&self, other: &Self) -> c64 {
        let h = self.axial.h();
        let mut acc = c64::new(0.0, 0.0);
        for (c, row) in self.channels.iter().zip(&self.data) {
            if let Some(i) = other.channels.iter().position(|d| d == c) {
                for (a, b) in row.iter().zip(&other.data[i]) {
                    acc += a * b.conj();
                }
            }
        }
        acc * h
    }

    pub fn conj(&self) -> Self {
        let data = self.data.iter().map(|r| r.iter().map(|c| c.conj()).collect()).collect();
        Self { data, ..self.clone() }
    }

    /// Planar field at axial node j on the polar grid.
    pub fn slice(&self, grid: &PolarGrid<f64>, j: usize) -> Result<Vec<c64>> {
        let k_max = self.channels.iter().map(|c| c.0).max().unwrap_or(0);
        let m_max = self.channels.iter().map(|c| c.1).max().unwrap_or(0);
        let table = grid.radial_table(0, k_max, m_max)?;
        let coef: Vec<c64> = self.data.iter().map(|r| r[j]).collect();
        grid.synthesize(&coef, &table, &self.channels)
    }

    /// (H_0 - z) applied with the second difference along x_d (interior nodes only;
    /// the two end nodes are set to zero).
    pub fn apply_h0_minus(&self, z: c64) -> Self {
        let h2 = self.axial.h().powi(2);
        let n = self.axial.n;
        let data = self
            .channels
            .iter()
            .zip(&self.data)
            .map(|(&(k, _), u)| {
                let mut out = vec![c64::new(0.0, 0.0); n];
                for j in 1..n - 1 {
                    out[j] = (c64::new(threshold(k), 0.0) - z) * u[j] - (u[j + 1] - u[j] * 2.0 + u[j - 1]) / h2;
                }
                out
            })
            .collect();
        Self { data, ..self.clone() }
    }
}

/// Kernel samples -K_{z - lambda_k}(j h), j = 0..n, with K the half-line kernel; the
/// minus sign turns it into the Green's function of -d^2 - (z - lambda_k).
pub(crate) fn green_row(z: c64, k: u32, h: f64, n: usize) -> Result<Vec<c64>> {
    let mu = z - threshold(k);
    (0..n).map(|j| Ok(-halfline_resolvent_kernel(mu, j as f64 * h)?)).collect()
}

/// Toeplitz convolution on the axial grid with the rectangle rule.
pub(crate) fn convolve(row: &[c64], u: &[c64], h: f64) -> Vec<c64> {
    let n = u.len();
    let nz: Vec<usize> = (0..n).filter(|&j| u[j] != c64::new(0.0, 0.0)).collect();
    (0..n)
        .map(|i| {
            let mut acc = c64::new(0.0, 0.0);
            for &j in &nz {
                acc += row[i.abs_diff(j)] * u[j];
            }
            acc * h
        })
        .collect()
}

pub(crate) fn check_energy(z: c64) -> Result<()> {
    if z.im == 0.0 {
        return Err(LandauError::BranchCut { re: z.re, im: z.im });
    }
    if !(z.im.abs() < 1.0) || z.re < 0.0 {
        return Err(LandauError::InvalidInput(format!("z = {z} outside 0 < |Im z| < 1 with z in a cluster set")));
    }
    Ok(())
}

/// R_0(z) f channel by channel: sum over levels of P_k tensor (-d^2 - (z - lambda_k))^(-1).
pub fn layered_resolvent_apply(z: c64, f: &LayeredFunction) -> Result<LayeredFunction> {
    check_energy(z)?;
    let h = f.axial.h();
    let n = f.axial.n;
    let mut rows: Vec<(u32, Vec<c64>)> = Vec::new();
    let mut data = Vec::with_capacity(f.channels.len());
    for (&(k, _), u) in f.channels.iter().zip(&f.data) {
        if !rows.iter().any(|r| r.0 == k) {
            rows.push((k, green_row(z, k, h, n)?));
        }
        let row = &rows.iter().find(|r| r.0 == k).unwrap().1;
        data.push(convolve(row, u, h));
    }
    Ok(LayeredFunction { data, ..f.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(t: f64) -> f64 {
        (-t * t).exp()
    }

    #[test]
    fn single_channel_stays_single() {
        let ax = AxialGrid::with_spacing(6.0, 0.05).unwrap();
        let mut f = LayeredFunction::zeros(vec![(0, 0), (1, 3), (2, 2)], ax.clone());
        f.data[1] = ax.nodes().iter().map(|&t| c64::new(bump(t), 0.0)).collect();
        let u = layered_resolvent_apply(c64::new(3.4, 0.3), &f).unwrap();
        assert!(u.data[0].iter().chain(&u.data[2]).all(|c| c.norm() == 0.0));
        assert!(u.data[1].iter().any(|c| c.norm() > 0.0));
    }

    #[test]
    fn round_trip_second_order() {
        let z = c64::new(3.4, 0.3);
        let mut res = Vec::new();
        for h in [0.04, 0.02] {
            let ax = AxialGrid::with_spacing(7.0, h).unwrap();
            let f = LayeredFunction::separable(vec![(0, 0), (1, 1), (3, 0)], &[c64::new(1.0, 0.0), c64::new(0.5, -0.2), c64::new(0.0, 0.3)], ax, bump);
            let back = layered_resolvent_apply(z, &f).unwrap().apply_h0_minus(z);
            let mut diff = f.clone();
            for (d, b) in diff.data.iter_mut().zip(&back.data) {
                let n = d.len();
                for j in 1..n - 1 {
                    d[j] -= b[j];
                }
                d[0] = c64::new(0.0, 0.0);
                d[n - 1] = c64::new(0.0, 0.0);
            }
            res.push((diff.norm2_sq() / f.norm2_sq()).sqrt());
        }
        assert!(res[1] < 1e-3, "{res:?}");
        assert!(res[0] / res[1] > 3.5, "{res:?}");
    }

    #[test]
    fn conjugate_energy_symmetry() {
        let ax = AxialGrid::with_spacing(5.0, 0.05).unwrap();
        let f = LayeredFunction::separable(vec![(0, 0), (2, 1)], &[c64::new(1.0, 0.0), c64::new(0.0, 1.0)], ax, |t| bump(t - 0.3));
        let z = c64::new(5.6, 0.4);
        let a = layered_resolvent_apply(z.conj(), &f).unwrap();
        let b = layered_resolvent_apply(z, &f.conj()).unwrap().conj();
        for (x, y) in a.data.iter().flatten().zip(b.data.iter().flatten()) {
            assert!((x - y).norm() <= 1e-14 * x.norm().max(1e-300));
        }
    }

    #[test]
    fn real_energy_rejected() {
        let ax = AxialGrid::new(1.0, 11).unwrap();
        let f = LayeredFunction::zeros(vec![(0, 0)], ax);
        assert!(layered_resolvent_apply(c64::new(2.0, 0.0), &f).is_err());
        assert!(layered_resolvent_apply(c64::new(2.0, 1.5), &f).is_err());
    }

    #[test]
    fn auto_extent_holds_mass() {
        let g = AxialGrid::auto(bump, 0.01, 40.0).unwrap();
        assert!(g.half < 10.0);
        let m: f64 = g.nodes().iter().map(|&t| bump(t).powi(2)).sum::<f64>() * g.h();
        assert!((m - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-8);
    }
}
