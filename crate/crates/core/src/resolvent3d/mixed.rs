//! Mixed norms: planar Lebesgue norm per axial slice, then the intersection norm
//! max(||g||_{p1}, ||g||_1) along x_d.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::exponent::rho;
use crate::grid::PolarGrid;
use crate::resolvent3d::layered::{AxialGrid, LayeredFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedSpace {
    Xq,
    Vq,
    /// dual sum space; only probed through bilinear pairings, never normed
    XqStarDualProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub space: MixedSpace,
    pub q: f64,
}

impl MixedNormSpec {
    pub fn new(space: MixedSpace, q: f64) -> Result<Self> {
        let s = Self { space, q };
        s.exponents()?;
        Ok(s)
    }

    /// (planar exponent, axial exponent paired with L^1), d = 3.
    pub fn exponents(&self) -> Result<(f64, f64)> {
        let q = self.q;
        if !(q > 2.0 && q < 6.0) {
            return Err(LandauError::InvalidExponent(format!("q = {q} outside (2, 6) for d = 3")));
        }
        let r = rho(3, q)?;
        match self.space {
            MixedSpace::Xq => Ok((q / (q - 1.0), 2.0 / (1.0 - 2.0 * r))),
            MixedSpace::Vq => Ok((q / (q - 2.0), -1.0 / (2.0 * r))),
            MixedSpace::XqStarDualProbe => {
                Err(LandauError::InvalidInput("the sum-space norm is not computed; pair against Xq instead".into()))
            }
        }
    }
}

fn axial_lp(g: &[f64], h: f64, p: f64) -> f64 {
    (g.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
}

/// Norm of a planar-norm profile g(x_d) sampled on the axial grid.
pub fn mixed_norm(profile: &[f64], axial: &AxialGrid, spec: &MixedNormSpec) -> Result<f64> {
    let (_, p1) = spec.exponents()?;
    let h = axial.h();
    Ok(axial_lp(profile, h, p1).max(axial_lp(profile, h, 1.0)))
}

/// Planar norms ||f(., x_d)||_{p} on the polar grid, then `mixed_norm`.
pub fn mixed_norm_layered(f: &LayeredFunction, grid: &PolarGrid<f64>, spec: &MixedNormSpec) -> Result<f64> {
    let (p, _) = spec.exponents()?;
    let k_max = f.channels.iter().map(|c| c.0).max().unwrap_or(0);
    let m_max = f.channels.iter().map(|c| c.1).max().unwrap_or(0);
    grid.require_calibrated(k_max, m_max)?;
    let table = grid.radial_table(0, k_max, m_max)?;
    let mut profile = Vec::with_capacity(f.axial.n);
    let mut last: Option<(Vec<c64>, f64)> = None;
    for j in 0..f.axial.n {
        let coef: Vec<c64> = f.data.iter().map(|r| r[j]).collect();
        // separable data: reuse the previous slice norm when the coefficients are proportional
        if let Some((c0, n0)) = &last {
            if let Some(s) = proportional(c0, &coef) {
                profile.push(n0 * s);
                continue;
            }
        }
        let field = grid.synthesize(&coef, &table, &f.channels)?;
        let n = grid.lp_norm(&field, p);
        profile.push(n);
        if coef.iter().any(|c| c.norm() > 0.0) {
            last = Some((coef, n));
        }
    }
    mixed_norm(&profile, &f.axial, spec)
}

/// |s| with b = s a, when it exists to round-off.
fn proportional(a: &[c64], b: &[c64]) -> Option<f64> {
    let i = (0..a.len()).max_by(|&i, &j| a[i].norm().partial_cmp(&a[j].norm()).unwrap())?;
    if a[i].norm() == 0.0 {
        return None;
    }
    let s = b[i] / a[i];
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (y - s * x).norm() <= 1e-14 * scale * s.norm().max(1.0)).then(|| s.norm())
}
