//! Declarative potential families and their sampling on the polar grid.

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::grid::PolarGrid;
use crate::quadrature::gauss_legendre_on;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// V = -scale * |profile|
    Negative,
    /// V = scale * profile
    Signed,
}

/// W sampled on a specific polar grid; the potential is -scale * W^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalProfile {
    pub extent: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily {
    /// exp(-|x - c|^2 / (2 width^2))
    Gaussian { width: f64 },
    /// exp(1 - 1/(1 - (|x - c|/radius)^2)) inside the disc, 0 outside
    Bump { radius: f64 },
    /// (1 + |x - c|^2/core^2)^(-power/2)
    PowerTail { core: f64, power: f64 },
    /// Radial profile by linear interpolation, 0 beyond the last radius
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
    Extremal { profile: ExtremalProfile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub family: PotentialFamily,
    #[serde(default)]
    pub center: [f64; 2],
    /// Lebesgue exponent the potential is measured in
    pub r: f64,
    pub sign: Sign,
    pub scale: f64,
}

impl PotentialSpec {
    pub fn gaussian(width: f64, scale: f64, r: f64) -> Self {
        Self { family: PotentialFamily::Gaussian { width }, center: [0.0; 2], r, sign: Sign::Negative, scale }
    }

    pub fn zero(r: f64) -> Self {
        Self::gaussian(1.0, 0.0, r)
    }

    pub fn extremal(profile: ExtremalProfile, r: f64) -> Self {
        Self { family: PotentialFamily::Extremal { profile }, center: [0.0; 2], r, sign: Sign::Negative, scale: 1.0 }
    }

    pub fn with_center(mut self, c: [f64; 2]) -> Self {
        self.center = c;
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale *= s;
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0) || !self.scale.is_finite() {
            return Err(LandauError::InvalidInput(format!("scale {} must be >= 0", self.scale)));
        }
        if !(self.r >= 1.0) {
            return Err(LandauError::InvalidInput(format!("Lebesgue exponent r = {} below 1", self.r)));
        }
        match &self.family {
            PotentialFamily::Gaussian { width } if !(*width > 0.0) => {
                Err(LandauError::InvalidInput("gaussian width must be > 0".into()))
            }
            PotentialFamily::Bump { radius } if !(*radius > 0.0) => {
                Err(LandauError::InvalidInput("bump radius must be > 0".into()))
            }
            PotentialFamily::PowerTail { core, power } if !(*core > 0.0) || !(*power > 2.0) => {
                Err(LandauError::InvalidInput("power tail needs core > 0 and power > 2".into()))
            }
            PotentialFamily::Tabulated { radii, values }
                if radii.len() != values.len() || radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) =>
            {
                Err(LandauError::InvalidInput("tabulated profile needs >= 2 increasing radii".into()))
            }
            PotentialFamily::Extremal { profile } => {
                if self.sign != Sign::Negative {
                    return Err(LandauError::InvalidInput("extremal potentials are negative".into()));
                }
                if profile.w.len() != profile.n_r * profile.n_theta {
                    return Err(LandauError::InvalidInput("extremal profile size mismatch".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Unsigned shape at distance rho from the center, for the analytic radial families.
    fn radial_shape(&self, rho: f64) -> Option<f64> {
        Some(match &self.family {
            PotentialFamily::Gaussian { width } => (-rho * rho / (2.0 * width * width)).exp(),
            PotentialFamily::Bump { radius } => {
                let t = rho / radius;
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            PotentialFamily::PowerTail { core, power } => (1.0 + rho * rho / (core * core)).powf(-power / 2.0),
            PotentialFamily::Tabulated { radii, values } => {
                if rho >= *radii.last().unwrap() {
                    0.0
                } else if rho <= radii[0] {
                    values[0]
                } else {
                    let i = radii.partition_point(|&r| r <= rho) - 1;
                    let t = (rho - radii[i]) / (radii[i + 1] - radii[i]);
                    values[i] * (1.0 - t) + values[i + 1] * t
                }
            }
            PotentialFamily::Extremal { .. } => return None,
        })
    }

    fn signed(&self, shape: f64) -> f64 {
        match self.sign {
            Sign::Negative => -self.scale * shape.abs(),
            Sign::Signed => self.scale * shape,
        }
    }

    /// Pointwise value for the analytic families.
    pub fn value_at(&self, x: [f64; 2]) -> Option<f64> {
        let rho = (x[0] - self.center[0]).hypot(x[1] - self.center[1]);
        self.radial_shape(rho).map(|s| self.signed(s))
    }

    /// Potential sampled on the grid (radius-major).
    pub fn sample(&self, grid: &PolarGrid<f64>) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.family {
            PotentialFamily::Extremal { profile } => {
                if profile.n_r != grid.n_r()
                    || profile.n_theta != grid.n_theta()
                    || (profile.extent - grid.extent()).abs() > 1e-12 * profile.extent
                {
                    return Err(LandauError::InvalidGrid(
                        "extremal profile was built on a different grid".into(),
                    ));
                }
                Ok(profile.w.iter().map(|w| -self.scale * w * w).collect())
            }
            _ => Ok(grid.sample_real(|x| self.value_at(x).unwrap())),
        }
    }

    /// True when V depends on |x| only (analytic family centered at the origin, or an
    /// extremal profile constant on every circle).
    pub fn is_radial(&self) -> bool {
        match &self.family {
            PotentialFamily::Extremal { profile } => profile.w.chunks(profile.n_theta).all(|row| {
                let m = row.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs()));
                row.iter().all(|v| (v - row[0]).abs() <= 1e-12 * m.max(1e-300))
            }),
            _ => self.center == [0.0, 0.0],
        }
    }

    /// ||V||_{L^r} by quadrature on the grid.
    pub fn lr_norm(&self, grid: &PolarGrid<f64>) -> Result<f64> {
        let v = self.sample(grid)?;
        Ok(grid.lp_norm_real(&v, self.r))
    }

    /// Fraction of the L^1 mass of V lying outside the disc |x| <= extent.
    /// Analytic families are integrated radially about their center; the disc
    /// around the center of radius extent - |center| is a conservative inner region.
    pub fn outside_fraction(&self, extent: f64) -> f64 {
        if let PotentialFamily::Extremal { .. } = self.family {
            return 0.0;
        }
        if self.scale == 0.0 {
            return 0.0;
        }
        let inner = (extent - self.center[0].hypot(self.center[1])).max(0.0);
        let reach = match &self.family {
            PotentialFamily::Gaussian { width } => 40.0 * width,
            PotentialFamily::Bump { radius } => *radius,
            PotentialFamily::Tabulated { radii, .. } => *radii.last().unwrap(),
            PotentialFamily::PowerTail { .. } | PotentialFamily::Extremal { .. } => f64::INFINITY,
        };
        let f = |rho: f64| self.radial_shape(rho).unwrap().abs() * rho;
        if let PotentialFamily::PowerTail { core, power } = self.family {
            // closed form: integral of (1 + s^2/c^2)^(-p/2) s ds from a to infinity
            let tail = |a: f64| core * core / (power - 2.0) * (1.0 + a * a / (core * core)).powf(1.0 - power / 2.0);
            return tail(inner) / tail(0.0);
        }
        let total = integrate_radial(&f, 0.0, reach);
        if inner >= reach {
            return 0.0;
        }
        integrate_radial(&f, inner, reach) / total
    }
}

fn integrate_radial(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    let mut acc = 0.0;
    for p in 0..pieces {
        let (x, w) = gauss_legendre_on::<f64>(16, a + p as f64 * h, a + (p + 1) as f64 * h);
        acc += x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum::<f64>();
    }
    acc
}
