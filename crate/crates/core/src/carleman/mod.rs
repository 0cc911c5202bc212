//! Carleman estimate with weight e^{tau x_d} for the layered Landau Hamiltonian in odd d.

pub mod inverse;
pub mod multiplier;
pub mod ratio;
pub mod sum;

pub use inverse::{apply_conjugated, conjugated_inverse_apply};
pub use multiplier::{carleman_multiplier, frequency, multiplier_bound, multiplier_omega};
pub use ratio::{carleman_ratio, carleman_sweep, resonance_probe, CarlemanRatio, CarlemanRow, CarlemanSweep, ProbeRow};
pub use sum::multiplier_sum_sweep;
pub use sum::{multiplier_sum_check, MultiplierSum};

use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};

/// dist(tau^2, 2N + n)
pub fn resonance_distance(tau: f64, n: u32) -> f64 {
    let s = tau * tau - n as f64;
    if s <= 0.0 {
        return -s;
    }
    let k = (s / 2.0).floor();
    (s - 2.0 * k).min(2.0 * (k + 1.0) - s)
}

pub fn is_admissible(tau: f64, n: u32) -> bool {
    resonance_distance(tau, n) >= 0.5
}

pub fn check_tau(tau: f64, n: u32) -> Result<()> {
    if !tau.is_finite() {
        return Err(LandauError::InvalidInput(format!("tau = {tau}")));
    }
    let dist = resonance_distance(tau, n);
    if dist < 0.5 {
        return Err(LandauError::Resonant { tau, dist });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanParams {
    pub tau: f64,
    pub d: u32,
    /// compact axial interval [lo, hi]
    pub interval: (f64, f64),
}

impl CarlemanParams {
    pub fn new(tau: f64, d: u32, interval: (f64, f64)) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(LandauError::UnsupportedDimension(d));
        }
        if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
            return Err(LandauError::InvalidInput(format!("interval {interval:?}")));
        }
        let p = Self { tau, d, interval };
        check_tau(tau, p.n())?;
        Ok(p)
    }

    /// planar half-dimension, d = 2n + 1
    pub fn n(&self) -> u32 {
        (self.d - 1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_odd_integers() {
        assert!((resonance_distance(0.9, 1) - 0.19).abs() < 1e-12);
        assert!((resonance_distance(2.2, 1) - 0.16).abs() < 1e-12);
        assert!((resonance_distance(2.0, 1) - 1.0).abs() < 1e-12);
        assert!((resonance_distance(0.0, 1) - 1.0).abs() < 1e-12);
        assert!((resonance_distance(5.1, 1) - 0.99).abs() < 1e-12);
        assert!(resonance_distance(3f64.sqrt(), 1) < 1e-12);
    }

    #[test]
    fn gate() {
        for tau in [0.6, 1.366, 2.0, 5.1, -2.0] {
            assert!(CarlemanParams::new(tau, 3, (-1.0, 1.0)).is_ok(), "{tau}");
        }
        for tau in [0.9, 2.2, 1.0] {
            assert!(matches!(CarlemanParams::new(tau, 3, (-1.0, 1.0)), Err(LandauError::Resonant { .. })));
        }
        assert!(CarlemanParams::new(2.0, 4, (-1.0, 1.0)).is_err());
        assert!(CarlemanParams::new(2.0, 3, (1.0, -1.0)).is_err());
        assert_eq!(CarlemanParams::new(1.0, 5, (0.0, 1.0)).unwrap().n(), 2);
    }
}
