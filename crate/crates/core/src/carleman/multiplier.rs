//! m_tau(t, k) = (1/2pi) int e^{i t eta} / ((eta + i tau)^2 + omega_k^2) d eta, omega_k = sqrt(2k + n).
//!
//! Poles at eta = i(omega - tau) and eta = -i(omega + tau). For tau >= 0:
//!   omega > tau: m = e^{-(omega - tau) t}/(2 omega) for t >= 0, e^{-(omega + tau)|t|}/(2 omega) for t < 0
//!   omega < tau: m = 0 for t >= 0, (e^{-(omega + tau)|t|} - e^{-(tau - omega)|t|})/(2 omega) for t < 0
//! and m_{-tau}(t) = m_tau(-t).

use faer::c64;

use crate::carleman::check_tau;
use crate::error::{LandauError, Result};

pub fn frequency(k: u32, n: u32) -> f64 {
    ((2 * k + n) as f64).sqrt()
}

/// Closed form at a raw frequency omega > 0, omega != |tau|; no admissibility gate.
pub fn multiplier_omega(t: f64, tau: f64, omega: f64) -> f64 {
    let (t, tau) = if tau < 0.0 { (-t, -tau) } else { (t, tau) };
    let s = 0.5 / omega;
    if omega > tau {
        if t >= 0.0 {
            s * (-(omega - tau) * t).exp()
        } else {
            s * (-(omega + tau) * -t).exp()
        }
    } else if t >= 0.0 {
        0.0
    } else {
        s * ((-(omega + tau) * -t).exp() - (-(tau - omega) * -t).exp())
    }
}

pub fn carleman_multiplier(t: f64, tau: f64, k: u32, n: u32) -> Result<c64> {
    if n == 0 {
        return Err(LandauError::UnsupportedDimension(n));
    }
    check_tau(tau, n)?;
    if !t.is_finite() {
        return Err(LandauError::InvalidInput(format!("t = {t}")));
    }
    Ok(c64::new(multiplier_omega(t, tau, frequency(k, n)), 0.0))
}

/// e^{-|tau - omega||t|} / omega
pub fn multiplier_bound(t: f64, tau: f64, omega: f64) -> f64 {
    (-(tau - omega).abs() * t.abs()).exp() / omega
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_zero_is_decaying_kernel() {
        for k in 0..5 {
            let w = frequency(k, 1);
            for t in [-3.0, -0.2, 0.0, 0.4, 2.5] {
                let m = carleman_multiplier(t, 0.0, k, 1).unwrap();
                assert!((m.re - (-w * f64::abs(t)).exp() / (2.0 * w)).abs() < 1e-15);
                assert_eq!(m.im, 0.0);
            }
        }
    }

    #[test]
    fn reflection_in_tau() {
        for (t, tau) in [(0.7, 1.366), (-1.2, 2.0), (3.0, 5.1)] {
            for k in 0..20 {
                let a = carleman_multiplier(t, -tau, k, 1).unwrap();
                let b = carleman_multiplier(-t, tau, k, 1).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn continuous_at_origin() {
        for (tau, w) in [(1.3, 5f64.sqrt()), (2.0, 1.0), (5.1, 3.0)] {
            let eps = 1e-9;
            assert!((multiplier_omega(eps, tau, w) - multiplier_omega(-eps, tau, w)).abs() < 1e-8);
        }
    }

    #[test]
    fn ode_jump_condition() {
        // -m'' + 2 tau m' + (omega^2 - tau^2) m = delta: m' jumps by -1 at 0
        for (tau, w) in [(1.3, 5f64.sqrt()), (2.0, 1.0), (-0.6, 3f64.sqrt())] {
            let h = 1e-6;
            let right = (multiplier_omega(2.0 * h, tau, w) - multiplier_omega(h, tau, w)) / h;
            let left = (multiplier_omega(-h, tau, w) - multiplier_omega(-2.0 * h, tau, w)) / h;
            assert!((right - left + 1.0).abs() < 1e-4, "tau={tau}: {}", right - left);
            let t = 0.8;
            let d2 = (multiplier_omega(t + 1e-4, tau, w) - 2.0 * multiplier_omega(t, tau, w) + multiplier_omega(t - 1e-4, tau, w)) / 1e-8;
            let d1 = (multiplier_omega(t + 1e-4, tau, w) - multiplier_omega(t - 1e-4, tau, w)) / 2e-4;
            let r = -d2 + 2.0 * tau * d1 + (w * w - tau * tau) * multiplier_omega(t, tau, w);
            assert!(r.abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn resonant_rejected() {
        assert!(carleman_multiplier(0.5, 0.9, 0, 1).is_err());
        assert!(carleman_multiplier(0.5, 1.0, 3, 1).is_err());
    }
}
