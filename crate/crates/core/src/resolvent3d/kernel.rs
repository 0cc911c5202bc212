use faer::c64;

use crate::error::{LandauError, Result};

/// Square root on C \ [0, inf) with values in the open upper half plane.
pub fn sqrt_upper(mu: c64) -> Result<c64> {
    if mu.im == 0.0 && mu.re >= 0.0 {
        return Err(LandauError::BranchCut { re: mu.re, im: mu.im });
    }
    // principal root of -mu has nonnegative real part; times i lands in C+
    Ok(c64::new(0.0, 1.0) * (-mu).sqrt())
}

/// e^(i sqrt(mu) |t|) / (2 i sqrt(mu)).
///
/// As written this is the kernel of (d^2/dt^2 + mu)^(-1), i.e. minus the Green's function
/// of -d^2/dt^2 - mu; `layered_resolvent_apply` carries the sign.
pub fn halfline_resolvent_kernel(mu: c64, t: f64) -> Result<c64> {
    let s = sqrt_upper(mu)?;
    Ok((c64::new(0.0, 1.0) * s * t.abs()).exp() / (c64::new(0.0, 2.0) * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_mu_decays() {
        for t in [-2.0, -0.3, 0.0, 0.7, 5.0] {
            let k = halfline_resolvent_kernel(c64::new(-1.0, 0.0), t).unwrap();
            assert!((k - c64::new(-(-f64::abs(t)).exp() / 2.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn approach_to_cut_from_above() {
        let lim = c64::new(0.0, -0.5);
        let mut last = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let d = (halfline_resolvent_kernel(c64::new(1.0, e), 0.0).unwrap() - lim).norm();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn branch_cut_rejected() {
        assert!(sqrt_upper(c64::new(2.0, 0.0)).is_err());
        assert!(sqrt_upper(c64::new(0.0, 0.0)).is_err());
        assert!(sqrt_upper(c64::new(2.0, -1e-3)).unwrap().im > 0.0);
        assert!(sqrt_upper(c64::new(-3.0, 0.0)).unwrap().im > 0.0);
    }

    #[test]
    fn second_difference_inverts_to_minus_delta() {
        // (-D^2 - mu) K = -delta: the discrete delta has height 1/h at 0, zero elsewhere
        let mu = c64::new(0.7, 0.3);
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let k = |j: i64| halfline_resolvent_kernel(mu, j as f64 * h).unwrap();
            let apply = |j: i64| -(k(j + 1) - k(j) * 2.0 + k(j - 1)) / (h * h) - mu * k(j);
            let at0 = apply(0) * h;
            let off = (1..200).map(|j| apply(j).norm()).fold(0.0, f64::max);
            errs.push(((at0 + 1.0).norm(), off));
        }
        assert!(errs[1].0 < 1e-3 && errs[1].1 < 1e-3);
        // O(h^2)
        assert!(errs[0].0 / errs[1].0 > 3.5 && errs[0].1 / errs[1].1 > 3.5);
    }
}
