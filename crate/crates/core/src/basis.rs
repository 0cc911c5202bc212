//! Symmetric-gauge Landau eigenfunctions phi_{k,m} and the level projection kernel.
//!
//! phi_{k,m}(r, theta) = (2 pi)^(-1/2) psi_{min(k,m)}^{|m-k|}(r^2/2) e^{i (m-k) theta},
//! with B = 1 and H = (-i d_x + y/2)^2 + (-i d_y - x/2)^2, so H phi_{k,m} = (2k+1) phi_{k,m}.
//!
//! The kernel of P_k is (1/2pi) L_k(s) e^{-s/2} e^{-i (x1 y2 - x2 y1)/2}, s = |x-y|^2/2.
//! The sign of the gauge phase is the one reproduced by sum_m phi_{k,m}(x) conj(phi_{k,m}(y)).

use num_complex::Complex;

use crate::error::{LandauError, Result};
use crate::laguerre::{laguerre_function, laguerre_functions};
use crate::level::LevelIndex;
use crate::scalar::Real;

/// Angular momentum of phi_{k,m}.
pub fn angular_momentum(k: u32, m: u32) -> i64 {
    m as i64 - k as i64
}

fn inv_sqrt_two_pi<T: Real>() -> T {
    T::one() / (T::lit(2.0) * T::PI()).sqrt()
}

/// Radial part R_{k,m}(r) including the (2 pi)^(-1/2) factor.
pub fn radial_value<T: Real>(k: u32, m: u32, r: T) -> T {
    let nr = k.min(m) as usize;
    let alpha = k.abs_diff(m);
    inv_sqrt_two_pi::<T>() * laguerre_function(nr, alpha, r * r / T::lit(2.0))
}

pub fn eigenfunction_eval<T: Real>(idx: LevelIndex, m: u32, x: [T; 2]) -> Result<Complex<T>> {
    idx.require_planar()?;
    let r = x[0].hypot(x[1]);
    let radial = radial_value(idx.k, m, r);
    let l = angular_momentum(idx.k, m);
    if l == 0 {
        return Ok(Complex::new(radial, T::zero()));
    }
    let theta = x[1].atan2(x[0]);
    let phase = T::from_i64(l).unwrap() * theta;
    Ok(Complex::new(radial * phase.cos(), radial * phase.sin()))
}

pub fn projection_kernel<T: Real>(idx: LevelIndex, x: [T; 2], y: [T; 2]) -> Result<Complex<T>> {
    idx.require_planar()?;
    let dx = x[0] - y[0];
    let dy = x[1] - y[1];
    let s = (dx * dx + dy * dy) / T::lit(2.0);
    let amp = laguerre_function(idx.k as usize, 0, s) / (T::lit(2.0) * T::PI());
    let phase = -(x[0] * y[1] - x[1] * y[0]) / T::lit(2.0);
    Ok(Complex::new(amp * phase.cos(), amp * phase.sin()))
}

/// R_{k,m}(r_i) for levels k_min..=k_max, m = 0..=m_max, at fixed radii. Read-only after build.
#[derive(Debug, Clone)]
pub struct RadialTable<T> {
    pub k_min: u32,
    pub k_max: u32,
    pub m_max: u32,
    n_r: usize,
    data: Vec<T>,
}

impl<T: Real> RadialTable<T> {
    pub fn new(radii: &[T], k_min: u32, k_max: u32, m_max: u32) -> Result<Self> {
        if k_min > k_max {
            return Err(LandauError::InvalidInput(format!("k_min {k_min} > k_max {k_max}")));
        }
        let n_r = radii.len();
        let n_k = (k_max - k_min + 1) as usize;
        let n_m = m_max as usize + 1;
        let mut data = vec![T::zero(); n_k * n_m * n_r];
        let alpha_max = k_max.max(m_max);
        let mut buf = Vec::new();
        let c = inv_sqrt_two_pi::<T>();
        for alpha in 0..=alpha_max {
            // pairs with |m-k| = alpha inside the truncation, keyed by n_r = min(k, m)
            let mut pairs: Vec<(u32, u32, usize)> = Vec::new();
            for k in k_min..=k_max {
                if k + alpha <= m_max {
                    pairs.push((k, k + alpha, k as usize));
                }
                if alpha > 0 && k >= alpha && k - alpha <= m_max {
                    pairs.push((k, k - alpha, (k - alpha) as usize));
                }
            }
            let Some(nmax) = pairs.iter().map(|p| p.2).max() else {
                continue;
            };
            for (i, &r) in radii.iter().enumerate() {
                laguerre_functions(nmax, alpha, r * r / T::lit(2.0), &mut buf);
                for &(k, m, nr) in &pairs {
                    let at = ((k - k_min) as usize * n_m + m as usize) * n_r + i;
                    data[at] = c * buf[nr];
                }
            }
        }
        Ok(Self { k_min, k_max, m_max, n_r, data })
    }

    pub fn n_radii(&self) -> usize {
        self.n_r
    }

    pub fn contains(&self, k: u32, m: u32) -> bool {
        k >= self.k_min && k <= self.k_max && m <= self.m_max
    }

    /// Values R_{k,m}(r_i) over all radii.
    pub fn radial(&self, k: u32, m: u32) -> &[T] {
        assert!(self.contains(k, m), "({k},{m}) outside radial table");
        let n_m = self.m_max as usize + 1;
        let at = ((k - self.k_min) as usize * n_m + m as usize) * self.n_r;
        &self.data[at..at + self.n_r]
    }
}
