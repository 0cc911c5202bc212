//! Orthonormal Laguerre functions psi_n^alpha(s) = sqrt(n!/(n+alpha)!) s^(alpha/2) e^(-s/2) L_n^alpha(s).
//!
//! Evaluated by the normalized three-term recurrence with the exponential weight
//! folded into a running log-scale, so large n, alpha and s neither overflow nor
//! underflow prematurely.

use std::sync::OnceLock;

use crate::scalar::Real;

const DIRECT_TABLE: usize = 256;

fn ln_factorial_table() -> &'static [f64; DIRECT_TABLE] {
    static TABLE: OnceLock<[f64; DIRECT_TABLE]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; DIRECT_TABLE];
        for n in 1..DIRECT_TABLE {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!), exact summation below 256, log-gamma above.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < DIRECT_TABLE {
        ln_factorial_table()[n as usize]
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Fills `out[n] = psi_n^alpha(s)` for n = 0..=n_max.
pub fn laguerre_functions<T: Real>(n_max: usize, alpha: u32, s: T, out: &mut Vec<T>) {
    out.clear();
    out.resize(n_max + 1, T::zero());
    if s < T::zero() {
        return;
    }
    if s == T::zero() {
        if alpha == 0 {
            out.iter_mut().for_each(|v| *v = T::one());
        }
        return;
    }
    let a = T::from_u32(alpha).unwrap();
    let two = T::lit(2.0);
    // psi_0 in log form
    let mut log_scale = a / two * s.ln() - s / two - T::lit(0.5 * ln_factorial(alpha as u64));
    let big = T::max_value().sqrt().sqrt();
    let emit = |m: T, log_scale: T| -> T {
        if m == T::zero() {
            T::zero()
        } else {
            let v = (m.abs().ln() + log_scale).exp();
            if m < T::zero() {
                -v
            } else {
                v
            }
        }
    };
    let mut prev = T::zero();
    let mut cur = T::one();
    out[0] = emit(cur, log_scale);
    for n in 0..n_max {
        let nf = T::of_usize(n);
        let next = ((two * nf + T::one() + a - s) * cur - (nf * (nf + a)).sqrt() * prev)
            / ((nf + T::one()) * (nf + T::one() + a)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > big {
            let f = cur.abs();
            cur = cur / f;
            prev = prev / f;
            log_scale = log_scale + f.ln();
        }
        out[n + 1] = emit(cur, log_scale);
    }
}

/// Single value psi_n^alpha(s).
pub fn laguerre_function<T: Real>(n: usize, alpha: u32, s: T) -> T {
    let mut buf = Vec::with_capacity(n + 1);
    laguerre_functions(n, alpha, s, &mut buf);
    buf[n]
}
