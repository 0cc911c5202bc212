//! G_tau, the inverse of e^{tau x_d} H_0 e^{-tau x_d} = D^2 + 2i tau D - tau^2 + H_perp,
//! applied channelwise as an axial convolution against m_tau.

use faer::c64;

use crate::carleman::check_tau;
use crate::carleman::multiplier::{frequency, multiplier_omega};
use crate::error::{LandauError, Result};
use crate::resolvent3d::LayeredFunction;

/// Planar channels are Landau levels of R^2.
const N: u32 = 1;

fn require_compact(f: &LayeredFunction) -> Result<()> {
    let peak = f.data.iter().flatten().fold(0.0f64, |a, c| a.max(c.norm()));
    let edge = f.data.iter().flat_map(|r| [r[0], r[r.len() - 1]]).fold(0.0f64, |a, c| a.max(c.norm()));
    if edge > 1e-10 * peak {
        return Err(LandauError::InvalidInput(format!("data reaches the axial window edge ({edge:.3e} of peak {peak:.3e})")));
    }
    Ok(())
}

pub fn conjugated_inverse_apply(tau: f64, f: &LayeredFunction) -> Result<LayeredFunction> {
    check_tau(tau, N)?;
    require_compact(f)?;
    let h = f.axial.h();
    let n = f.axial.n;
    let mut rows: Vec<(u32, Vec<f64>)> = Vec::new();
    let mut data = Vec::with_capacity(f.channels.len());
    for (&(k, _), u) in f.channels.iter().zip(&f.data) {
        if !rows.iter().any(|r| r.0 == k) {
            let w = frequency(k, N);
            // row[n - 1 + d] = m(d h), d in -(n-1)..=(n-1)
            let row = (0..2 * n - 1).map(|i| multiplier_omega((i as f64 - (n - 1) as f64) * h, tau, w)).collect();
            rows.push((k, row));
        }
        let row = &rows.iter().find(|r| r.0 == k).unwrap().1;
        let nz: Vec<usize> = (0..n).filter(|&j| u[j] != c64::new(0.0, 0.0)).collect();
        let out = (0..n)
            .map(|i| {
                let mut acc = c64::new(0.0, 0.0);
                for &j in &nz {
                    acc += u[j] * row[n - 1 + i - j];
                }
                acc * h
            })
            .collect();
        data.push(out);
    }
    Ok(LayeredFunction { data, ..f.clone() })
}

/// -u'' + 2 tau u' + (omega_k^2 - tau^2) u with centered differences; end nodes set to zero.
pub fn apply_conjugated(tau: f64, u: &LayeredFunction) -> LayeredFunction {
    let h = u.axial.h();
    let n = u.axial.n;
    let data = u
        .channels
        .iter()
        .zip(&u.data)
        .map(|(&(k, _), v)| {
            let c = frequency(k, N).powi(2) - tau * tau;
            let mut out = vec![c64::new(0.0, 0.0); n];
            for j in 1..n - 1 {
                out[j] = -(v[j + 1] - v[j] * 2.0 + v[j - 1]) / (h * h) + (v[j + 1] - v[j - 1]) * (tau / h) + v[j] * c;
            }
            out
        })
        .collect();
    LayeredFunction { data, ..u.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent3d::AxialGrid;

    fn bump(t: f64) -> f64 {
        if t.abs() < 1.0 {
            (-1.0 / (1.0 - t * t)).exp()
        } else {
            0.0
        }
    }

    fn interior_residual(f: &LayeredFunction, back: &LayeredFunction) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in f.data.iter().zip(&back.data) {
            for j in 1..a.len() - 1 {
                num += (a[j] - b[j]).norm_sqr();
                den += a[j].norm_sqr();
            }
        }
        (num / den).sqrt()
    }

    #[test]
    fn single_channel_is_one_convolution() {
        let ax = AxialGrid::with_spacing(4.0, 0.02).unwrap();
        let mut f = LayeredFunction::zeros(vec![(0, 0), (2, 1)], ax.clone());
        f.data[1] = ax.nodes().iter().map(|&t| c64::new(bump(t), 0.0)).collect();
        let g = conjugated_inverse_apply(1.3, &f).unwrap();
        assert!(g.data[0].iter().all(|c| c.norm() == 0.0));
        let w = frequency(2, 1);
        let h = ax.h();
        let i = 150;
        let direct: f64 = (0..ax.n).map(|j| multiplier_omega(ax.node(i) - ax.node(j), 1.3, w) * bump(ax.node(j))).sum::<f64>() * h;
        assert!((g.data[1][i].re - direct).abs() < 1e-14);
    }

    #[test]
    fn round_trip_second_order() {
        let mut res = Vec::new();
        for h in [0.02, 0.01] {
            let ax = AxialGrid::with_spacing(6.0, h).unwrap();
            let f = LayeredFunction::separable(vec![(0, 0), (1, 2), (4, 0)], &[c64::new(1.0, 0.0), c64::new(0.3, -0.5), c64::new(0.0, 0.8)], ax, |t| bump(t / 1.5));
            let back = apply_conjugated(1.3, &conjugated_inverse_apply(1.3, &f).unwrap());
            res.push(interior_residual(&f, &back));
        }
        assert!(res[1] < 1e-3, "{res:?}");
        assert!(res[0] / res[1] > 3.5, "{res:?}");
    }

    #[test]
    fn reflection_symmetry() {
        let ax = AxialGrid::with_spacing(5.0, 0.025).unwrap();
        let profile = |t: f64| bump((t - 0.4) / 1.2) * (1.0 + 0.5 * t);
        let ch = vec![(0, 0), (3, 1)];
        let w = [c64::new(1.0, 0.0), c64::new(-0.4, 0.0)];
        let f = LayeredFunction::separable(ch.clone(), &w, ax.clone(), profile);
        let rf = LayeredFunction::separable(ch, &w, ax, |t| profile(-t));
        let a = conjugated_inverse_apply(-2.0, &f).unwrap();
        let b = conjugated_inverse_apply(2.0, &rf).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            let n = x.len();
            for j in 0..n {
                assert!((x[n - 1 - j] - y[j]).norm() < 1e-14);
            }
        }
        // real kernel: commutes with conjugation
        let c = conjugated_inverse_apply(2.0, &f.conj()).unwrap().conj();
        let d = conjugated_inverse_apply(2.0, &f).unwrap();
        assert_eq!(c.data, d.data);
    }

    #[test]
    fn rejects_resonant_and_unbounded_support() {
        let ax = AxialGrid::with_spacing(2.0, 0.05).unwrap();
        let f = LayeredFunction::separable(vec![(0, 0)], &[c64::new(1.0, 0.0)], ax.clone(), |t| (-t * t).exp());
        assert!(conjugated_inverse_apply(1.3, &f).is_err());
        let g = LayeredFunction::separable(vec![(0, 0)], &[c64::new(1.0, 0.0)], ax, bump);
        assert!(matches!(conjugated_inverse_apply(2.2, &g), Err(LandauError::Resonant { .. })));
    }
}
