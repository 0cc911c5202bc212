//! Bilinear resolvent values <R(lambda + i eps) f, g> for V = 0 and a small separable
//! Gaussian V, with the perturbed resolvent from the Birman-Schwinger identity
//! R = R_0 + R_0 B (1 + Q)^(-1) B R_0, V = -B^2, Q = -B R_0 B.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::assemble::{angular_blocks, galerkin_matrix, AngularModes, Channel};
use crate::error::{LandauError, Result};
use crate::exponent::rho;
use crate::grid::PolarGrid;
use crate::linalg::{power_norm, vec_norm};
use crate::resolvent3d::layered::{check_energy, convolve, green_row, LayeredFunction};
use crate::resolvent3d::mixed::{mixed_norm_layered, MixedNormSpec, MixedSpace};
use crate::resolvent3d::threshold;

/// V(x, t) = -amplitude exp(-|x|^2 / (2 w^2)) exp(-t^2 / (2 w_d^2))
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapPotential {
    pub amplitude: f64,
    pub planar_width: f64,
    pub axial_width: f64,
    /// planar Landau levels kept when discretizing |V|^(1/2)
    pub k_max: u32,
}

impl LapPotential {
    /// ||V||_{V_q} in closed form: planar L^r times max of the two axial norms.
    pub fn vq_norm(&self, q: f64) -> Result<f64> {
        let r = q / (q - 2.0);
        let p = -1.0 / (2.0 * rho(3, q)?);
        let two_pi = 2.0 * std::f64::consts::PI;
        let planar = (two_pi * self.planar_width.powi(2) / r).powf(1.0 / r);
        let axial = |e: f64| (two_pi * self.axial_width.powi(2) / e).powf(1.0 / (2.0 * e));
        Ok(self.amplitude * planar * axial(p).max(axial(1.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapOptions {
    pub q: f64,
    pub gate_tol: f64,
    pub neumann_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LapOptions {
    fn default() -> Self {
        Self { q: 4.0, gate_tol: 1e-8, neumann_tol: 1e-12, max_iter: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapRow {
    pub lambda: f64,
    pub eps: f64,
    /// |<R f, g>| / (||f||_Xq ||g||_Xq)
    pub value: f64,
    pub f_norm: f64,
    pub g_norm: f64,
    /// perturbed run that passed the smallness gate
    pub gated: bool,
    pub free_value: f64,
    pub gate_norm: Option<f64>,
    /// ||B R_0 f|| ||B R_0(conj z) g|| / (1 - ||Q||), normalized like `value`
    pub series_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapScan {
    pub rows: Vec<LapRow>,
    /// max over lambda of the relative change between the two smallest eps
    pub stabilization: f64,
    pub vq_norm: Option<f64>,
}

/// Free resolvent at fixed z with the Green's function rows cached per level.
struct Free {
    rows: Vec<(u32, Vec<c64>)>,
    h: f64,
}

impl Free {
    fn new(z: c64, channels: &[Channel], h: f64, n: usize) -> Result<Self> {
        let mut rows: Vec<(u32, Vec<c64>)> = Vec::new();
        for &(k, _) in channels {
            if !rows.iter().any(|r| r.0 == k) {
                rows.push((k, green_row(z, k, h, n)?));
            }
        }
        Ok(Self { rows, h })
    }

    fn apply(&self, channels: &[Channel], data: &[Vec<c64>]) -> Vec<Vec<c64>> {
        channels
            .iter()
            .zip(data)
            .map(|(&(k, _), u)| convolve(&self.rows.iter().find(|r| r.0 == k).unwrap().1, u, self.h))
            .collect()
    }
}

/// Multiplication by |V|^(1/2) = S(x) b(t) in the channel basis.
struct Root {
    s: Vec<Vec<c64>>,
    b: Vec<f64>,
}

impl Root {
    fn apply(&self, data: &[Vec<c64>]) -> Vec<Vec<c64>> {
        let n = self.b.len();
        self.s
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| {
                        let mut acc = c64::new(0.0, 0.0);
                        for (c, d) in row.iter().zip(data) {
                            if *c != c64::new(0.0, 0.0) {
                                acc += c * d[j];
                            }
                        }
                        acc * self.b[j]
                    })
                    .collect()
            })
            .collect()
    }
}

fn flatten(d: &[Vec<c64>]) -> Vec<c64> {
    d.iter().flatten().cloned().collect()
}

fn unflatten(v: &[c64], n: usize) -> Vec<Vec<c64>> {
    v.chunks(n).map(|c| c.to_vec()).collect()
}

fn embed(f: &LayeredFunction, channels: &[Channel]) -> Vec<Vec<c64>> {
    channels
        .iter()
        .map(|c| match f.channels.iter().position(|d| d == c) {
            Some(i) => f.data[i].clone(),
            None => vec![c64::new(0.0, 0.0); f.axial.n],
        })
        .collect()
}

fn pair(a: &[Vec<c64>], b: &[Vec<c64>], h: f64) -> c64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| x * y.conj()).sum::<c64>() * h
}

/// Result of one perturbed evaluation, unnormalized.
pub struct Perturbed {
    pub free: c64,
    pub value: c64,
    pub gate_norm: f64,
    pub series_bound: f64,
    /// R(z) f on the working channels
    pub solution: LayeredFunction,
}

struct Setup {
    channels: Vec<Channel>,
    root: Option<Root>,
}

fn setup(f: &LayeredFunction, g: &LayeredFunction, grid: &PolarGrid<f64>, v: Option<&LapPotential>) -> Result<Setup> {
    if f.axial != g.axial {
        return Err(LandauError::InvalidInput("f and g must share the axial grid".into()));
    }
    let mut channels: Vec<Channel> = f.channels.clone();
    for c in &g.channels {
        if !channels.contains(c) {
            channels.push(*c);
        }
    }
    let Some(v) = v else {
        return Ok(Setup { channels, root: None });
    };
    // every level up to k_max in each angular momentum the data touches
    let ls: Vec<i64> = {
        let mut ls: Vec<i64> = channels.iter().map(|&(k, m)| m as i64 - k as i64).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    };
    for &l in &ls {
        for k in 0..=v.k_max {
            let m = k as i64 + l;
            if m >= 0 && !channels.contains(&(k, m as u32)) {
                channels.push((k, m as u32));
            }
        }
    }
    let k_max = channels.iter().map(|c| c.0).max().unwrap();
    let m_max = channels.iter().map(|c| c.1).max().unwrap();
    grid.require_calibrated(k_max, m_max)?;
    let table = grid.radial_table(0, k_max, m_max)?;
    let w = v.planar_width;
    let root_planar = grid.sample_real(|x| v.amplitude.sqrt() * (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * w * w)).exp());
    let modes = AngularModes::new(grid, &root_planar);
    let n = channels.len();
    let mut s = vec![vec![c64::new(0.0, 0.0); n]; n];
    for block in angular_blocks(&channels) {
        let ch: Vec<Channel> = block.iter().map(|&i| channels[i]).collect();
        let m = galerkin_matrix(grid, &table, &ch, &modes, true)?;
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                s[i][j] = m[(a, b)];
            }
        }
    }
    let wd = v.axial_width;
    let b = f.axial.nodes().iter().map(|t| (-t * t / (4.0 * wd * wd)).exp()).collect();
    Ok(Setup { channels, root: Some(Root { s, b }) })
}

fn evaluate(su: &Setup, z: c64, f: &LayeredFunction, g: &LayeredFunction, opts: &LapOptions) -> Result<Perturbed> {
    check_energy(z)?;
    let ax = f.axial.clone();
    let (h, n) = (ax.h(), ax.n);
    let ch = &su.channels;
    let fd = embed(f, ch);
    let gd = embed(g, ch);
    let free_z = Free::new(z, ch, h, n)?;
    let r0f = free_z.apply(ch, &fd);
    let free = pair(&r0f, &gd, h);
    let Some(root) = &su.root else {
        let solution = LayeredFunction { channels: ch.clone(), axial: ax, data: r0f };
        return Ok(Perturbed { free, value: free, gate_norm: 0.0, series_bound: 0.0, solution });
    };
    let free_zc = Free::new(z.conj(), ch, h, n)?;
    let q_apply = |fr: &Free, x: &[c64]| -> Vec<c64> {
        let d = unflatten(x, n);
        let y = root.apply(&fr.apply(ch, &root.apply(&d)));
        flatten(&y).into_iter().map(|c| -c).collect()
    };
    let dim = ch.len() * n;
    let (q_norm, _) = power_norm(dim, |x| q_apply(&free_z, x), |x| q_apply(&free_zc, x), opts.seed, opts.gate_tol, opts.max_iter);
    if !(q_norm < 1.0) {
        return Err(LandauError::GateFailed(q_norm));
    }
    let u = flatten(&root.apply(&r0f));
    let v = flatten(&root.apply(&free_zc.apply(ch, &gd)));
    // Neumann series for (1 + Q)^(-1) u
    let mut x = u.clone();
    let mut term = u.clone();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        term = q_apply(&free_z, &term).into_iter().map(|c| -c).collect();
        for (a, b) in x.iter_mut().zip(&term) {
            *a += b;
        }
        if vec_norm(&term) <= opts.neumann_tol * vec_norm(&x).max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LandauError::GateFailed(q_norm));
    }
    let corr: c64 = x.iter().zip(&v).map(|(a, b)| a * b.conj()).sum::<c64>() * h;
    let series_bound = vec_norm(&u) * vec_norm(&v) * h / (1.0 - q_norm);
    // R f = R_0 f + R_0 B x
    let r0bx = free_z.apply(ch, &root.apply(&unflatten(&x, n)));
    let data = r0f.iter().zip(&r0bx).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + q).collect()).collect();
    let solution = LayeredFunction { channels: ch.clone(), axial: ax, data };
    Ok(Perturbed { free, value: free + corr, gate_norm: q_norm, series_bound, solution })
}

/// One bilinear evaluation <R(z) f, g>, exposed for cross-checks.
pub fn perturbed_pairing(
    z: c64,
    f: &LayeredFunction,
    g: &LayeredFunction,
    grid: &PolarGrid<f64>,
    v: Option<&LapPotential>,
    opts: &LapOptions,
) -> Result<Perturbed> {
    let su = setup(f, g, grid, v)?;
    evaluate(&su, z, f, g, opts)
}

/// (H_0 - z + V) w on the working channels, V = -B^2, interior axial nodes.
pub fn apply_perturbed_operator(w: &LayeredFunction, z: c64, grid: &PolarGrid<f64>, v: &LapPotential) -> Result<LayeredFunction> {
    let su = setup(w, w, grid, Some(v))?;
    let root = su.root.as_ref().unwrap();
    let wd = embed(w, &su.channels);
    let full = LayeredFunction { channels: su.channels.clone(), axial: w.axial.clone(), data: wd };
    let mut out = full.apply_h0_minus(z);
    let bb = root.apply(&root.apply(&full.data));
    for (o, b) in out.data.iter_mut().zip(&bb) {
        for (x, y) in o.iter_mut().zip(b) {
            *x -= y;
        }
    }
    Ok(out)
}

fn check_interval(j: (f64, f64)) -> Result<()> {
    let (lo, hi) = j;
    if !(lo <= hi) {
        return Err(LandauError::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    // distance from [lo, hi] to the odd integers
    let k = ((lo - 1.0) / 2.0).ceil().max(0.0) as u32;
    let inside = threshold(k) <= hi;
    let dist = if inside {
        0.0
    } else {
        let below = if k > 0 { lo - threshold(k - 1) } else { f64::INFINITY };
        (threshold(k) - hi).min(below)
    };
    if dist < 0.1 {
        return Err(LandauError::InvalidInput(format!("interval [{lo}, {hi}] within {dist} of a threshold")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn lap_bilinear_scan(
    j: (f64, f64),
    n_lambda: usize,
    eps_list: &[f64],
    f: &LayeredFunction,
    g: &LayeredFunction,
    grid: &PolarGrid<f64>,
    v: Option<&LapPotential>,
    opts: &LapOptions,
) -> Result<LapScan> {
    check_interval(j)?;
    if eps_list.iter().any(|&e| e == 0.0 || !(e.abs() <= 1.0)) {
        return Err(LandauError::InvalidInput("eps must lie in [-1, 1] \\ {0}".into()));
    }
    let spec = MixedNormSpec::new(MixedSpace::Xq, opts.q)?;
    let f_norm = mixed_norm_layered(f, grid, &spec)?;
    let g_norm = mixed_norm_layered(g, grid, &spec)?;
    let norm = f_norm * g_norm;
    if !(norm > 0.0) {
        return Err(LandauError::Degenerate("test pair has zero Xq norm".into()));
    }
    let su = setup(f, g, grid, v)?;
    let lambdas: Vec<f64> = if n_lambda <= 1 {
        vec![0.5 * (j.0 + j.1)]
    } else {
        (0..n_lambda).map(|i| j.0 + (j.1 - j.0) * i as f64 / (n_lambda - 1) as f64).collect()
    };
    let jobs: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| eps_list.iter().map(move |&e| (l, e))).collect();
    let rows: Vec<Result<LapRow>> = jobs
        .par_iter()
        .map(|&(lambda, eps)| {
            let p = evaluate(&su, c64::new(lambda, eps), f, g, opts)?;
            Ok(LapRow {
                lambda,
                eps,
                value: p.value.norm() / norm,
                f_norm,
                g_norm,
                gated: v.is_some(),
                free_value: p.free.norm() / norm,
                gate_norm: v.map(|_| p.gate_norm),
                series_bound: v.map(|_| p.series_bound / norm),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut stabilization = 0.0f64;
    if eps_list.len() >= 2 {
        let mut order: Vec<usize> = (0..eps_list.len()).collect();
        order.sort_by(|&a, &b| eps_list[b].abs().partial_cmp(&eps_list[a].abs()).unwrap());
        let (pa, pb) = (order[order.len() - 2], order[order.len() - 1]);
        for (li, _) in lambdas.iter().enumerate() {
            let a = rows[li * eps_list.len() + pa].value;
            let b = rows[li * eps_list.len() + pb].value;
            stabilization = stabilization.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(LapScan { rows, stabilization, vq_norm: v.map(|v| v.vq_norm(opts.q)).transpose()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_POINT_BUDGET;
    use crate::resolvent3d::layered::AxialGrid;

    fn pair_setup() -> (PolarGrid<f64>, LayeredFunction, LayeredFunction) {
        pair_setup_h(0.05)
    }

    fn pair_setup_h(h: f64) -> (PolarGrid<f64>, LayeredFunction, LayeredFunction) {
        let grid = PolarGrid::for_basis(8, 9, 8.0, 16, 1e-8, DEFAULT_POINT_BUDGET).unwrap();
        let ax = AxialGrid::with_spacing(8.0, h).unwrap();
        let f = LayeredFunction::separable(vec![(0, 0), (1, 1)], &[c64::new(1.0, 0.0), c64::new(0.3, 0.0)], ax.clone(), |t| (-(t - 0.5).powi(2)).exp());
        let g = LayeredFunction::separable(vec![(0, 0), (1, 1)], &[c64::new(1.0, 0.0), c64::new(-0.2, 0.1)], ax, |t| (-(t + 0.5).powi(2)).exp());
        (grid, f, g)
    }

    fn small_v() -> LapPotential {
        LapPotential { amplitude: 0.3, planar_width: 1.0, axial_width: 1.0, k_max: 8 }
    }

    #[test]
    fn disjoint_channels_pair_to_zero() {
        let (grid, f, _) = pair_setup();
        let g = LayeredFunction::separable(vec![(2, 0)], &[c64::new(1.0, 0.0)], f.axial.clone(), |t| (-t * t).exp());
        let s = lap_bilinear_scan((3.5, 4.5), 3, &[1e-1, 1e-2], &f, &g, &grid, None, &LapOptions::default()).unwrap();
        assert!(s.rows.iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn interval_near_threshold_rejected() {
        let (grid, f, g) = pair_setup();
        assert!(lap_bilinear_scan((4.5, 4.95), 2, &[1e-2], &f, &g, &grid, None, &LapOptions::default()).is_err());
        assert!(lap_bilinear_scan((2.5, 3.5), 2, &[1e-2], &f, &g, &grid, None, &LapOptions::default()).is_err());
        assert!(check_interval((0.0, 0.85)).is_ok());
    }

    #[test]
    fn perturbed_solution_solves_the_equation() {
        let v = small_v();
        let z = c64::new(4.0, 0.05);
        let mut res = Vec::new();
        for h in [0.05, 0.025] {
            let (grid, f, g) = pair_setup_h(h);
            let p = perturbed_pairing(z, &f, &g, &grid, Some(&v), &LapOptions::default()).unwrap();
            assert!(p.gate_norm < 1.0);
            // the correction respects the series bound
            assert!((p.value - p.free).norm() <= p.series_bound * (1.0 + 1e-12));
            let back = apply_perturbed_operator(&p.solution, z, &grid, &v).unwrap();
            let target = embed(&f, &back.channels);
            let n = f.axial.n;
            let (mut err, mut scale) = (0.0f64, 0.0f64);
            for (b, t) in back.data.iter().zip(&target) {
                for j in 1..n - 1 {
                    err += (b[j] - t[j]).norm_sqr();
                    scale += t[j].norm_sqr();
                }
            }
            res.push((err / scale).sqrt());
        }
        assert!(res[1] < 1e-3, "{res:?}");
        assert!(res[0] / res[1] > 3.5, "{res:?}");
    }

    #[test]
    fn strong_potential_refused() {
        let (grid, f, g) = pair_setup();
        let v = LapPotential { amplitude: 400.0, ..small_v() };
        let r = perturbed_pairing(c64::new(4.0, 0.05), &f, &g, &grid, Some(&v), &LapOptions::default());
        assert!(matches!(r, Err(LandauError::GateFailed(x)) if x >= 1.0));
    }
}
