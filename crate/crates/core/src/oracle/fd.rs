//! Finite-difference magnetic Hamiltonian (-i d_x + y/2)^2 + (-i d_y - x/2)^2 + V on a
//! square box with Dirichlet walls.
//!
//! Peierls discretization: the hop from x to a neighbour x' carries the phase
//! exp(-i int_x^{x'} A.dl) with A = (-y/2, x/2), which keeps the five-point stencil
//! gauge covariant and the matrix exactly Hermitian.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::linalg::{hermitian_eigen, CMat};
use crate::potential::PotentialSpec;

/// Below this many unknowns the spectrum is computed densely.
pub const DENSE_LIMIT: usize = 2500;
/// Ring mass above which an eigenvector counts as touching the wall.
pub const LEAK_TOL: f64 = 1e-4;
/// ||H x - theta x|| for unit Ritz vectors; bounds the eigenvalue error.
pub const RESIDUAL_TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdProblem {
    pub half_width: f64,
    pub h: f64,
    /// width of the boundary ring used for leak detection
    pub ring_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEigen {
    pub value: f64,
    pub ring_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCluster {
    pub k: u32,
    pub shift: f64,
    /// converged Ritz pairs nearest the shift, ascending
    pub all: Vec<FdEigen>,
    /// values of the pairs with ring mass below LEAK_TOL
    pub bulk: Vec<f64>,
}

impl FdCluster {
    pub fn center(&self) -> Option<f64> {
        if self.bulk.is_empty() {
            None
        } else {
            Some(self.bulk.iter().sum::<f64>() / self.bulk.len() as f64)
        }
    }

    pub fn relative_error(&self) -> Option<f64> {
        let l = (2 * self.k + 1) as f64;
        self.bulk.iter().map(|e| (e - l).abs() / l).fold(None, |a, e| Some(a.map_or(e, |a: f64| a.max(e))))
    }
}

impl FdProblem {
    pub fn new(half_width: f64, h: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(h > 0.0) || 2.0 * half_width / h < 4.0 {
            return Err(LandauError::InvalidGrid(format!("box half-width {half_width}, h {h}")));
        }
        Ok(Self { half_width, h, ring_width: 1.0f64.min(half_width / 4.0) })
    }

    /// interior nodes per side
    pub fn n_side(&self) -> usize {
        (2.0 * self.half_width / self.h).round() as usize - 1
    }

    pub fn unknowns(&self) -> usize {
        self.n_side().pow(2)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_side() + j
    }

    fn potential(&self, v: &PotentialSpec) -> Result<Vec<f64>> {
        if let crate::potential::PotentialFamily::Extremal { .. } = v.family {
            return Err(LandauError::InvalidInput("the FD oracle takes analytic potentials".into()));
        }
        v.validate()?;
        let n = self.n_side();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[self.index(i, j)] = v.value_at([self.coord(i), self.coord(j)]).unwrap_or(0.0);
            }
        }
        Ok(out)
    }

    /// (row, col, value) entries; i indexes x, j indexes y.
    fn entries(&self, v: &[f64]) -> Vec<(usize, usize, c64)> {
        let n = self.n_side();
        let h2 = self.h * self.h;
        let half = 0.5 * self.h;
        let mut out = Vec::with_capacity(5 * n * n);
        for i in 0..n {
            for j in 0..n {
                let a = self.index(i, j);
                let (x, y) = (self.coord(i), self.coord(j));
                out.push((a, a, c64::new(4.0 / h2 + v[a], 0.0)));
                // +x: int A_x dx = -y h/2, phase e^{+i y h/2}
                if i + 1 < n {
                    out.push((a, self.index(i + 1, j), -c64::from_polar(1.0, y * half) / h2));
                }
                if i > 0 {
                    out.push((a, self.index(i - 1, j), -c64::from_polar(1.0, -y * half) / h2));
                }
                // +y: int A_y dy = x h/2, phase e^{-i x h/2}
                if j + 1 < n {
                    out.push((a, self.index(i, j + 1), -c64::from_polar(1.0, -x * half) / h2));
                }
                if j > 0 {
                    out.push((a, self.index(i, j - 1), -c64::from_polar(1.0, x * half) / h2));
                }
            }
        }
        out
    }

    pub fn dense_matrix(&self, v: &PotentialSpec) -> Result<CMat> {
        let vals = self.potential(v)?;
        let n = self.unknowns();
        let mut m = CMat::zeros(n, n);
        for (r, c, x) in self.entries(&vals) {
            m[(r, c)] = x;
        }
        Ok(m)
    }

    fn sparse_matrix(&self, vals: &[f64], shift: f64) -> Result<SparseColMat<usize, c64>> {
        let n = self.unknowns();
        let trips: Vec<Triplet<usize, usize, c64>> = self
            .entries(vals)
            .into_iter()
            .map(|(r, c, x)| Triplet::new(r, c, if r == c { x - shift } else { x }))
            .collect();
        SparseColMat::try_new_from_triplets(n, n, &trips).map_err(|e| LandauError::EigenSolver(format!("{e:?}")))
    }

    fn ring_mass(&self, col: impl Fn(usize) -> c64) -> f64 {
        let n = self.n_side();
        let mut ring = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = col(self.index(i, j)).norm_sqr();
                total += p;
                let wall = (self.half_width - self.coord(i).abs()).min(self.half_width - self.coord(j).abs());
                if wall < self.ring_width {
                    ring += p;
                }
            }
        }
        ring / total
    }

    fn dense_pairs(&self, v: &PotentialSpec) -> Result<Vec<FdEigen>> {
        let (vals, u) = hermitian_eigen(&self.dense_matrix(v)?)?;
        Ok(vals.iter().enumerate().map(|(c, &value)| FdEigen { value, ring_mass: self.ring_mass(|r| u[(r, c)]) }).collect())
    }

    /// Ritz pairs selected by `keep` from subspace iteration with (H - shift)^(-1) on
    /// `block` vectors. Only the selected pairs must converge; wall states crowd the gaps
    /// between levels and the outer block members converge slowly.
    fn shift_invert(&self, v: &PotentialSpec, shift: f64, block: usize, keep: Keep, seed: u64) -> Result<Vec<FdEigen>> {
        let vals = self.potential(v)?;
        let n = self.unknowns();
        let lu = self.sparse_matrix(&vals, shift)?.sp_lu().map_err(|e| LandauError::EigenSolver(format!("{e:?}")))?;
        let entries = self.entries(&vals);
        let apply = |x: &CMat| {
            let mut y = CMat::zeros(n, x.ncols());
            for &(r, c, a) in &entries {
                for k in 0..x.ncols() {
                    y[(r, k)] += a * x[(c, k)];
                }
            }
            y
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Mat::from_fn(n, block, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        for _ in 0..MAX_SWEEPS {
            lu.solve_in_place(x.as_mut());
            let q = x.qr().compute_thin_Q();
            let hq = apply(&q);
            let small = q.adjoint() * &hq;
            let small = Mat::from_fn(block, block, |i, j| 0.5 * (small[(i, j)] + small[(j, i)].conj()));
            let (theta, s) = hermitian_eigen(&small)?;
            x = &q * &s;
            let hx = &hq * &s;
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&a, &b| (theta[a] - shift).abs().total_cmp(&(theta[b] - shift).abs()));
            let chosen: Vec<usize> = match keep {
                Keep::Nearest(m) => order[..m.min(block / 2)].to_vec(),
                Keep::Window(w) => order.iter().cloned().take_while(|&i| (theta[i] - shift).abs() <= w).collect(),
            };
            if let Keep::Window(w) = keep {
                if (theta[order[block - 1]] - shift).abs() <= 2.0 * w {
                    return Err(LandauError::EigenSolver(format!("block of {block} does not reach past twice the window {w}")));
                }
            }
            let residual = |c: usize| (0..n).map(|r| (hx[(r, c)] - x[(r, c)] * theta[c]).norm_sqr()).sum::<f64>().sqrt();
            if chosen.iter().all(|&c| residual(c) <= RESIDUAL_TOL) {
                let mut out: Vec<FdEigen> =
                    chosen.iter().map(|&c| FdEigen { value: theta[c], ring_mass: self.ring_mass(|r| x[(r, c)]) }).collect();
                out.sort_by(|a, b| a.value.total_cmp(&b.value));
                return Ok(out);
            }
        }
        Err(LandauError::EigenSolver("subspace iteration did not converge".into()))
    }

    fn pairs_near(&self, v: &PotentialSpec, shift: f64, block: usize, keep: Keep) -> Result<Vec<FdEigen>> {
        if self.unknowns() > DENSE_LIMIT {
            return self.shift_invert(v, shift, block, keep, 0);
        }
        let mut all = self.dense_pairs(v)?;
        all.sort_by(|a, b| (a.value - shift).abs().total_cmp(&(b.value - shift).abs()));
        match keep {
            Keep::Nearest(m) => all.truncate(m),
            Keep::Window(w) => all.retain(|p| (p.value - shift).abs() <= w),
        }
        all.sort_by(|a, b| a.value.total_cmp(&b.value));
        Ok(all)
    }
}

#[derive(Debug, Clone, Copy)]
enum Keep {
    Nearest(usize),
    Window(f64),
}

/// Lowest `count` eigenvalues of the discretized H_perp + V; fails if any of them has
/// ring mass above LEAK_TOL.
pub fn fd_spectrum(problem: &FdProblem, v: &PotentialSpec, count: usize) -> Result<Vec<f64>> {
    let vmin = problem.potential(v)?.into_iter().fold(0.0f64, f64::min);
    let shift = vmin + 0.5;
    let block = (2 * count).max(16);
    let pairs = problem.pairs_near(v, shift, block, Keep::Nearest(count))?;
    if let Some(bad) = pairs.iter().find(|p| p.ring_mass > LEAK_TOL) {
        return Err(LandauError::BoundaryLeak(bad.ring_mass));
    }
    Ok(pairs.into_iter().map(|p| p.value).collect())
}

/// Eigenpairs with |E - (2k + 1 + 0.013)| <= window (the offset keeps the factorization
/// nonsingular); bulk = ring mass below LEAK_TOL.
pub fn fd_cluster(problem: &FdProblem, v: &PotentialSpec, k: u32, window: f64, block: usize) -> Result<FdCluster> {
    let shift = (2 * k + 1) as f64 + 0.013;
    let all = problem.pairs_near(v, shift, block, Keep::Window(window))?;
    let bulk = all.iter().filter(|p| p.ring_mass < LEAK_TOL).map(|p| p.value).collect();
    Ok(FdCluster { k, shift, all, bulk })
}
