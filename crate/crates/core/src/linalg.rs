//! Thin wrappers over faer for the Hermitian eigenproblems and norms used throughout.

use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LandauError, Result};

pub type CMat = Mat<c64>;

/// Pins faer to sequential kernels so reductions are reproducible bit for bit.
pub fn deterministic() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LandauError::EigenSolver(format!("{e:?}")))?;
    let n = a.nrows();
    let s = e.S();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LandauError::EigenSolver(format!("{e:?}")))
}

/// Square root of a positive semidefinite Hermitian matrix; tiny negative
/// eigenvalues from round-off are clipped to zero.
pub fn psd_sqrt(a: &CMat) -> Result<CMat> {
    let (vals, u) = hermitian_eigen(a)?;
    let n = a.nrows();
    let s: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let us = Mat::from_fn(n, n, |i, k| u[(i, k)] * s[k]);
    Ok(&us * u.adjoint())
}

/// Lower Cholesky factor of a Hermitian positive definite matrix, None if the
/// factorization breaks down.
pub fn cholesky_lower(a: &CMat) -> Option<CMat> {
    a.llt(Side::Lower).ok().map(|f| f.L().to_owned())
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = a
        .singular_values()
        .map_err(|e| LandauError::EigenSolver(format!("{e:?}")))?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// max |A - A^*| relative to max |A| (0 for the zero matrix).
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut scale = 0.0f64;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(a[(i, j)].norm());
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

pub fn diag_scale(d: &[c64], a: &CMat, e: &[c64]) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| d[i] * a[(i, j)] * e[j])
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm of a matrix-free map by power iteration on A^*A.
/// Returns (estimate, iterations). The estimate increases monotonically toward the norm.
pub fn power_norm<F, G>(n: usize, apply: F, apply_adj: G, seed: u64, tol: f64, max_iter: usize) -> (f64, usize)
where
    F: Fn(&[c64]) -> Vec<c64>,
    G: Fn(&[c64]) -> Vec<c64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<c64> = (0..n)
        .map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut est = 0.0;
    for it in 1..=max_iter {
        let av = apply(&v);
        let new = vec_norm(&av);
        let w = apply_adj(&av);
        let nw = vec_norm(&w);
        if nw == 0.0 {
            return (new, it);
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if (new - est).abs() <= tol * new.max(f64::MIN_POSITIVE) {
            return (new, it);
        }
        est = new;
    }
    (est, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(n: usize) -> CMat {
        Mat::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let re = ((a * 1.7 + b * 0.3).sin() + if i == j { 3.0 } else { 0.0 }) * 0.5;
            let im = if i == j { 0.0 } else { (a - b).cos() * if i < j { 0.2 } else { -0.2 } };
            c64::new(re, im)
        })
    }

    #[test]
    fn eigen_reconstructs() {
        let a = sample_hermitian(9);
        let (vals, u) = hermitian_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..9 {
            for j in 0..9 {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..9 {
                    acc += u[(i, k)] * vals[k] * u[(j, k)].conj();
                }
                assert!((acc - a[(i, j)]).norm() < 1e-12);
            }
        }
        assert!(hermitian_defect(&a) < 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let b = sample_hermitian(7);
        let a = &b * &b;
        let s = psd_sqrt(&a).unwrap();
        let s2 = &s * &s;
        for i in 0..7 {
            for j in 0..7 {
                assert!((s2[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn power_matches_svd() {
        let a = Mat::from_fn(6, 6, |i, j| c64::new((i * 3 + j) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.1));
        let exact = spectral_norm(&a).unwrap();
        let apply = |v: &[c64]| (0..6).map(|i| (0..6).map(|j| a[(i, j)] * v[j]).sum()).collect();
        let adj = |v: &[c64]| (0..6).map(|j| (0..6).map(|i| a[(i, j)].conj() * v[i]).sum()).collect();
        let (est, _) = power_norm(6, apply, adj, 7, 1e-14, 5000);
        assert!((est - exact).abs() < 1e-8 * exact);
    }
}
