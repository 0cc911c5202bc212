//! Birman-Schwinger certificate that the extremal potential pushes an eigenvalue a
//! distance ~ ||W P W|| below the level.
//!
//! For V = -W^2 and E in the gap below lambda_k0, H has eigenvalue E iff W R_0(E) W has
//! eigenvalue 1, and the eigenvalues of W R_0(E) W increase with E. So a top eigenvalue
//! mu >= 1 at a = lambda_k0 - value/2 forces an eigenvalue of H in [lambda_k0 - 1, a].

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::cluster::assemble::{galerkin_matrix, level_channels, AngularModes};
use crate::cluster::birman::{abs_galerkin_blocks, bs_block, resolvent_diag};
use crate::cluster::spectrum::cluster_spectrum;
use crate::error::Result;
use crate::exponent::rho;
use crate::grid::PolarGrid;
use crate::level::{BasisTruncation, LevelIndex};
use crate::linalg::{cholesky_lower, diag_scale, hermitian_eigenvalues};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCertificate {
    pub k0: u32,
    pub r: f64,
    /// ||W P_k0 W|| (top eigenvalue of P_k0 |V| P_k0)
    pub value: f64,
    pub c0: f64,
    pub a: f64,
    /// top eigenvalue on level k0 alone (2 by construction)
    pub mu0: f64,
    /// top eigenvalue of W R_0(a) W over levels 0..=k_max; dropping the levels above
    /// k_max only removes positive terms, so this is a lower bound for the full operator
    pub mu: f64,
    /// lowest eigenvalue of H found in [lambda_k0 - 1, a]
    pub eigenvalue: Option<f64>,
    /// delta_max of the cluster
    pub width: f64,
    pub passed: bool,
}

pub fn sharpness_certificate(
    k0: LevelIndex,
    v: &PotentialSpec,
    grid: &PolarGrid<f64>,
    trunc: BasisTruncation,
    window: u32,
) -> Result<SharpnessCertificate> {
    k0.require_planar()?;
    grid.require_calibrated(trunc.k_max, trunc.m_max)?;
    let lam = k0.eigenvalue();
    let q = 2.0 * v.r / (v.r - 1.0);
    let rho_q = rho(2, q)?;

    let abs: Vec<f64> = v.sample(grid)?.into_iter().map(f64::abs).collect();
    let modes = AngularModes::new(grid, &abs);
    let ch = level_channels(k0.k, k0.k, trunc.m_max);
    let table = grid.radial_table(k0.k, k0.k, trunc.m_max)?;
    let g0 = galerkin_matrix(grid, &table, &ch, &modes, modes.is_radial(1e-12))?;
    let value = hermitian_eigenvalues(&g0)?.last().cloned().unwrap_or(0.0).max(0.0);

    let cluster = cluster_spectrum(k0, v, trunc, grid, window)?;
    if value <= 0.0 {
        return Ok(SharpnessCertificate {
            k0: k0.k,
            r: v.r,
            value,
            c0: 0.0,
            a: lam,
            mu0: 0.0,
            mu: 0.0,
            eigenvalue: None,
            width: cluster.delta_max,
            passed: false,
        });
    }
    let a = lam - value / 2.0;
    let mu0 = value / (lam - a);
    let mut mu = f64::NEG_INFINITY;
    for (chs, g) in abs_galerkin_blocks(grid, v, trunc)? {
        let d = resolvent_diag(&chs, c64::new(a, 0.0));
        // with G = L L^*, L^* D L is unitarily similar to G^(1/2) D G^(1/2)
        let k = match cholesky_lower(&g) {
            Some(l) => {
                let dl = diag_scale(&d, &l, &vec![c64::new(1.0, 0.0); d.len()]);
                l.adjoint() * &dl
            }
            None => bs_block(&g, &d)?,
        };
        let top = hermitian_eigenvalues(&k)?.last().cloned().unwrap_or(f64::NEG_INFINITY);
        mu = mu.max(top);
    }
    let eigenvalue = cluster
        .eigenvalues
        .iter()
        .cloned()
        .filter(|&e| e >= lam - 1.0 && e <= a)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |x| x.min(e))));
    Ok(SharpnessCertificate {
        k0: k0.k,
        r: v.r,
        value,
        c0: value / lam.powf(rho_q),
        a,
        mu0,
        mu,
        eigenvalue,
        width: cluster.delta_max,
        passed: mu >= 1.0 && eigenvalue.is_some(),
    })
}
