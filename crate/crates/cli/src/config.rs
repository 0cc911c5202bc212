//! Experiment configuration. One TOML file drives every subcommand; each subcommand
//! reads its own table and ignores the others. Missing tables take the defaults below.

use std::path::Path;

use landau_core::potential::PotentialSpec;
use landau_core::resolvent3d::SumLattice;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub out_dir: Option<String>,
    pub tolerances: Tolerances,
    pub spectrum: SpectrumConfig,
    pub clusters: ClustersConfig,
    pub sharpness: SharpnessConfig,
    pub projnorm: ProjnormConfig,
    pub lap: LapConfig,
    pub sumbound: SumboundConfig,
    pub carleman: CarlemanConfig,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            out_dir: None,
            tolerances: Tolerances::default(),
            spectrum: SpectrumConfig::default(),
            clusters: ClustersConfig::default(),
            sharpness: SharpnessConfig::default(),
            projnorm: ProjnormConfig::default(),
            lap: LapConfig::default(),
            sumbound: SumboundConfig::default(),
            carleman: CarlemanConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// FD level vs 2k+1, relative
    pub level_rel: f64,
    /// orthonormality and kernel-sum agreement
    pub basis_abs: f64,
    /// |fitted slope - predicted exponent|
    pub slope: f64,
    /// relative width change under window doubling
    pub window_change: f64,
    /// floor for the Birman-Schwinger norm at computed eigenvalues
    pub bs_floor: f64,
    pub sum_ratio_max: f64,
    /// relative change under lattice refinement or K_max doubling
    pub sum_stability: f64,
    pub lap_stabilization: f64,
    pub multiplier_abs: f64,
    pub round_trip: f64,
    /// minimum observed order of the round-trip residual under halving h
    pub round_trip_order: f64,
    pub carleman_refine: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            level_rel: 0.01,
            basis_abs: 1e-6,
            slope: 0.15,
            window_change: 0.01,
            bs_floor: 0.95,
            sum_ratio_max: 10.0,
            sum_stability: 0.05,
            lap_stabilization: 0.05,
            multiplier_abs: 1e-8,
            round_trip: 1e-3,
            round_trip_order: 1.8,
            carleman_refine: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdConfig {
    pub half_width: f64,
    pub h: f64,
    pub k_max: u32,
    /// eigenvalues kept within this distance of the shift
    pub window: f64,
    pub block: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { half_width: 7.0, h: 0.05, k_max: 4, window: 0.1, block: 48 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub fd: FdConfig,
    pub potential: PotentialSpec,
    /// Galerkin angular cutoff and neighboring levels per side
    pub m_max: u32,
    pub window: u32,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { fd: FdConfig::default(), potential: PotentialSpec::zero(2.0), m_max: 20, window: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub radial_density: f64,
    pub window: u32,
    pub m_extra: u32,
}

impl PolicyConfig {
    pub fn policy(&self) -> landau_core::cluster::GridPolicy {
        landau_core::cluster::GridPolicy {
            radial_density: self.radial_density,
            window: self.window,
            m_extra: self.m_extra,
            ..Default::default()
        }
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { radial_density: 8.0, window: 2, m_extra: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationConfig {
    pub k0: Vec<u32>,
    /// must be non-positive; its Lebesgue exponent is irrelevant here
    pub potential: PotentialSpec,
    pub m_max: u32,
    /// extra levels above k0 in the Birman-Schwinger truncation
    pub levels_above: u32,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self { k0: vec![2, 3, 5], potential: PotentialSpec::gaussian(0.8, 1.0, 2.0), m_max: 24, levels_above: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClustersConfig {
    pub k0: Vec<u32>,
    /// the potential's own `r` is replaced by each entry
    pub rs: Vec<f64>,
    pub potential: PotentialSpec,
    pub policy: PolicyConfig,
    pub localization: LocalizationConfig,
}

impl Default for ClustersConfig {
    fn default() -> Self {
        Self {
            k0: vec![8, 12, 16, 20, 24, 32, 40],
            rs: vec![1.5, 3.0],
            potential: PotentialSpec::gaussian(1.0, 1.0, 1.5),
            policy: PolicyConfig { m_extra: 24, ..Default::default() },
            localization: LocalizationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpnessConfig {
    pub k0: Vec<u32>,
    pub r: f64,
    pub policy: PolicyConfig,
    pub restarts: usize,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        Self { k0: vec![8, 12, 16, 20, 24, 32, 40], r: 1.5, policy: PolicyConfig::default(), restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjnormConfig {
    pub k: Vec<u32>,
    pub qs: Vec<f64>,
    pub m_extra: u32,
    pub random_starts: usize,
    pub radial_density: f64,
}

impl Default for ProjnormConfig {
    fn default() -> Self {
        Self { k: vec![4, 8, 12, 16, 20, 24, 32, 40], qs: vec![4.0, 6.0], m_extra: 16, random_starts: 1, radial_density: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LapConfig {
    pub j: [f64; 2],
    pub n_lambda: usize,
    pub eps: Vec<f64>,
    /// axial spacing and half-length of the test pair
    pub h: f64,
    pub axial_half: f64,
    pub amplitude: f64,
    pub planar_width: f64,
    pub axial_width: f64,
    pub k_max: u32,
    pub q: f64,
}

impl Default for LapConfig {
    fn default() -> Self {
        Self {
            j: [3.5, 4.5],
            n_lambda: 3,
            eps: vec![1e-3, 1e-4],
            h: 0.05,
            axial_half: 8.0,
            amplitude: 0.2,
            planar_width: 1.0,
            axial_width: 1.0,
            k_max: 10,
            q: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SumboundConfig {
    pub lattice: SumLattice,
}

impl Default for SumboundConfig {
    fn default() -> Self {
        Self { lattice: SumLattice::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarlemanConfig {
    pub d: u32,
    /// closed form vs quadrature lattice
    pub quad_t: Vec<f64>,
    pub quad_tau: Vec<f64>,
    pub quad_k: Vec<u32>,
    /// pointwise bound lattice: tau = tau_step * i, t = t_step * j, k < k_count
    pub bound_tau_step: f64,
    pub bound_tau_count: usize,
    pub bound_t_step: f64,
    pub bound_t_count: usize,
    pub bound_k_count: u32,
    /// multiplier-sum sweep, t log-spaced on [t_min, t_max]
    pub sum_tau: Vec<f64>,
    pub sum_t_min: f64,
    pub sum_t_max: f64,
    pub sum_t_count: usize,
    /// round trip through the conjugated inverse at h and h/2
    pub round_trip_tau: f64,
    pub round_trip_h: f64,
    /// ratio sweep: tau in [tau_min, tau_max] with step tau_step, on I
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub interval: [f64; 2],
    pub ratio_h: f64,
}

impl Default for CarlemanConfig {
    fn default() -> Self {
        Self {
            d: 3,
            quad_t: vec![-4.0, -1.1, -0.3, 0.05, 0.7, 2.5, 6.0],
            quad_tau: vec![0.6, 1.3, 1.366, 2.0, 5.1, -1.3],
            quad_k: vec![0, 1, 2, 5, 12],
            bound_tau_step: 0.2,
            bound_tau_count: 40,
            bound_t_step: 0.25,
            bound_t_count: 30,
            bound_k_count: 60,
            sum_tau: vec![0.6, 1.366, 2.0, 5.1],
            sum_t_min: 0.01,
            sum_t_max: 10.0,
            sum_t_count: 13,
            round_trip_tau: 1.3,
            round_trip_h: 0.02,
            tau_min: 0.8,
            tau_max: 8.0,
            tau_step: 0.1,
            interval: [-1.0, 1.0],
            ratio_h: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub fd: FdConfig,
    /// orthonormality and kernel checks over k <= k_max, m <= m_max
    pub k_max: u32,
    pub m_max: u32,
    /// kernel points on a square lattice of this half-width
    pub kernel_half: f64,
    pub kernel_points: usize,
    pub kernel_m_sum: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            fd: FdConfig { h: 0.1, k_max: 2, ..Default::default() },
            k_max: 6,
            m_max: 8,
            kernel_half: 4.0,
            kernel_points: 5,
            kernel_m_sum: 200,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

fn at_least_four(name: &str, n: usize) -> CliResult<()> {
    if n >= 4 {
        Ok(())
    } else {
        Err(invalid(format!("{name} needs at least 4 entries for a fit, got {n}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical text; the config hash is taken over this, so formatting and comments
    /// in the source file do not change it.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("schema_version {} unsupported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let t = &self.tolerances;
        for (name, x) in [
            ("level_rel", t.level_rel),
            ("basis_abs", t.basis_abs),
            ("slope", t.slope),
            ("window_change", t.window_change),
            ("bs_floor", t.bs_floor),
            ("sum_ratio_max", t.sum_ratio_max),
            ("sum_stability", t.sum_stability),
            ("lap_stabilization", t.lap_stabilization),
            ("multiplier_abs", t.multiplier_abs),
            ("round_trip", t.round_trip),
            ("round_trip_order", t.round_trip_order),
            ("carleman_refine", t.carleman_refine),
        ] {
            positive(&format!("tolerances.{name}"), x)?;
        }

        for (name, fd) in [("spectrum.fd", &self.spectrum.fd), ("verify.fd", &self.verify.fd)] {
            positive(&format!("{name}.half_width"), fd.half_width)?;
            positive(&format!("{name}.h"), fd.h)?;
            positive(&format!("{name}.window"), fd.window)?;
            if fd.block == 0 {
                return Err(invalid(format!("{name}.block must be positive")));
            }
        }
        let core = |name: &str, e: landau_core::LandauError| invalid(format!("{name}: {e}"));
        self.spectrum.potential.validate().map_err(|e| core("spectrum.potential", e))?;

        let c = &self.clusters;
        at_least_four("clusters.k0", c.k0.len())?;
        if c.rs.is_empty() || c.rs.iter().any(|&r| !(r >= 1.0) || !r.is_finite()) {
            return Err(invalid("clusters.rs must be non-empty with entries in [1, inf)"));
        }
        c.potential.validate().map_err(|e| core("clusters.potential", e))?;
        c.localization.potential.validate().map_err(|e| core("clusters.localization.potential", e))?;
        if c.localization.potential.sign != landau_core::potential::Sign::Negative {
            return Err(invalid("clusters.localization.potential must have sign = \"negative\""));
        }
        if c.localization.k0.is_empty() {
            return Err(invalid("clusters.localization.k0 is empty"));
        }

        at_least_four("sharpness.k0", self.sharpness.k0.len())?;
        if !(self.sharpness.r > 1.0) || !self.sharpness.r.is_finite() {
            return Err(invalid(format!("sharpness.r = {} must be in (1, inf)", self.sharpness.r)));
        }
        if self.sharpness.restarts == 0 {
            return Err(invalid("sharpness.restarts must be positive"));
        }

        let p = &self.projnorm;
        at_least_four("projnorm.k", p.k.len())?;
        if p.qs.is_empty() || p.qs.iter().any(|&q| !(q > 2.0) || !q.is_finite()) {
            return Err(invalid("projnorm.qs must be non-empty with entries in (2, inf)"));
        }
        positive("projnorm.radial_density", p.radial_density)?;

        let l = &self.lap;
        if !(l.j[0] <= l.j[1]) {
            return Err(invalid("lap.j must be an ordered pair"));
        }
        if l.eps.len() < 2 || l.eps.iter().any(|&e| e == 0.0 || !(e.abs() <= 1.0)) {
            return Err(invalid("lap.eps needs at least two entries in [-1, 1] \\ {0}"));
        }
        positive("lap.h", l.h)?;
        positive("lap.axial_half", l.axial_half)?;
        positive("lap.planar_width", l.planar_width)?;
        positive("lap.axial_width", l.axial_width)?;
        if !(l.amplitude >= 0.0) {
            return Err(invalid("lap.amplitude must be non-negative"));
        }

        let s = &self.sumbound.lattice;
        if s.qs.is_empty() || s.k0s.is_empty() || s.deltas.is_empty() || s.thetas.is_empty() || s.t_count == 0 {
            return Err(invalid("sumbound.lattice has an empty axis"));
        }
        positive("sumbound.lattice.t_min", s.t_min)?;
        if !(s.t_max >= s.t_min) {
            return Err(invalid("sumbound.lattice.t_max below t_min"));
        }

        let k = &self.carleman;
        if k.d < 3 || k.d % 2 == 0 {
            return Err(invalid(format!("carleman.d = {} must be odd and >= 3", k.d)));
        }
        if k.quad_t.iter().any(|&t| t == 0.0) {
            return Err(invalid("carleman.quad_t must avoid t = 0"));
        }
        positive("carleman.round_trip_h", k.round_trip_h)?;
        positive("carleman.ratio_h", k.ratio_h)?;
        positive("carleman.tau_step", k.tau_step)?;
        positive("carleman.bound_tau_step", k.bound_tau_step)?;
        positive("carleman.bound_t_step", k.bound_t_step)?;
        positive("carleman.sum_t_min", k.sum_t_min)?;
        if !(k.tau_min <= k.tau_max) || !(k.interval[0] < k.interval[1]) || !(k.sum_t_min <= k.sum_t_max) {
            return Err(invalid("carleman ranges must be ordered"));
        }
        if k.sum_t_count == 0 {
            return Err(invalid("carleman.sum_t_count must be positive"));
        }

        let v = &self.verify;
        positive("verify.kernel_half", v.kernel_half)?;
        if v.kernel_points < 2 {
            return Err(invalid("verify.kernel_points must be >= 2"));
        }
        Ok(())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.canonical()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn schema_violations() {
        assert!(ExperimentConfig::from_toml("schema_version = 2").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("[projnorm]\nk = [4, 8]").is_err());
        assert!(ExperimentConfig::from_toml("[carleman]\nd = 4").is_err());
        assert!(ExperimentConfig::from_toml("[spectrum.fd]\nh = -0.1").is_err());
    }

    #[test]
    fn potential_tables_parse() {
        let cfg = ExperimentConfig::from_toml(
            "[clusters.potential]\nfamily = \"bump\"\nradius = 2.0\nr = 3.0\nsign = \"signed\"\nscale = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.clusters.potential.scale, 0.5);
        assert!(ExperimentConfig::from_toml("[clusters.potential]\nfamily = \"gaussian\"\nwidth = -1.0\nr = 2.0\nsign = \"negative\"\nscale = 1.0\n").is_err());
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a = ExperimentConfig::from_toml("seed = 3\n").unwrap();
        let b = ExperimentConfig::from_toml("# comment\nseed   =   3").unwrap();
        let c = ExperimentConfig::from_toml("seed = 4").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
