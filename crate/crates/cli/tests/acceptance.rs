//! One line per acceptance criterion on stderr, then the assertion. Each criterion runs
//! the same code path as the corresponding subcommand on the default configuration.

use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use landau_cli::experiments;
use landau_cli::{Check, CliResult, ExperimentConfig};

fn describe(checks: &[Check]) -> String {
    checks.iter().map(|c| format!("{}={:.3e}", c.name, c.value)).collect::<Vec<_>>().join(" ")
}

fn criterion(n: u32, title: &str, limit_s: f64, body: impl FnOnce() -> CliResult<Vec<Check>>) {
    let start = Instant::now();
    let result = body();
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = match &result {
        Ok(checks) => (checks.iter().all(|c| c.passed) && secs <= limit_s, describe(checks)),
        Err(e) => (false, format!("error: {e}")),
    };
    let mut err = std::io::stderr();
    writeln!(err, "criterion {n:>2} [{}] {title}: {detail} ({secs:.1} s, limit {limit_s:.0} s)", if ok { "PASS" } else { "FAIL" }).unwrap();
    if let Ok(checks) = &result {
        for c in checks.iter().filter(|c| !c.passed) {
            writeln!(err, "    failed: {} = {} vs {}", c.name, c.value, c.limit).unwrap();
        }
    }
    assert!(ok, "criterion {n} failed");
}

fn defaults() -> ExperimentConfig {
    landau_core::linalg::deterministic();
    ExperimentConfig::default()
}

#[test]
fn criterion_01_unperturbed_spectrum() {
    criterion(1, "FD levels 2k+1, k <= 4, box 14, h = 0.05", 120.0, || Ok(experiments::spectrum(&defaults())?.checks));
}

#[test]
fn criterion_02_basis_fidelity() {
    criterion(2, "orthonormality and kernel sum, k <= 6, m <= 8", 60.0, || Ok(experiments::basis_fidelity(&defaults())?.0));
}

#[test]
fn criterion_03_projection_norm_scaling() {
    criterion(3, "projection-norm slopes, q in {4, 6}, k in 4..40", 600.0, || Ok(experiments::projnorm(&defaults())?.checks));
}

#[test]
fn criterion_04_cluster_sharpness() {
    criterion(4, "extremal widths, r = 3/2, k0 in 8..40", 1200.0, || Ok(experiments::sharpness(&defaults())?.checks));
}

#[test]
fn criterion_05_cluster_upper_bound() {
    criterion(5, "calibrated upper bound, r in {3/2, 3}, k0 <= 40", 900.0, || Ok(experiments::upper_sweeps(&defaults())?.checks));
}

#[test]
fn criterion_06_birman_schwinger_localization() {
    criterion(6, "Birman-Schwinger norm at shifted eigenvalues", 300.0, || {
        let l = experiments::localization(&defaults())?;
        // the default potential must actually shift eigenvalues
        let mut checks = l.checks;
        checks.push(Check::at_least("shifted_eigenvalues", l.rows.len() as f64, 1.0));
        Ok(checks)
    });
}

#[test]
fn criterion_07_kernel_sum_bound() {
    criterion(7, "kernel-sum lattice ratio, refinement and K_max doubling", 300.0, || Ok(experiments::sumbound(&defaults())?.checks));
}

#[test]
fn criterion_08_lap_stabilization() {
    criterion(8, "LAP bilinear values at eps = 1e-3 vs 1e-4", 600.0, || Ok(experiments::lap(&defaults())?.checks));
}

#[test]
fn criterion_09_carleman() {
    criterion(9, "multiplier, pointwise bound, round trip, ratio sweep", 600.0, || Ok(experiments::carleman(&defaults())?.checks));
}

#[test]
fn criterion_10_reproducibility() {
    criterion(10, "identical config and seed give identical summary.json", 600.0, || {
        let dir = tempfile::tempdir()?;
        let cfg = dir.path().join("repro.toml");
        std::fs::write(
            &cfg,
            "seed = 11\n[projnorm]\nk = [2, 4, 6, 8]\nqs = [4.0]\nm_extra = 8\nrandom_starts = 2\n\n[sumbound.lattice]\nqs = [4.0]\nk0s = [5, 10]\nt_min = 0.1\nt_max = 5.0\nt_count = 3\ndeltas = [0.5]\nthetas = [0.5, 1.0]\n",
        )?;
        let mut checks = Vec::new();
        for sub in ["projnorm", "sumbound"] {
            let mut bytes = Vec::new();
            for run in 0..2 {
                let out = dir.path().join(format!("{sub}{run}"));
                let status = Command::new(env!("CARGO_BIN_EXE_landau-lab"))
                    .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                    .stderr(Stdio::null())
                    .status()?;
                checks.push(Check::holds(format!("{sub}_run{run}_exit_zero"), status.code() == Some(0)));
                bytes.push(std::fs::read(out.join("summary.json"))?);
            }
            checks.push(Check::holds(format!("{sub}_byte_identical"), bytes[0] == bytes[1]));
        }
        Ok(checks)
    });
}
