use landau_core::cluster::projnorm::projnorm_grid;
use landau_core::cluster::{projection_norm_estimate, sharp_sweep, upper_sweep, ExtremalOptions, GridPolicy, ProjNormOptions};
use landau_core::exponent::rho;
use landau_core::fit::fit_power_law;
use landau_core::potential::PotentialSpec;
use landau_core::LevelIndex;

#[test]
fn projection_norm_slope_q4() {
    let samples: Vec<(f64, f64)> = [4u32, 8, 16, 24, 32]
        .iter()
        .map(|&k| {
            let g = projnorm_grid(k, 16, 4.0, 8.0).unwrap();
            let e = projection_norm_estimate(LevelIndex::planar(k), 4.0, &g, &ProjNormOptions::default()).unwrap();
            assert!(e.converged);
            ((2 * k + 1) as f64, e.value)
        })
        .collect();
    let f = fit_power_law(&samples, rho(2, 4.0).unwrap()).unwrap();
    assert!(f.within(0.15), "slope {} vs {}", f.slope, f.predicted);
}

#[test]
fn sharp_widths_follow_critical_exponent() {
    let s = sharp_sweep(&[8, 10, 12, 16], 1.5, &GridPolicy::default(), &ExtremalOptions::default()).unwrap();
    assert!(s.all_certified);
    assert!(s.certificates.iter().all(|c| c.mu >= 1.0));
    assert!(s.extremal.iter().all(|e| (e.w_norm - 1.0).abs() < 1e-4));
    assert!(s.window_change < 0.01, "{}", s.window_change);
    assert!(s.fit.within(0.15), "slope {}", s.fit.slope);
}

#[test]
fn upper_bound_calibration_is_stable() {
    let p = GridPolicy { m_extra: 24, ..Default::default() };
    let s = upper_sweep(&[8, 12, 16, 24], &PotentialSpec::gaussian(1.0, 1.0, 1.5), &p).unwrap();
    assert!(s.c.is_finite() && s.c > 0.0);
    assert!(s.holds_all);
    assert_eq!(s.k_from, Some(8));
    assert!(s.window_change < 0.01);
    assert!((s.c_window_doubled - s.c).abs() <= 0.1 * s.c);
}
