mod common;

use std::f64::consts::PI;

use zeeman_core::cavity_optics::CavityGeometry;
use zeeman_core::constants::{ghz_to_rad_per_s, rad_per_s_to_ghz};
use zeeman_core::polariton_analysis::{zero_detuning_field, AnalysisSettings};
use zeeman_core::spin_ladder::SpinSystem;
use zeeman_core::vrs_fitting::{fit_g0, simulate_vrs_curve, FitOptions, VrsDataset, VrsPoint};

struct Setup {
    sys: SpinSystem,
    geometry: CavityGeometry,
    j: usize,
    field: f64,
}

fn sample_one() -> Setup {
    let sys = common::sample_one_spins();
    let geometry = CavityGeometry::sample_one();
    let field = zero_detuning_field(&sys, 2.0 * PI * geometry.mode_frequency(1), 100.0).unwrap();
    Setup { sys, geometry, j: 1, field }
}

fn sample_two() -> Setup {
    let sys = common::sample_two_spins();
    let geometry = CavityGeometry::sample_two();
    let field = zero_detuning_field(&sys, 2.0 * PI * geometry.mode_frequency(2), 100.0).unwrap();
    Setup { sys, geometry, j: 2, field }
}

fn synthetic(setup: &Setup, g0_ghz: f64, gamma_ghz: f64, temperatures: &[f64]) -> Vec<VrsPoint> {
    simulate_vrs_curve(
        &setup.sys,
        &setup.geometry,
        setup.j,
        setup.field,
        ghz_to_rad_per_s(g0_ghz),
        ghz_to_rad_per_s(gamma_ghz),
        temperatures,
        &AnalysisSettings::default(),
    )
    .unwrap()
    .into_iter()
    .map(|(t, s)| VrsPoint { temperature: t, vrs: s.separation_or_zero(), uncertainty: None })
    .collect()
}

fn dataset(setup: &Setup, points: Vec<VrsPoint>) -> VrsDataset {
    VrsDataset::new(points, setup.geometry, setup.j, setup.field, 65e9).unwrap()
}

#[test]
fn sample_one_curve_decreases_over_resolved_points() {
    let setup = sample_one();
    let curve = simulate_vrs_curve(
        &setup.sys,
        &setup.geometry,
        1,
        setup.field,
        ghz_to_rad_per_s(47.5),
        ghz_to_rad_per_s(80.0),
        &[1.5, 50.0, 100.0, 150.0],
        &AnalysisSettings::default(),
    )
    .unwrap();
    let separations: Vec<f64> = curve.iter().map(|(_, s)| s.separation_or_zero()).collect();
    assert!(separations.windows(2).all(|w| w[1] <= w[0]), "{separations:?}");
    assert!(separations[0] > separations[1]);
    assert!(curve[0].1.is_resolved());
}

#[test]
fn sample_two_round_trip() {
    let setup = sample_two();
    let temperatures = [12.0, 50.0, 100.0, 150.0, 235.0, 300.0];
    let d = dataset(&setup, synthetic(&setup, 79.3, 80.0, &temperatures));
    let fit = fit_g0(&d, &setup.sys, &FitOptions::default()).unwrap();
    assert!((rad_per_s_to_ghz(fit.g0) - 79.3).abs() < 1.0, "{fit:?}");
    assert!(fit.g0_uncertainty.is_some());
}

#[test]
fn fits_are_deterministic() {
    let setup = sample_one();
    let mut points = synthetic(&setup, 47.5, 80.0, &[1.5, 5.0, 10.0, 20.0, 30.0]);
    for (k, p) in points.iter_mut().enumerate() {
        p.vrs *= 1.0 + 0.02 * if k % 2 == 0 { 1.0 } else { -1.0 };
    }
    let d = dataset(&setup, points);
    let a = fit_g0(&d, &setup.sys, &FitOptions::default()).unwrap();
    let b = fit_g0(&d, &setup.sys, &FitOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn censored_rows_do_not_change_the_fit() {
    let setup = sample_one();
    let resolved = synthetic(&setup, 47.5, 80.0, &[1.5, 5.0, 10.0, 20.0]);
    let mut with_censored = resolved.clone();
    with_censored.push(VrsPoint { temperature: 150.0, vrs: 20e9, uncertainty: None });
    with_censored.push(VrsPoint { temperature: 200.0, vrs: 0.0, uncertainty: None });
    let a = fit_g0(&dataset(&setup, resolved), &setup.sys, &FitOptions::default()).unwrap();
    let b = fit_g0(&dataset(&setup, with_censored), &setup.sys, &FitOptions::default()).unwrap();
    assert_eq!(a.g0, b.g0);
    assert_eq!(a.residuals.len(), b.residuals.len());
}

#[test]
fn uncertainties_weight_the_residuals() {
    let setup = sample_one();
    let mut points = synthetic(&setup, 47.5, 80.0, &[1.5, 5.0, 10.0, 20.0, 30.0]);
    // one badly off point with a huge error bar barely moves the fit
    points[4].vrs *= 1.3;
    for (k, p) in points.iter_mut().enumerate() {
        p.uncertainty = Some(if k == 4 { 1e12 } else { 1e9 });
    }
    let fit = fit_g0(&dataset(&setup, points), &setup.sys, &FitOptions::default()).unwrap();
    assert!((rad_per_s_to_ghz(fit.g0) - 47.5).abs() < 0.1, "{fit:?}");
}

#[test]
fn free_gamma_round_trip() {
    let setup = sample_two();
    let temperatures = [12.0, 25.0, 50.0, 75.0, 100.0, 150.0, 200.0, 235.0, 300.0];
    let d = dataset(&setup, synthetic(&setup, 79.3, 120.0, &temperatures));
    let options = FitOptions {
        free_gamma: true,
        g0_initial: ghz_to_rad_per_s(60.0),
        gamma_initial: ghz_to_rad_per_s(80.0),
        max_iterations: 400,
        ..FitOptions::default()
    };
    let fit = fit_g0(&d, &setup.sys, &options).unwrap();
    assert!(fit.gamma_free);
    assert!((rad_per_s_to_ghz(fit.g0) - 79.3).abs() < 1.0, "{fit:?}");
    assert!((rad_per_s_to_ghz(fit.gamma) - 120.0).abs() < 10.0, "{fit:?}");
    assert!(fit.gamma_uncertainty.is_some());
}

#[test]
fn subsampling_never_raises_the_residual_norm_for_exact_data() {
    let setup = sample_two();
    let all = synthetic(&setup, 79.3, 80.0, &[12.0, 50.0, 100.0, 150.0, 235.0]);
    let full = fit_g0(&dataset(&setup, all.clone()), &setup.sys, &FitOptions::default()).unwrap();
    let sub = fit_g0(&dataset(&setup, all[..3].to_vec()), &setup.sys, &FitOptions::default()).unwrap();
    assert!(sub.residual_norm <= full.residual_norm + 1e6);
}
