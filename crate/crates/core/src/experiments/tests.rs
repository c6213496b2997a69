use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::*;
use crate::dynamics::Trajectory;
use crate::spectral::divergence;

fn params(n: u32, s: f64, sigma: f64, t_end: f64) -> ApproxFamilyParams {
    ApproxFamilyParams {
        kappa: 1.0,
        n,
        s,
        sigma,
        d: 2,
        t_end,
    }
}

/// E(T) from the exact time integral: the family translates with velocity
/// (kappa/n)(1, 1), so each Fourier mode of r(0) picks up
/// int_0^T e^{-i theta t} dt with theta = kappa (m1 + m2) / n.
fn phase_integral_error(grid: &Arc<Grid>, p: &ApproxFamilyParams) -> State {
    let r0 = approx_residual(grid, p, 0.0).unwrap();
    let (n, t) = (p.n as f64, p.t_end);
    let weight = |xi: [f64; 2]| {
        let theta = p.kappa * (xi[0] + xi[1]) / n;
        if theta == 0.0 {
            Complex64::new(t, 0.0)
        } else {
            (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -theta * t).exp()) / Complex64::new(0.0, theta)
        }
    };
    State {
        u: r0.u.iter().map(|f| f.apply_multiplier(weight)).collect(),
        gamma: r0.gamma.apply_multiplier(weight),
    }
}

#[test]
fn family_example_values() {
    let g = Grid::new(2, 16).unwrap();
    let p = ApproxFamilyParams {
        s: 2.0,
        sigma: 1.0 + 1e-9,
        ..params(2, 2.0, 1.0, 1.0)
    };
    // sigma window is (1, min(s-1, 2)) = (1, 1): empty for s = 2
    assert!(p.validate().is_err());
    let p = ApproxFamilyParams {
        s: 2.5,
        sigma: 1.2,
        ..p
    };
    let y = approx_solution(&g, &p, 0.0).unwrap();
    let b = 2f64.powf(-2.5);
    let u1 = SpectralField::from_fn(&g, |x| 0.5 + b * (2.0 * x[1]).cos());
    let u2 = SpectralField::from_fn(&g, |x| 0.5 + b * (2.0 * x[0]).cos());
    assert!(y.u[0].max_abs_coeff_diff(&u1) < 1e-15);
    assert!(y.u[1].max_abs_coeff_diff(&u2) < 1e-15);
    assert!(divergence(&y.u).unwrap().max_abs_coeff() < 1e-15);
}

#[test]
fn family_is_bounded_in_the_measurement_norm() {
    let g = Grid::new(2, 512).unwrap();
    for n in [8, 16, 32, 64, 128] {
        let p = params(n, 2.5, 1.2, 1.0);
        let y = approx_solution(&g, &p, 0.3).unwrap();
        let nf = n as f64;
        // three fields, each (1/n)^2 + 2 (1/2)^2 n^{-2s} (1 + n^2)^sigma
        let exact = (3.0 * (nf.powi(-2) + 0.5 * nf.powf(-5.0) * (1.0 + nf * nf).powf(1.2))).sqrt();
        assert!((y.norm(1.2) - exact).abs() < 1e-12);
        assert!(exact < 1.0);
    }
}

#[test]
fn parameter_validation() {
    assert!(params(8, 2.5, 1.2, 1.0).validate().is_ok());
    assert!(ApproxFamilyParams {
        kappa: 0.5,
        ..params(8, 2.5, 1.2, 1.0)
    }
    .validate()
    .is_err());
    assert!(ApproxFamilyParams {
        d: 1,
        ..params(8, 2.5, 1.2, 1.0)
    }
    .validate()
    .is_err());
    assert!(params(1, 2.5, 1.2, 1.0).validate().is_err());
    assert!(params(8, 2.5, 1.6, 1.0).validate().is_err());
    assert!(params(8, 4.0, 1.9, 1.0).validate().is_ok());
    let g = Grid::new(2, 32).unwrap();
    assert!(matches!(
        approx_residual(&g, &params(8, 2.5, 1.2, 1.0), 0.0),
        Err(Error::Unresolved { .. })
    ));
    assert!(approx_solution(&g, &params(8, 2.5, 1.2, 1.0), 0.0).is_ok());
}

#[test]
fn residual_matches_hand_assembly() {
    let g = Grid::new(2, 64).unwrap();
    for (kappa, t) in [(1.0, 0.0), (-1.0, 0.45), (1.0, 1.3)] {
        let p = ApproxFamilyParams {
            kappa,
            ..params(8, 2.5, 1.2, 1.0)
        };
        let spectral = approx_residual(&g, &p, t).unwrap();
        let closed = approx_residual_closed_form(&g, &p, t).unwrap();
        assert!(spectral.max_abs_coeff_diff(&closed) < 1e-14);
    }
}

#[test]
fn simpson_error_matches_exact_phase_integral() {
    let g = Grid::new(2, 64).unwrap();
    let p = params(8, 2.5, 1.2, 1.0);
    let exact = phase_integral_error(&g, &p).norm(1.2);
    let series = residual_error(&g, &p, 16).unwrap();
    assert_eq!(series[0], ResidualPoint { t: 0.0, norm: 0.0 });
    assert_eq!(series.len(), 9);
    let simpson = series.last().unwrap().norm;
    assert!(((simpson - exact) / exact).abs() < 1e-6, "{simpson} vs {exact}");
    assert!(residual_error(&g, &p, 3).is_err());
}

#[test]
fn residual_halving_rate_between_32_and_64() {
    let g = Grid::new(2, 512).unwrap();
    let e = |n| {
        let p = params(n, 2.5, 1.2, 1.0);
        residual_error(&g, &p, 8).unwrap().last().unwrap().norm
    };
    let ratio = e(32) / e(64);
    let expected = 2f64.powf(2.8);
    assert!((ratio / expected - 1.0).abs() < 0.15, "{ratio} vs {expected}");
}

#[test]
fn decay_exponent_branches() {
    assert!((expected_decay_exponent(2.5, 1.2) - 2.8).abs() < 1e-15);
    assert!((expected_decay_exponent(4.0, 1.2) - 4.8).abs() < 1e-15);
    assert!((expected_decay_exponent(3.0, 1.2) - 3.8).abs() < 1e-15);
}

#[test]
fn loglog_fit_recovers_power_laws() {
    let xs = [8.0, 16.0, 32.0, 64.0];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.8)).collect();
    let (slope, intercept, res) = loglog_fit(&xs, &ys).unwrap();
    assert!((slope + 2.8).abs() < 1e-12 && (intercept - 3f64.ln()).abs() < 1e-12 && res < 1e-12);
    assert!(loglog_fit(&xs, &[0.0; 4]).is_err());
    assert!(decay_fit(2, 2.5, 1.2, &[8, 16, 32], 1.0, 4).is_err());
}

#[test]
fn decay_grids_retain_the_doubled_frequency() {
    assert_eq!(decay_grid(2, 64).unwrap().n_per_dim(), 512);
    assert_eq!(decay_grid(2, 128).unwrap().n_per_dim(), 1024);
    assert_eq!(decay_grid(1, 8).unwrap().n_per_dim(), 512);
}

/// ||y^{1,n}(t) - y^{-1,n}(t)|| for the three fields: each differs by
/// 2/n + 2 n^{-s} sin(n x) sin t.
fn gap_closed_form(n: f64, s: f64, t: f64) -> f64 {
    (3.0 * (4.0 / (n * n) + 2.0 * (1.0 + n.powi(-2)).powf(s) * t.sin().powi(2))).sqrt()
}

#[test]
fn family_gap_matches_closed_form() {
    let g = Grid::new(2, 256).unwrap();
    for n in [16u32, 64] {
        let gap = family_gap(&g, n, 2.5, 1.0, 20).unwrap();
        let nf = n as f64;
        assert!((gap.initial - gap_closed_form(nf, 2.5, 0.0)).abs() < 1e-12);
        assert!((gap.sup - gap_closed_form(nf, 2.5, 1.0)).abs() < 1e-12);
        assert_eq!(gap.t_sup, 1.0);
        // the initial distance is O(1/n); the later one is not small
        assert!(gap.initial * nf < 4.0);
        assert!(gap.sup > 2.0);
    }
}

#[test]
fn family_gap_grows_with_horizon() {
    let g = Grid::new(2, 64).unwrap();
    let mut last = 0.0;
    for k in 1..=6 {
        let t = FRAC_PI_2 * k as f64 / 6.0;
        let gap = family_gap(&g, 8, 2.5, t, 12).unwrap().sup;
        assert!(gap >= last);
        last = gap;
    }
}

#[test]
fn simulated_runs_track_the_family() {
    let g = Grid::new(2, 64).unwrap();
    let sim = simulated_gap(&g, 8, 2.5, 0.5, 0.05, NoiseModel::Zero, 0).unwrap();
    let exact = family_gap(&g, 8, 2.5, 0.5, 10).unwrap();
    assert!(sim.both_survived);
    assert!((sim.gap.initial - exact.initial).abs() < 1e-12);
    assert!(sim.gap.sup >= 0.5 * exact.sup);
    // the family misses solutions by the integrated residual only
    let p = params(8, 2.5, 1.2, 0.5);
    let resid = residual_error(&g, &ApproxFamilyParams { sigma: 1.2, ..p }, 10).unwrap();
    let bound = resid.last().unwrap().norm * 8f64.powf(2.5 - 1.2);
    assert!(sim.tube < 10.0 * bound.max(1e-12), "{} vs {}", sim.tube, bound);
}

#[test]
fn regime_table() {
    assert_eq!(global_regime(1.0, 1.0, 1.0, 1.5), Some(1));
    assert_eq!(global_regime(1.0, 0.6, 1.0, 1.0), Some(2));
    assert_eq!(global_regime(1.0, 0.5, 1.0, 1.0), None);
    assert_eq!(global_regime(1.5, 1.0, 0.5, 2.0), Some(3));
    assert_eq!(global_regime(1.4, 1.0, 0.5, 2.0), None);
    assert_eq!(global_regime(-1.5, -0.6, 0.5, 1.0), Some(4));
    assert_eq!(global_regime(1.0, 1.0, 0.3, 1.5), None);
    assert_eq!(global_regime(0.0, 1.0, 1.0, 1.5), None);
}

#[test]
fn envelope_of_affine_data_is_exact() {
    let t: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect();
    let v: Vec<f64> = t.iter().map(|t| 0.3 + 1.7 * t).collect();
    let e = affine_envelope(&t, &v).unwrap();
    assert!((e.slope - 1.7).abs() < 1e-12 && (e.intercept - 0.3).abs() < 1e-12);
    assert!(e.offset < 1e-12 && e.rms_residual < 1e-12);
    assert!(affine_envelope(&[1.0], &[2.0]).is_none());
    let bumpy: Vec<f64> = v
        .iter()
        .enumerate()
        .map(|(k, v)| v + if k == 4 { 1.0 } else { 0.0 })
        .collect();
    let e = affine_envelope(&t, &bumpy).unwrap();
    assert!(t
        .iter()
        .zip(&bumpy)
        .all(|(t, v)| *v <= e.intercept + e.offset + e.slope * t + 1e-12));
}

#[test]
fn empty_ensemble_flags_undefined_fractions() {
    let r = EnsembleReport::from_trajectories(&[] as &[Trajectory]);
    assert_eq!(r.members, 0);
    assert!(r.survival_fraction.is_none() && r.breaking_fraction.is_none() && r.lognorm.is_none());
}

#[test]
fn parallel_and_serial_ensembles_agree() {
    let g = Grid::new(1, 32).unwrap();
    let y0 = State::new_1d(
        SpectralField::from_fn(&g, |x| 0.4 * x[0].sin()),
        SpectralField::from_fn(&g, |x| 0.2 * x[0].cos()),
    )
    .unwrap();
    let mut cfg = SimConfig::new(&g, 2.0, 1e-2, 0.5);
    cfg.noise = NoiseModel::Polynomial {
        c1: 1.0,
        c2: 1.0,
        delta1: 1.0,
        delta2: 1.5,
        s_norm: 2.0,
    };
    cfg.record_every = 5;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| global_ensemble(&cfg, &y0, 1.0, 6, 99).unwrap())
    };
    let serial = run(1);
    let parallel = run(3);
    assert_eq!(serial, parallel);
    assert_eq!(serial.members, 6);
    assert_eq!(serial.survived + serial.broke + serial.underflow, 6);
    let seeds: std::collections::HashSet<_> = serial.member_seeds.iter().collect();
    assert_eq!(seeds.len(), 6);
}

#[test]
fn breaking_ensemble_requires_the_shape_condition() {
    let g = Grid::new(1, 64).unwrap();
    let y0 = State::new_1d(SpectralField::from_fn(&g, |x| x[0].sin()), SpectralField::zeros(&g)).unwrap();
    let setup = BreakingSetup {
        grid: g.clone(),
        s: 2.0,
        dt: 1e-3,
        t_end: 1.0,
        c: 0.1,
        lambda: 0.5,
        winf_factor: 3.0,
        record_every: 5,
    };
    assert!(breaking_ensemble(&setup, &y0, 4, 1).is_err());
}

#[test]
fn small_breaking_ensemble() {
    let g = Grid::new(1, 1024).unwrap();
    let data = steep_slope_data(&g, 8.0, 0.1, 0.5, 2.0).unwrap();
    let setup = BreakingSetup {
        grid: g.clone(),
        s: 2.0,
        dt: 1e-3,
        t_end: 2.0,
        c: 0.1,
        lambda: 0.5,
        winf_factor: 3.0,
        record_every: 5,
    };
    let report = breaking_ensemble(&setup, &data.state, 4, 7).unwrap();
    assert_eq!(report.ensemble.broke, 4, "{:?}", report.members);
    let window = report.riccati_window.unwrap();
    assert!(report.ensemble.breaking_times.iter().all(|&t| t < 1.5 * window));
    assert!(report.max_clock_gap().unwrap() <= 10);
    assert!(report.members.iter().all(|m| m.barrier_first == Some(true)));
}

fn norm_track(seed: u64, times: &[f64], norm: impl Fn(f64) -> f64) -> Trajectory {
    let g = crate::spectral::Grid::new(1, 8).unwrap();
    let records = times
        .iter()
        .map(|&t| crate::dynamics::Record {
            t,
            hs_u: norm(t),
            hs_gamma: 0.0,
            winf: 0.0,
            energy: 0.0,
            min_slope: 0.0,
        })
        .collect();
    Trajectory {
        seed,
        records,
        status: crate::dynamics::Status::Survived,
        winf_crossing: None,
        hs_crossing: None,
        snapshots: Vec::new(),
        transform_c: 0.0,
        final_state: crate::spectral::State::zeros(&g),
        steps: 0,
        halvings: 0,
    }
}

#[test]
fn envelope_aligns_members_by_time_not_record_index() {
    // the second member halved its step and records twice as often
    let coarse: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let fine: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let grow = |t: f64| (t.exp() - 1.0).sqrt();
    let trajs = [norm_track(1, &coarse, grow), norm_track(2, &fine, |_| 0.0)];
    let e = EnsembleReport::from_trajectories(&trajs).lognorm.unwrap();
    // ell(t) - ell(0) = ln(e + e^t - 1) - 1 tends to t - 1
    assert!(e.slope > 0.9 && e.slope < 1.1, "{e:?}");
    let r = EnsembleReport::from_trajectories(&trajs[1..]).lognorm.unwrap();
    assert_eq!(r.slope, 0.0);
}
