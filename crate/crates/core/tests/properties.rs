//! Randomised invariants across module boundaries.

use proptest::prelude::*;

use mch2::diagnostics::breaking_condition;
use mch2::dynamics::{simulate, Scheme, SimConfig, Status};
use mch2::experiments::global_ensemble;
use mch2::operators::{drift, rhs_1d};
use mch2::spectral::{mollify, random_field, random_state};
use mch2::stochastics::{diffusion, mu, transform_state, untransform_state, NoiseModel, WienerPath};
use mch2::{Grid, SpectralField, State};

fn shifted(f: &SpectralField, points: usize) -> SpectralField {
    let g = f.grid().clone();
    let h = g.spacing() * points as f64;
    SpectralField::from_fn(&g, |x| f.eval_at(x[0] - h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn breaking_condition_ignores_translation(
        seed in 0u64..5000,
        shift in 1usize..64,
        c in 0.0f64..1.0,
        lambda in 0.05f64..0.95,
    ) {
        let g = Grid::new(1, 64).unwrap();
        let u = random_field(&g, 10, seed).scale(4.0);
        let gamma = random_field(&g, 10, seed + 7);
        let a = breaking_condition(&u, &gamma, c, lambda).unwrap();
        let b = breaking_condition(&shifted(&u, shift), &shifted(&gamma, shift), c, lambda).unwrap();
        prop_assume!((a.min_slope0 - a.threshold).abs() > 1e-8);
        prop_assert_eq!(a.satisfied, b.satisfied);
        prop_assert!((a.min_slope0 - b.min_slope0).abs() <= 1e-9 * a.min_slope0.abs().max(1.0));
        prop_assert!((a.threshold - b.threshold).abs() <= 1e-9 * a.threshold.abs().max(1.0));
    }

    #[test]
    fn wiener_path_is_a_keyed_prefix_sum(seed in any::<u64>(), steps in 1usize..200, drivers in 1usize..4) {
        let p = WienerPath::sample(seed, 1e-2, steps, drivers).unwrap();
        prop_assert_eq!(&p, &WienerPath::sample(seed, 1e-2, steps, drivers).unwrap());
        for j in 0..drivers {
            prop_assert_eq!(p.value(j, 0), 0.0);
            let mut acc = 0.0;
            for (k, dw) in p.increments(j).iter().enumerate() {
                acc += dw;
                prop_assert_eq!(p.value(j, k + 1), acc);
            }
        }
    }

    #[test]
    fn linear_noise_is_polynomial_noise_without_exponents(seed in 0u64..5000, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let g = Grid::new(1, 32).unwrap();
        let y = random_state(&g, 8, seed);
        let lin = diffusion(0.0, &y, &NoiseModel::Linear { c1, c2 }).unwrap();
        let poly = diffusion(0.0, &y, &NoiseModel::Polynomial { c1, c2, delta1: 0.0, delta2: 0.0, s_norm: 2.0 }).unwrap();
        prop_assert_eq!(lin, poly);
    }

    #[test]
    fn mu_transform_round_trips(seed in 0u64..5000, t in 0.0f64..5.0, w in -3.0f64..3.0, c in -2.0f64..2.0) {
        let g = Grid::new(2, 16).unwrap();
        let y = random_state(&g, 5, seed);
        let m = mu(t, w, c);
        let back = untransform_state(&transform_state(&y, m).unwrap(), m).unwrap();
        prop_assert!(back.max_abs_coeff_diff(&y) <= 1e-14 * y.fields().map(SpectralField::max_abs_coeff).fold(0.0, f64::max));
    }

    #[test]
    fn drift_agrees_with_the_green_function_form(seed in 0u64..100_000) {
        let g = Grid::new(1, 64).unwrap();
        let y = random_state(&g, g.cutoff() as i64, seed);
        let a = drift(&y);
        let b = rhs_1d(&y.u[0], &y.gamma).unwrap();
        let scale = b.fields().map(SpectralField::max_abs_coeff).fold(0.0, f64::max);
        prop_assert!(a.max_abs_coeff_diff(&b) <= 1e-10 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn mollifier_is_self_adjoint(seed in 0u64..5000, eps in 0.05f64..1.0, d in 1usize..=2) {
        let g = Grid::new(d, 32).unwrap();
        let f = random_field(&g, 12, seed);
        let h = random_field(&g, 12, seed + 1);
        let lhs = mollify(&f, eps).unwrap().l2_pairing(&h);
        let rhs = f.l2_pairing(&mollify(&h, eps).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectories_are_ordered_and_stop_at_the_threshold(
        seed in 0u64..1000,
        amplitude in 0.5f64..6.0,
        c in 0.0f64..1.5,
        rk4 in any::<bool>(),
    ) {
        let g = Grid::new(1, 32).unwrap();
        let y0 = random_state(&g, 6, seed).scale(amplitude);
        let mut cfg = SimConfig::new(&g, 2.0, 5e-3, 0.5);
        cfg.noise = NoiseModel::Linear { c1: c, c2: c };
        cfg.scheme = if rk4 { Scheme::Rk4RandomPde } else { Scheme::EulerMaruyama };
        cfg.blowup_winf = 3.0 * mch2::spectral::winf_norm(&y0);
        cfg.adaptive = true;
        let traj = simulate(&cfg, &y0, seed).unwrap();
        prop_assert!(traj.records.windows(2).all(|w| w[1].t > w[0].t));
        if let Status::Broke { .. } = traj.status {
            let k = traj.winf_crossing.or(traj.hs_crossing).unwrap();
            prop_assert!(traj.winf_crossing.is_none() || traj.records[k].winf >= cfg.blowup_winf);
        }
        let again = simulate(&cfg, &y0, seed).unwrap();
        prop_assert_eq!(&traj.records, &again.records);
    }

    #[test]
    fn ensemble_counts_partition_the_members(seed in 0u64..1000, members in 0usize..6, c in 0.0f64..2.0) {
        let g = Grid::new(1, 16).unwrap();
        let y0 = State::new_1d(
            SpectralField::from_fn(&g, |x| x[0].sin()),
            SpectralField::from_fn(&g, |x| 0.5 * x[0].cos()),
        ).unwrap();
        let mut cfg = SimConfig::new(&g, 2.0, 1e-2, 0.3);
        cfg.noise = NoiseModel::Linear { c1: c, c2: c };
        cfg.blowup_winf = 2.0;
        let r = global_ensemble(&cfg, &y0, 1.0, members, seed).unwrap();
        prop_assert_eq!(r.survived + r.broke + r.underflow, members);
        prop_assert_eq!(r.member_seeds.len(), members);
        match r.survival_fraction {
            Some(f) => prop_assert_eq!(f, r.survived as f64 / members as f64),
            None => prop_assert_eq!(members, 0),
        }
    }
}

#[test]
fn transport_residual_shrinks_under_refinement() {
    use mch2::diagnostics::transport_residual;
    use mch2::dynamics::simulate_on_path;
    use mch2::harness::smooth_data;

    let xs: Vec<f64> = (0..32).map(|i| std::f64::consts::TAU * i as f64 / 32.0).collect();
    let residual = |n: usize, dt: f64| {
        let g = Grid::new(1, n).unwrap();
        let mut cfg = SimConfig::new(&g, 3.0, dt, 0.5);
        cfg.scheme = Scheme::Rk4RandomPde;
        cfg.noise = NoiseModel::Linear { c1: 0.5, c2: 0.5 };
        cfg.record_every = 5;
        cfg.keep_states = true;
        let path = cfg.wiener_path(3).unwrap();
        let traj = simulate_on_path(&cfg, &smooth_data(&g, 1.0), &path).unwrap();
        transport_residual(&traj, &path, &xs).unwrap().relative()
    };
    let r: Vec<f64> = [(64, 4e-3), (128, 2e-3), (256, 1e-3)]
        .iter()
        .map(|&(n, dt)| residual(n, dt))
        .collect();
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
}
