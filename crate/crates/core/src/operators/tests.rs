use super::*;
use crate::spectral::{random_field, random_state};
use proptest::prelude::*;
use std::f64::consts::PI;

fn trig(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> SpectralField {
    SpectralField::from_fn(grid, |x| f(x[0]))
}

fn assert_close(a: &SpectralField, b: &SpectralField, tol: f64) {
    let err = a.max_abs_coeff_diff(b);
    assert!(err <= tol, "coefficient mismatch {err:e} > {tol:e}");
}

fn state_scale(y: &State) -> f64 {
    y.fields().map(SpectralField::max_abs_coeff).fold(0.0, f64::max)
}

#[test]
fn convection_examples() {
    let g = Grid::new(1, 32).unwrap();
    let sin = trig(&g, f64::sin);
    let got = convection(std::slice::from_ref(&sin), &sin).unwrap();
    assert_close(&got, &trig(&g, |x| 0.5 * (2.0 * x).sin()), 1e-15);
    let zero = SpectralField::zeros(&g);
    assert_eq!(
        convection(std::slice::from_ref(&zero), &sin).unwrap().max_abs_coeff(),
        0.0
    );
    let k = SpectralField::constant(&g, 2.0);
    assert_eq!(convection(std::slice::from_ref(&sin), &k).unwrap().max_abs_coeff(), 0.0);
}

#[test]
fn nonlocal_terms_vanish_on_constants() {
    let g = Grid::new(2, 16).unwrap();
    let u = vec![SpectralField::constant(&g, 0.3), SpectralField::constant(&g, -1.0)];
    let gamma = random_field(&g, 4, 1);
    assert!(l1(&u).unwrap().iter().all(|c| c.max_abs_coeff() == 0.0));
    assert!(l2(&SpectralField::constant(&g, 4.0))
        .iter()
        .all(|c| c.max_abs_coeff() == 0.0));
    assert!(l3(&u, &gamma).unwrap().max_abs_coeff() < 1e-17);
    let w = random_state(&g, 4, 2);
    assert_eq!(l3(&w.u, &SpectralField::zeros(&g)).unwrap().max_abs_coeff(), 0.0);
}

#[test]
fn single_mode_values_in_one_dimension() {
    let g = Grid::new(1, 32).unwrap();
    let cos = trig(&g, f64::cos);
    // u^2 + u_x^2 / 2 = 3/4 + cos(2x)/4
    let l1v = l1(std::slice::from_ref(&cos)).unwrap();
    assert_close(&l1v[0], &trig(&g, |x| -0.1 * (2.0 * x).sin()), 1e-16);
    // gamma^2 / 2 - gamma_x^2 / 2 = cos(2x) / 2
    assert_close(&l2(&cos)[0], &trig(&g, |x| -0.2 * (2.0 * x).sin()), 1e-16);
    let zero = SpectralField::zeros(&g);
    let t = rhs_1d(&zero, &cos).unwrap();
    assert_close(&t.u[0], &trig(&g, |x| 0.2 * (2.0 * x).sin()), 1e-16);
    assert_eq!(t.gamma.max_abs_coeff(), 0.0);
}

#[test]
fn rhs_1d_fixed_points_and_dimension_check() {
    let g = Grid::new(1, 16).unwrap();
    let c = SpectralField::constant(&g, 0.7);
    let t = rhs_1d(&c, &c).unwrap();
    assert!(t.u[0].max_abs_coeff() < 1e-16 && t.gamma.max_abs_coeff() < 1e-16);
    let g2 = Grid::new(2, 16).unwrap();
    let z = SpectralField::zeros(&g2);
    assert!(matches!(rhs_1d(&z, &z), Err(Error::Dimension { .. })));
    assert!(greens_convolve(&z).is_err());
}

#[test]
fn drift_matches_green_function_form() {
    let g = Grid::new(1, 128).unwrap();
    let k = g.cutoff() as i64;
    for seed in 0..20 {
        let y = random_state(&g, k, seed);
        let a = drift(&y);
        let b = rhs_1d(&y.u[0], &y.gamma).unwrap();
        assert!(a.max_abs_coeff_diff(&b) <= 1e-10 * state_scale(&b));
    }
    assert_eq!(state_scale(&drift(&State::zeros(&g))), 0.0);
}

/// sum of H^1 pairings (u, du) + (gamma, dgamma), zero for an exactly
/// energy-conserving tendency.
fn h1_power(y: &State, t: &Tendency) -> f64 {
    y.fields().zip(t.fields()).map(|(a, b)| a.sobolev_inner(b, 1.0)).sum()
}

#[test]
fn tendency_is_h1_orthogonal_to_state() {
    // half-band inputs make every product exact, so the cubic cancellation
    // survives truncation up to rounding
    for d in [1, 2] {
        let g = Grid::new(d, if d == 1 { 128 } else { 32 }).unwrap();
        let half = (g.cutoff() / 2) as i64;
        for seed in 0..5 {
            let y = random_state(&g, half, 40 + seed);
            let t = drift(&y);
            let scale = y.norm(1.0).powi(2) * t.norm(1.0);
            assert!(h1_power(&y, &t).abs() <= 1e-12 * scale, "d={d}");
        }
    }
}

#[test]
fn full_weight_gradient_square_breaks_h1_balance() {
    // with -gamma_x^2 instead of -gamma_x^2/2 in the 1-D pressure the extra
    // term d_x G * (gamma_x^2 / 2) pairs nontrivially with u
    let g = Grid::new(1, 128).unwrap();
    let y = random_state(&g, 20, 7);
    let gx = y.gamma.partial(0);
    let extra = dealiased_square(&gx).scale(0.5).inv_helmholtz().partial(0);
    let balance = h1_power(&y, &rhs_1d(&y.u[0], &y.gamma).unwrap());
    let defect = y.u[0].sobolev_inner(&extra, 1.0);
    assert!(balance.abs() < 1e-13 && defect.abs() > 1e-4);
}

fn dealiased_square(f: &SpectralField) -> SpectralField {
    spectral::dealiased_product(f, f).unwrap()
}

#[test]
fn greens_kernel_values() {
    let coth_half = 0.5 / PI.tanh();
    assert!((greens_kernel(0.0) - coth_half).abs() < 1e-15);
    assert!((greens_kernel(2.0 * PI) - coth_half).abs() < 1e-14);
    assert!((greens_kernel(0.3) - greens_kernel(-0.3)).abs() < 1e-14);
    let mass = quadrature::integrate(greens_kernel, 0.0, 2.0 * PI, 16, 16);
    assert!((mass - 1.0).abs() < 1e-14);
}

#[test]
fn greens_quadrature_matches_multiplier() {
    let g = Grid::new(1, 512).unwrap();
    let f = random_field(&g, g.cutoff() as i64, 3);
    let a = greens_convolve(&f).unwrap();
    let b = greens_convolve_quadrature(&f, 256).unwrap();
    assert!(a.max_abs_coeff_diff(&b) <= 1e-10 * a.max_abs_coeff());
    for n in [1i64, 7, 100] {
        let c = trig(&g, |x| (n as f64 * x).cos());
        let expect = c.scale(1.0 / (1.0 + (n * n) as f64));
        assert_close(&greens_convolve(&c).unwrap(), &expect, 1e-15);
    }
}

#[test]
fn truncation_shape() {
    let r = 3.0;
    assert_eq!(truncation(0.5 * r, r), 1.0);
    assert_eq!(truncation(3.0 * r, r), 0.0);
    let mut prev = 1.0;
    for k in 0..=300 {
        let v = truncation(k as f64 * 0.03, r);
        assert!(v <= prev);
        prev = v;
    }
    assert!(RegularizationParams::new(0.0, 1.0).is_err());
    assert!(RegularizationParams::new(0.5, -1.0).is_err());
}

#[test]
fn regularized_drift_limits() {
    let g = Grid::new(1, 64).unwrap();
    let y = random_state(&g, g.cutoff() as i64, 9);
    let big = spectral::winf_norm(&y);
    let cut = RegularizationParams::new(0.5, big / 2.5).unwrap();
    assert_eq!(state_scale(&drift_regularized(&y, &cut)), 0.0);
    let eps = 1.0 / g.cutoff() as f64;
    let open = RegularizationParams::new(eps, 1e6).unwrap();
    let exact = drift(&y);
    assert!(drift_regularized(&y, &open).max_abs_coeff_diff(&exact) <= 1e-14 * state_scale(&exact));
}

#[test]
fn regularized_drift_converges_as_eps_shrinks() {
    let g = Grid::new(1, 256).unwrap();
    let y = random_state(&g, 40, 12);
    let exact = drift(&y);
    let errs: Vec<f64> = (2..=7)
        .map(|k| {
            let p = RegularizationParams::new(2f64.powi(-k), 1e6).unwrap();
            drift_regularized(&y, &p).sub(&exact).norm(1.0)
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0], "{errs:?}");
    }
    assert!(*errs.last().unwrap() < 1e-12 * exact.norm(1.0));
}

/// The (C1) family with gamma following the first component's pattern.
fn c1_state(g: &Arc<Grid>, kappa: f64, n: f64, s: f64, t: f64) -> State {
    let b = n.powf(-s);
    let a = kappa / n;
    let u1 = SpectralField::from_fn(g, |x| a + b * (n * x[1] - kappa * t).cos());
    let u2 = SpectralField::from_fn(g, |x| a + b * (n * x[0] - kappa * t).cos());
    State::new(vec![u1.clone(), u2], u1).unwrap()
}

/// Closed-form Lambda^{-2} of products of the (C1) phases: each product of
/// sin/cos eta_i, eta_j is a combination of modes of a fixed length.
struct C1Forms {
    n: f64,
    s: f64,
    kappa: f64,
    t: f64,
}

impl C1Forms {
    fn etas(&self, x: [f64; 2]) -> (f64, f64) {
        (self.n * x[1] - self.kappa * self.t, self.n * x[0] - self.kappa * self.t)
    }
    fn p(&self, e: f64) -> f64 {
        self.n.powf(e - 2.0 * self.s)
    }
    fn inv_mixed(&self) -> f64 {
        1.0 / (1.0 + 2.0 * self.n * self.n)
    }
    fn inv_double(&self) -> f64 {
        1.0 / (1.0 + 4.0 * self.n * self.n)
    }
    fn inv_single(&self) -> f64 {
        1.0 / (1.0 + self.n * self.n)
    }
}

#[test]
fn c1_family_term_by_term() {
    let g = Grid::new(2, 64).unwrap();
    let (n, s, kappa, t) = (8.0, 2.5, 1.0, 0.37);
    let y = c1_state(&g, kappa, n, s, t);
    let cf = C1Forms { n, s, kappa, t };
    let ns = n.powf(-s);
    let field = |f: &dyn Fn(f64, f64, f64, f64) -> f64| {
        SpectralField::from_fn(&g, |x| {
            let (e1, e2) = cf.etas(x);
            f(e1.sin(), e1.cos(), e2.sin(), e2.cos())
        })
    };
    let tol = 1e-14;

    // u . grad u_i = -(kappa n^{-s} s_i + n^{1-2s} s_i c_{3-i})
    let conv1 = convection(&y.u, &y.u[0]).unwrap();
    let conv2 = convection(&y.u, &y.u[1]).unwrap();
    assert_close(
        &conv1,
        &field(&|s1, _, _, c2| -(kappa * ns * s1 + cf.p(1.0) * s1 * c2)),
        tol,
    );
    assert_close(
        &conv2,
        &field(&|_, c1, s2, _| -(kappa * ns * s2 + cf.p(1.0) * s2 * c1)),
        tol,
    );

    // L1 component 1 and 2
    let l1v = l1(&y.u).unwrap();
    let l1_1 = field(&|s1, _, s2, c2| {
        cf.p(3.0) * (s1 * c2 * cf.inv_mixed() - s2 * c2 * cf.inv_double())
            - kappa * ns * s2 * cf.inv_single()
            - cf.p(1.0) * s2 * c2 * cf.inv_double()
    });
    let l1_2 = field(&|s1, c1, s2, _| {
        cf.p(3.0) * (s2 * c1 * cf.inv_mixed() - s1 * c1 * cf.inv_double())
            - kappa * ns * s1 * cf.inv_single()
            - cf.p(1.0) * s1 * c1 * cf.inv_double()
    });
    assert_close(&l1v[0], &l1_1, tol);
    assert_close(&l1v[1], &l1_2, tol);

    // L2 of the scalar gamma = a + b cos(eta_1) acts only on component 2
    let l2v = l2(&y.gamma);
    assert!(l2v[0].max_abs_coeff() < tol);
    let l2_2 =
        field(&|s1, c1, _, _| -kappa * ns * s1 * cf.inv_single() - (cf.p(1.0) + cf.p(3.0)) * s1 * c1 * cf.inv_double());
    assert_close(&l2v[1], &l2_2, tol);

    // L3 = Lambda^{-2}(n^{3-2s} s_1 c_2)
    let l3v = l3(&y.u, &y.gamma).unwrap();
    assert_close(&l3v, &field(&|s1, _, _, c2| cf.p(3.0) * s1 * c2 * cf.inv_mixed()), tol);
}

#[test]
fn c1_residual_matches_assembled_closed_form() {
    let g = Grid::new(2, 64).unwrap();
    let (n, s) = (8.0, 2.5);
    for (kappa, t) in [(1.0, 0.0), (-1.0, 0.8)] {
        let y = c1_state(&g, kappa, n, s, t);
        let cf = C1Forms { n, s, kappa, t };
        let ns = n.powf(-s);
        let field = |f: &dyn Fn(f64, f64, f64, f64) -> f64| {
            SpectralField::from_fn(&g, |x| {
                let (e1, e2) = cf.etas(x);
                f(e1.sin(), e1.cos(), e2.sin(), e2.cos())
            })
        };
        let dudt = vec![
            field(&|s1, _, _, _| kappa * ns * s1),
            field(&|_, _, s2, _| kappa * ns * s2),
        ];
        let dy = State::new(dudt.clone(), dudt[0].clone()).unwrap();
        let residual = dy.sub(&drift(&y));
        let r1 = field(&|s1, _, s2, c2| {
            -cf.p(1.0) * s1 * c2 + cf.p(3.0) * (s1 * c2 * cf.inv_mixed() - s2 * c2 * cf.inv_double())
                - kappa * ns * s2 * cf.inv_single()
                - cf.p(1.0) * s2 * c2 * cf.inv_double()
        });
        let r2 = field(&|s1, c1, s2, _| {
            -cf.p(1.0) * s2 * c1 + cf.p(3.0) * s2 * c1 * cf.inv_mixed()
                - 2.0 * (cf.p(3.0) + cf.p(1.0)) * s1 * c1 * cf.inv_double()
                - 2.0 * kappa * ns * s1 * cf.inv_single()
        });
        let rg = field(&|s1, _, _, c2| -cf.p(1.0) * s1 * c2 + cf.p(3.0) * s1 * c2 * cf.inv_mixed());
        assert_close(&residual.u[0], &r1, 1e-14);
        assert_close(&residual.u[1], &r2, 1e-14);
        assert_close(&residual.gamma, &rg, 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn outputs_are_real_and_truncated(seed in 0u64..10_000, d in 1usize..=2) {
        let g = Grid::new(d, 32).unwrap();
        let y = random_state(&g, 15, seed);
        let t = drift(&y);
        prop_assert!(t.is_dealiased());
        prop_assert!(t.hermitian_defect() < 1e-14);
        let p = RegularizationParams::new(0.2, 1e3).unwrap();
        let r = drift_regularized(&y, &p);
        prop_assert!(r.is_dealiased() && r.hermitian_defect() < 1e-14);
    }
}

#[test]
fn nonlocal_part_is_locally_lipschitz() {
    // ||F(y1) - F(y2)||_{H^s} / ((||y1|| + ||y2||) ||y1 - y2||) over random pairs
    let g = Grid::new(1, 64).unwrap();
    let s = 2.0;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let y1 = random_state(&g, 15, 1000 + seed);
        let y2 = random_state(&g, 15, 5000 + seed).scale(0.1 + (seed % 7) as f64);
        let num = nonlocal(&y1).sub(&nonlocal(&y2)).norm(s);
        let den = (y1.norm(s) + y2.norm(s)) * y1.sub(&y2).norm(s);
        worst = worst.max(num / den);
    }
    assert!(worst.is_finite() && worst < 10.0, "ratio {worst}");
}
