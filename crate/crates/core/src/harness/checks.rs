//! Numerical identity checks behind `verify-ops`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{approx_residual, approx_residual_closed_form, ApproxFamilyParams};
use crate::operators::{drift, greens_convolve, greens_convolve_quadrature, rhs_1d};
use crate::spectral::{mollifier_bound_constant, mollify, power_law_field, random_field, random_state};
use crate::spectral::{Grid, SpectralField, State};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured defect; the check passes when it does not exceed `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn scale(y: &State) -> f64 {
    y.fields().map(SpectralField::max_abs_coeff).fold(0.0, f64::max)
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.max_abs_coeff_diff(b) / b.max_abs_coeff().max(f64::MIN_POSITIVE)
}

/// Inverse Helmholtz round trip and Green's convolution at N = 512, and
/// drift against the 1-D closed form on 100 random band-limited states.
pub fn operator_checks() -> Result<Vec<Check>> {
    let g = Grid::new(1, 512)?;
    let k = g.cutoff() as i64;
    let mut round_trip: f64 = 0.0;
    let mut green: f64 = 0.0;
    for seed in 0..5 {
        let f = random_field(&g, k, 1000 + seed);
        round_trip = round_trip.max(rel(&f.bessel(2.0).inv_helmholtz(), &f));
        let a = greens_convolve(&f)?;
        green = green.max(rel(&greens_convolve_quadrature(&f, 256)?, &a));
    }
    let g2 = Grid::new(2, 64)?;
    let f2 = random_field(&g2, g2.cutoff() as i64, 77);
    round_trip = round_trip.max(rel(&f2.bessel(2.0).inv_helmholtz(), &f2));

    let gd = Grid::new(1, 256)?;
    let mut drift_gap: f64 = 0.0;
    for seed in 0..100 {
        let y = random_state(&gd, gd.cutoff() as i64, 2000 + seed);
        let a = drift(&y);
        let b = rhs_1d(&y.u[0], &y.gamma)?;
        drift_gap = drift_gap.max(a.max_abs_coeff_diff(&b) / scale(&b).max(f64::MIN_POSITIVE));
    }

    let mut power: f64 = 0.0;
    for d in [1, 2] {
        let g = Grid::new(d, if d == 1 { 128 } else { 32 })?;
        let half = (g.cutoff() / 2) as i64;
        for seed in 0..5 {
            let y = random_state(&g, half, 3000 + seed);
            let t = drift(&y);
            let p: f64 = y.fields().zip(t.fields()).map(|(a, b)| a.sobolev_inner(b, 1.0)).sum();
            power = power.max(p.abs() / (y.norm(1.0).powi(2) * t.norm(1.0)).max(f64::MIN_POSITIVE));
        }
    }

    Ok(vec![
        Check::new("inverse Helmholtz round trip", round_trip, 1e-10),
        Check::new("Green convolution vs multiplier (N=512)", green, 1e-10),
        Check::new("drift vs 1-D closed form (100 states)", drift_gap, 1e-10),
        Check::new("H1 orthogonality of the drift", power, 1e-12),
    ])
}

/// Drift on the travelling family against the assembled residual formulas.
pub fn family_check(n: u32) -> Result<Check> {
    let g = Grid::new(2, 64.max((6 * n as usize).next_power_of_two()))?;
    let mut worst: f64 = 0.0;
    for kappa in [1.0, -1.0] {
        let p = ApproxFamilyParams {
            kappa,
            n,
            s: 2.5,
            sigma: 1.2,
            d: 2,
            t_end: 1.0,
        };
        for t in [0.0, 0.37, 1.0] {
            let a = approx_residual(&g, &p, t)?;
            let b = approx_residual_closed_form(&g, &p, t)?;
            worst = worst.max(a.max_abs_coeff_diff(&b));
        }
    }
    Ok(Check::new(
        &format!("drift on the family vs closed form (n={n})"),
        worst,
        1e-8,
    ))
}

/// Rate, smoothing bound and self-adjointness of the mollifier.
pub fn mollifier_checks() -> Result<Vec<Check>> {
    let g = Grid::new(1, 4096)?;
    let (s, r) = (2.0, 0.5);
    let f = power_law_field(&g, s + 0.5 + 0.1);
    let ratios: Vec<f64> = (3..=8)
        .map(|k| {
            let eps = 2f64.powi(-k);
            Ok((&f - &mollify(&f, eps)?).sobolev_norm(r) / eps.powf(s - r))
        })
        .collect::<Result<_>>()?;
    // the scaled defect must not grow as eps shrinks
    let growth = ratios.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);

    let mut bound: f64 = 0.0;
    for d in [1, 2] {
        let g = Grid::new(d, 64)?;
        for seed in 0..10 {
            let f = random_field(&g, 21, 300 + seed);
            for (s, r) in [(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)] {
                for k in 1..=4 {
                    let eps = 2f64.powi(-k);
                    let lhs = mollify(&f, eps)?.sobolev_norm(r);
                    let rhs = mollifier_bound_constant(d, r, s) * eps.powf(s - r) * f.sobolev_norm(s);
                    bound = bound.max(lhs / rhs);
                }
            }
        }
    }

    let g = Grid::new(2, 32)?;
    let mut adjoint: f64 = 0.0;
    for seed in 0..10 {
        let f = random_field(&g, 15, 500 + seed);
        let h = random_field(&g, 15, 600 + seed);
        let lhs = mollify(&f, 0.15)?.l2_pairing(&h);
        let rhs = f.l2_pairing(&mollify(&h, 0.15)?);
        adjoint = adjoint.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }

    Ok(vec![
        Check::new("mollifier rate (scaled defect growth)", growth, 1.0001),
        Check::new("mollifier smoothing bound (lhs/rhs)", bound, 1.0 + 1e-12),
        Check::new("mollifier self-adjointness", adjoint, 1e-10),
    ])
}

/// Everything `verify-ops` runs.
pub fn all_checks() -> Result<Vec<Check>> {
    let mut out = operator_checks()?;
    out.push(family_check(8)?);
    out.extend(mollifier_checks()?);
    Ok(out)
}
