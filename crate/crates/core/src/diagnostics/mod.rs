//! Monitored quantities of one-dimensional solutions: the H^1 energy, the
//! minimal slope, the shape condition for wave breaking and the Riccati
//! bound on the breaking time.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{oversampled_values, SpectralField, State};
use crate::stochastics::WienerPath;

fn require_1d(d: usize) -> Result<()> {
    if d != 1 {
        return Err(Error::Dimension { expected: 1, got: d });
    }
    Ok(())
}

/// E = int (u^2 + u_x^2 + gamma^2 + gamma_x^2) dx over the circle.
pub fn h1_energy(y: &State) -> Result<f64> {
    require_1d(y.d())?;
    Ok(physical_h1_energy(y))
}

/// (2 pi)^d (||u||^2_{H^1} + ||gamma||^2_{H^1}), the physical-integral H^1
/// energy in any dimension.
pub fn physical_h1_energy(y: &State) -> f64 {
    (2.0 * PI).powi(y.d() as i32) * y.norm(1.0).powi(2)
}

/// Oversampling factor used for slope minima.
pub const SLOPE_OVERSAMPLING: usize = 4;

/// inf_x u_x, sampled on a grid four times finer than the collocation grid.
pub fn min_slope(u: &SpectralField) -> Result<f64> {
    require_1d(u.grid().d())?;
    let vals = oversampled_values(&u.partial(0), SLOPE_OVERSAMPLING)?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Right side of the shape condition:
/// -c^2/(2 lambda) - sqrt(c^4/(4 lambda^2) + E0).
pub fn breaking_threshold(e0: f64, c: f64, lambda: f64) -> f64 {
    let a = c * c / (2.0 * lambda);
    -a - (a * a + e0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakingAssessment {
    pub threshold: f64,
    pub min_slope0: f64,
    pub energy0: f64,
    pub satisfied: bool,
    /// Roots of lambda x^2 + c^2 x - lambda E0 = 0; sigma2 equals the threshold.
    pub sigma1: f64,
    pub sigma2: f64,
    /// Upper bound on the breaking time on paths with e^{c W(t)} >= lambda
    /// for all t.
    pub predicted_window: Option<f64>,
}

pub fn breaking_condition(
    u0: &SpectralField,
    gamma0: &SpectralField,
    c: f64,
    lambda: f64,
) -> Result<BreakingAssessment> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param(format!("lambda must lie in (0,1), got {lambda}")));
    }
    if !c.is_finite() {
        return Err(Error::param("c must be finite"));
    }
    let y = State::new_1d(u0.clone(), gamma0.clone())?;
    let e0 = h1_energy(&y)?;
    let h0 = min_slope(u0)?;
    let disc = (c.powi(4) + 4.0 * lambda * lambda * e0).sqrt();
    let threshold = breaking_threshold(e0, c, lambda);
    let satisfied = h0 < threshold;
    Ok(BreakingAssessment {
        threshold,
        min_slope0: h0,
        energy0: e0,
        satisfied,
        sigma1: (-c * c + disc) / (2.0 * lambda),
        sigma2: (-c * c - disc) / (2.0 * lambda),
        predicted_window: if satisfied {
            lambda_window(h0, e0, c, lambda)
        } else {
            None
        },
    })
}

/// On {e^{cW} >= lambda}: -1/H0 >= (lambda / c^2)(1 - e^{-c^2 t / 2})(1 - E0/H0^2),
/// solved for t. Reduces to [`riccati_window`] / lambda as c -> 0.
fn lambda_window(h0: f64, e0: f64, c: f64, lambda: f64) -> Option<f64> {
    let shape = 1.0 - e0 / (h0 * h0);
    if h0 >= 0.0 || shape <= 0.0 {
        return None;
    }
    let q = c * c / (lambda * h0.abs() * shape);
    if c == 0.0 {
        return Some(2.0 / (lambda * h0.abs() * shape));
    }
    if q >= 1.0 {
        return None;
    }
    Some(-(2.0 / (c * c)) * (-q).ln_1p())
}

/// Deterministic (mu = 1) breaking-time bound from the Riccati inequality
/// dH/dt <= -H^2/2 + E0/2: -1/H0 = (1/2)(1 - E0/H0^2) t.
/// None unless H0 < -sqrt(E0).
pub fn riccati_window(h0: f64, e0: f64) -> Option<f64> {
    if !(h0 < -e0.sqrt()) {
        return None;
    }
    Some(2.0 / (h0.abs() * (1.0 - e0 / (h0 * h0))))
}

/// Pathwise version: first t with
/// (1/2)(1 - E0/H0^2) int_0^t e^{c W(r) - c^2 r / 2} dr >= -1/H0, integrated by
/// the trapezoid rule on the path grid. None if the path ends first.
pub fn riccati_window_pathwise(h0: f64, e0: f64, c: f64, path: &WienerPath) -> Option<f64> {
    if !(h0 < -e0.sqrt()) {
        return None;
    }
    let target = -1.0 / h0 / (0.5 * (1.0 - e0 / (h0 * h0)));
    let dt = path.dt();
    let w = path.cumulative(0);
    let weight = |k: usize| (c * w[k] - 0.5 * c * c * k as f64 * dt).exp();
    let mut acc = 0.0;
    for k in 0..path.steps() {
        let (a, b) = (weight(k), weight(k + 1));
        let next = acc + 0.5 * dt * (a + b);
        if next >= target {
            // linear weight across the last interval
            let frac = solve_trapezoid_fraction(target - acc, a, b, dt);
            return Some((k as f64 + frac) * dt);
        }
        acc = next;
    }
    None
}

/// Fraction theta in [0,1] with int_0^{theta dt} (a + (b - a) r / dt) dr = need.
fn solve_trapezoid_fraction(need: f64, a: f64, b: f64, dt: f64) -> f64 {
    let slope = b - a;
    if slope.abs() < 1e-14 * a.abs() {
        return (need / (a * dt)).clamp(0.0, 1.0);
    }
    // a theta dt + slope theta^2 dt / 2 = need
    let disc = a * a + 2.0 * slope * need / dt;
    ((-a + disc.max(0.0).sqrt()) / slope).clamp(0.0, 1.0)
}

/// ln(e + ||u||^2_{H^s}) + ln(e + ||gamma||^2_{H^s}).
pub fn log_norm_functional(y: &State, s: f64) -> f64 {
    (E + y.u_norm(s).powi(2)).ln() + (E + y.gamma_norm(s).powi(2)).ln()
}

mod transport;
pub use transport::{transport_residual, transport_residual_of, TransportReport};
