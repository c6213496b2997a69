//! Explicit approximate-solution families, their residual and its decay in
//! n, the nonuniform-dependence gap, and Monte Carlo ensembles.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::operators::drift;
use crate::spectral::{Grid, SpectralField, State};
use crate::stochastics::NoiseModel;

mod ensemble;
mod steep;

pub use ensemble::{
    affine_envelope, breaking_ensemble, breaking_sweep, global_ensemble, global_regime, run_members, scale_sweep,
    AffineEnvelope, BreakingMember, BreakingReport, BreakingSetup, EnsembleReport,
};
pub use steep::{steep_slope_data, SteepData};

/// Parameters of the travelling family
/// u_i = kappa/n + n^{-s} cos(eta_i), gamma = kappa/n + n^{-s} cos(eta_1),
/// eta_i = n x_{d+1-i} - kappa t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxFamilyParams {
    pub kappa: f64,
    pub n: u32,
    pub s: f64,
    pub sigma: f64,
    pub d: usize,
    pub t_end: f64,
}

impl ApproxFamilyParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa != 1.0 && self.kappa != -1.0 {
            return Err(Error::param(format!("kappa must be +1 or -1, got {}", self.kappa)));
        }
        if self.n < 2 {
            return Err(Error::param("n must be at least 2"));
        }
        if self.d != 2 {
            // the odd-dimensional construction is the zero field at d = 1
            return Err(Error::param(format!(
                "the approximate family is implemented for d = 2 only, got d = {}",
                self.d
            )));
        }
        let d = self.d as f64;
        if !(self.s > 1.0 + d / 2.0) {
            return Err(Error::param(format!("s = {} must exceed 1 + d/2", self.s)));
        }
        let hi = (self.s - 1.0).min(1.0 + d / 2.0);
        if !(self.sigma > d / 2.0 && self.sigma < hi) {
            return Err(Error::param(format!(
                "sigma = {} must lie in (d/2, min(s-1, 1+d/2)) = ({}, {hi})",
                self.sigma,
                d / 2.0
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end must be finite and nonnegative"));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &Grid, reach: u32) -> Result<()> {
        self.validate()?;
        if grid.d() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: grid.d(),
            });
        }
        let max = grid.cutoff() as u32;
        if reach * self.n > max {
            return Err(Error::Unresolved {
                n: (reach * self.n) as usize,
                max: max as usize,
            });
        }
        Ok(())
    }

    fn with_kappa(self, kappa: f64) -> Self {
        ApproxFamilyParams { kappa, ..self }
    }
}

/// Predicted decay rate of the residual: 2s - sigma - 1 for s <= 3 and
/// s - sigma + 2 beyond.
pub fn expected_decay_exponent(s: f64, sigma: f64) -> f64 {
    if s <= 3.0 {
        2.0 * s - sigma - 1.0
    } else {
        s - sigma + 2.0
    }
}

fn family_fields(grid: &Arc<Grid>, p: &ApproxFamilyParams, t: f64, amp: f64, shift: f64, sine: bool) -> State {
    let n = p.n as f64;
    let wave = move |e: f64| if sine { e.sin() } else { e.cos() };
    let u1 = SpectralField::from_fn(grid, |x| shift + amp * wave(n * x[1] - p.kappa * t));
    let u2 = SpectralField::from_fn(grid, |x| shift + amp * wave(n * x[0] - p.kappa * t));
    State::new(vec![u1.clone(), u2], u1).expect("fields share the grid")
}

/// The family member at time t. Requires n within the retained band.
pub fn approx_solution(grid: &Arc<Grid>, p: &ApproxFamilyParams, t: f64) -> Result<State> {
    p.check_grid(grid, 1)?;
    let n = p.n as f64;
    Ok(family_fields(grid, p, t, n.powf(-p.s), p.kappa / n, false))
}

/// d y / d t of the family in closed form: kappa n^{-s} sin(eta_i).
pub fn approx_time_derivative(grid: &Arc<Grid>, p: &ApproxFamilyParams, t: f64) -> Result<State> {
    p.check_grid(grid, 1)?;
    let n = p.n as f64;
    Ok(family_fields(grid, p, t, p.kappa * n.powf(-p.s), 0.0, true))
}

/// r(t) = dy/dt - drift(y) on the family. Products reach frequency 2n, which
/// must be retained.
pub fn approx_residual(grid: &Arc<Grid>, p: &ApproxFamilyParams, t: f64) -> Result<State> {
    p.check_grid(grid, 2)?;
    let y = approx_solution(grid, p, t)?;
    Ok(approx_time_derivative(grid, p, t)?.sub(&drift(&y)))
}

/// Hand-assembled residual of the family at d = 2, with
/// a = 1/(1+2n^2), b = 1/(1+4n^2), c = 1/(1+n^2), p_k = n^{k-2s}:
///
/// r_1 = -p1 s1 c2 + p3 (a s1 c2 - b s2 c2) - kappa n^{-s} c s2 - p1 b s2 c2
/// r_2 = -p1 s2 c1 + a p3 s2 c1 - 2 b (p3 + p1) s1 c1 - 2 kappa n^{-s} c s1
/// r_gamma = -p1 s1 c2 + a p3 s1 c2
pub fn approx_residual_closed_form(grid: &Arc<Grid>, p: &ApproxFamilyParams, t: f64) -> Result<State> {
    p.check_grid(grid, 2)?;
    let n = p.n as f64;
    let kappa = p.kappa;
    let ns = n.powf(-p.s);
    let pk = |k: f64| n.powf(k - 2.0 * p.s);
    let (a, b, c) = (
        1.0 / (1.0 + 2.0 * n * n),
        1.0 / (1.0 + 4.0 * n * n),
        1.0 / (1.0 + n * n),
    );
    let (p1, p3) = (pk(1.0), pk(3.0));
    let field = |f: &dyn Fn(f64, f64, f64, f64) -> f64| {
        SpectralField::from_fn(grid, |x| {
            let (e1, e2) = (n * x[1] - kappa * t, n * x[0] - kappa * t);
            f(e1.sin(), e1.cos(), e2.sin(), e2.cos())
        })
    };
    let r1 = field(&|s1, _, s2, c2| {
        -p1 * s1 * c2 + p3 * (a * s1 * c2 - b * s2 * c2) - kappa * ns * c * s2 - p1 * b * s2 * c2
    });
    let r2 = field(&|s1, c1, s2, _| {
        -p1 * s2 * c1 + a * p3 * s2 * c1 - 2.0 * b * (p3 + p1) * s1 * c1 - 2.0 * kappa * ns * c * s1
    });
    let rg = field(&|s1, _, _, c2| -p1 * s1 * c2 + a * p3 * s1 * c2);
    State::new(vec![r1, r2], rg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub t: f64,
    /// ||E(t)||_{H^sigma x H^sigma}
    pub norm: f64,
}

/// E(t) = int_0^t r by composite Simpson with `panels` (even) panels on
/// [0, t_end]; norms reported at the even nodes.
pub fn residual_error(grid: &Arc<Grid>, p: &ApproxFamilyParams, panels: usize) -> Result<Vec<ResidualPoint>> {
    p.check_grid(grid, 2)?;
    if panels == 0 || !panels.is_multiple_of(2) {
        return Err(Error::param(format!("Simpson needs an even panel count, got {panels}")));
    }
    let h = p.t_end / panels as f64;
    let r = |j: usize| approx_residual(grid, p, j as f64 * h);
    let mut acc = State::zeros(grid);
    let mut out = vec![ResidualPoint { t: 0.0, norm: 0.0 }];
    if p.t_end == 0.0 {
        return Ok(out);
    }
    let mut left = r(0)?;
    for j in (2..=panels).step_by(2) {
        let mid = r(j - 1)?;
        let right = r(j)?;
        acc.axpy(h / 3.0, &left);
        acc.axpy(4.0 * h / 3.0, &mid);
        acc.axpy(h / 3.0, &right);
        out.push(ResidualPoint {
            t: j as f64 * h,
            norm: acc.norm(p.sigma),
        });
        left = right;
    }
    Ok(out)
}

/// Smallest grid (N >= 512, a power of two) whose cutoff retains frequency 2n.
pub fn decay_grid(d: usize, n: u32) -> Result<Arc<Grid>> {
    let mut size = 512;
    loop {
        let g = Grid::new(d, size)?;
        if g.cutoff() >= 2 * n as usize {
            return Ok(g);
        }
        size *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub ns: Vec<u32>,
    pub errors: Vec<f64>,
    /// -slope of log ||E(T)|| against log n
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log-log fit residuals
    pub residual: f64,
    pub expected: f64,
}

impl DecayFit {
    pub fn relative_deviation(&self) -> f64 {
        (self.exponent - self.expected).abs() / self.expected
    }
}

/// Least-squares slope of log y against log x, returned as
/// (slope, intercept, rms residual).
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if ys.iter().chain(xs).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (rss / m).sqrt()))
}

/// Fit the decay of ||E(T)||_{H^sigma} in n over the given frequencies, each
/// on its own [`decay_grid`].
pub fn decay_fit(d: usize, s: f64, sigma: f64, ns: &[u32], t_end: f64, panels: usize) -> Result<DecayFit> {
    if ns.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 values of n, got {}",
            ns.len()
        )));
    }
    let mut errors = Vec::with_capacity(ns.len());
    for &n in ns {
        let p = ApproxFamilyParams {
            kappa: 1.0,
            n,
            s,
            sigma,
            d,
            t_end,
        };
        let grid = decay_grid(d, n)?;
        let series = residual_error(&grid, &p, panels)?;
        errors.push(series.last().expect("at least t = 0").norm);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (slope, intercept, residual) = loglog_fit(&xs, &errors)?;
    Ok(DecayFit {
        ns: ns.to_vec(),
        errors,
        exponent: -slope,
        intercept,
        residual,
        expected: expected_decay_exponent(s, sigma),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Distance at t = 0.
    pub initial: f64,
    /// Largest distance over the sampled times.
    pub sup: f64,
    pub t_sup: f64,
}

/// sup_{t <= T} ||y^{1,n}(t) - y^{-1,n}(t)||_{H^s x H^s}, evaluated spectrally
/// on the family at `samples + 1` evenly spaced times.
pub fn family_gap(grid: &Arc<Grid>, n: u32, s: f64, t_end: f64, samples: usize) -> Result<Gap> {
    let p = ApproxFamilyParams {
        kappa: 1.0,
        n,
        s,
        sigma: 0.5 * (grid.d() as f64 / 2.0 + (s - 1.0).min(1.0 + grid.d() as f64 / 2.0)),
        d: grid.d(),
        t_end,
    };
    p.check_grid(grid, 1)?;
    let samples = samples.max(1);
    let mut gap = Gap {
        initial: 0.0,
        sup: 0.0,
        t_sup: 0.0,
    };
    for j in 0..=samples {
        let t = t_end * j as f64 / samples as f64;
        let plus = approx_solution(grid, &p, t)?;
        let minus = approx_solution(grid, &p.with_kappa(-1.0), t)?;
        let dist = plus.sub(&minus).norm(s);
        if j == 0 {
            gap.initial = dist;
        }
        if dist > gap.sup {
            gap.sup = dist;
            gap.t_sup = t;
        }
    }
    Ok(gap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedGap {
    pub gap: Gap,
    /// sup over records and kappa of ||y_sim(t) - y^{kappa,n}(t)||_{H^s}
    pub tube: f64,
    pub both_survived: bool,
}

/// Simulate from y^{1,n}(0) and y^{-1,n}(0) with the random-PDE scheme and the
/// given noise (zero or linear), and measure the H^s gap between the runs at
/// every record.
pub fn simulated_gap(
    grid: &Arc<Grid>,
    n: u32,
    s: f64,
    t_end: f64,
    dt: f64,
    noise: NoiseModel,
    seed: u64,
) -> Result<SimulatedGap> {
    let p = ApproxFamilyParams {
        kappa: 1.0,
        n,
        s,
        sigma: 0.5 * (grid.d() as f64 / 2.0 + (s - 1.0).min(1.0 + grid.d() as f64 / 2.0)),
        d: grid.d(),
        t_end,
    };
    p.check_grid(grid, 1)?;
    let mut cfg = SimConfig::new(grid, s, dt, t_end);
    cfg.scheme = Scheme::Rk4RandomPde;
    cfg.noise = noise;
    cfg.keep_states = true;
    cfg.validate()?;
    let c = cfg.transform_c();
    let path = cfg.wiener_path(seed)?;
    let run = |kappa: f64| -> Result<_> {
        let y0 = approx_solution(grid, &p.with_kappa(kappa), 0.0)?;
        simulate(&cfg, &y0, seed)
    };
    let (plus, minus) = (run(1.0)?, run(-1.0)?);
    let both_survived = plus.survived() && minus.survived();
    let physical = |z: &State, t: f64| {
        if c == 0.0 {
            z.clone()
        } else {
            let w = path.value_at(0, t);
            z.scale((c * w - 0.5 * c * c * t).exp())
        }
    };
    let mut gap = Gap {
        initial: 0.0,
        sup: 0.0,
        t_sup: 0.0,
    };
    let mut tube: f64 = 0.0;
    let records = plus.snapshots.len().min(minus.snapshots.len());
    for i in 0..records {
        let t = plus.records[i].t;
        let (a, b) = (physical(&plus.snapshots[i], t), physical(&minus.snapshots[i], t));
        let dist = a.sub(&b).norm(s);
        if i == 0 {
            gap.initial = dist;
        }
        if dist > gap.sup {
            gap.sup = dist;
            gap.t_sup = t;
        }
        for (y, kappa) in [(&a, 1.0), (&b, -1.0)] {
            let exact = approx_solution(grid, &p.with_kappa(kappa), t)?;
            tube = tube.max(y.sub(&exact).norm(s));
        }
    }
    Ok(SimulatedGap {
        gap,
        tube,
        both_survived,
    })
}

#[cfg(test)]
mod tests;
