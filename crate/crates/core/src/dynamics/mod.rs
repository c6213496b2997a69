//! Time integration with blow-up detection, and the random characteristic
//! flow of one-dimensional solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{min_slope, physical_h1_energy};
use crate::error::{Error, Result};
use crate::operators::{drift, drift_regularized, RegularizationParams};
use crate::spectral::{winf_norm, Grid, SpectralField, State};
use crate::stochastics::{diffusion, NoiseModel, WienerPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
    Rk4RandomPde,
    EulerMaruyamaRegularized,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler_maruyama",
            Scheme::Rk4RandomPde => "rk4_random_pde",
            Scheme::EulerMaruyamaRegularized => "euler_maruyama_regularized",
        }
    }

    pub fn parse(name: &str) -> Option<Scheme> {
        match name {
            "euler_maruyama" => Some(Scheme::EulerMaruyama),
            "rk4_random_pde" => Some(Scheme::Rk4RandomPde),
            "euler_maruyama_regularized" => Some(Scheme::EulerMaruyamaRegularized),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub grid: Arc<Grid>,
    /// Sobolev index of the monitored H^s norms.
    pub s: f64,
    pub dt: f64,
    pub t_end: f64,
    pub noise: NoiseModel,
    pub scheme: Scheme,
    pub reg: Option<RegularizationParams>,
    pub blowup_winf: f64,
    pub blowup_hs: f64,
    pub dt_min: f64,
    pub record_every: usize,
    /// Halve dt whenever the W^{1,inf} norm doubles.
    pub adaptive: bool,
    /// Records allowed after the first threshold crossing while waiting for
    /// the other clock.
    pub grace_records: usize,
    /// Keep the integrated state at every record.
    pub keep_states: bool,
    /// Run the blow-up clocks and the adaptive step on the integrated
    /// variable mu y instead of y. The two blow up together, but mu y does
    /// not carry the e^{c W - c^2 t / 2} excursions of the noise.
    pub clock_on_transformed: bool,
}

impl SimConfig {
    pub const DEFAULT_BLOWUP_WINF: f64 = 1e3;
    pub const DEFAULT_BLOWUP_HS: f64 = 1e12;
    pub const DEFAULT_DT_MIN: f64 = 1e-10;
    pub const DEFAULT_GRACE_RECORDS: usize = 20;

    /// Zero noise, Euler-Maruyama, default thresholds, a record every step.
    pub fn new(grid: &Arc<Grid>, s: f64, dt: f64, t_end: f64) -> SimConfig {
        SimConfig {
            grid: grid.clone(),
            s,
            dt,
            t_end,
            noise: NoiseModel::Zero,
            scheme: Scheme::EulerMaruyama,
            reg: None,
            blowup_winf: Self::DEFAULT_BLOWUP_WINF,
            blowup_hs: Self::DEFAULT_BLOWUP_HS,
            dt_min: Self::DEFAULT_DT_MIN,
            record_every: 1,
            adaptive: false,
            grace_records: Self::DEFAULT_GRACE_RECORDS,
            keep_states: false,
            clock_on_transformed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.d();
        let floor = 1.0 + d as f64 / 2.0;
        if !(self.s > floor) {
            return Err(Error::param(format!(
                "s = {} must exceed 1 + d/2 = {floor} for well-posedness",
                self.s
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt) {
            return Err(Error::param("dt_min must lie in (0, dt)"));
        }
        if !(self.blowup_winf > 0.0 && self.blowup_hs > 0.0) {
            return Err(Error::param("blow-up thresholds must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every must be at least 1"));
        }
        self.noise.validate(d)?;
        match self.scheme {
            Scheme::Rk4RandomPde if self.noise.linear_coefficient().is_none() => Err(Error::param(
                "rk4_random_pde needs linear noise with c1 = c2 (or zero noise)",
            )),
            Scheme::EulerMaruyamaRegularized if self.reg.is_none() => Err(Error::param(
                "euler_maruyama_regularized needs regularization parameters",
            )),
            _ => Ok(()),
        }
    }

    /// Number of base steps; dt is shrunk so they tile [0, t_end] exactly.
    pub fn base_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn base_dt(&self) -> f64 {
        self.t_end / self.base_steps() as f64
    }

    /// The Brownian path `simulate` draws for `seed`.
    pub fn wiener_path(&self, seed: u64) -> Result<WienerPath> {
        WienerPath::sample(seed, self.base_dt(), self.base_steps(), self.noise.drivers())
    }

    /// The coefficient removed by the exponential transformation; 0 unless
    /// the scheme is the random PDE.
    pub fn transform_c(&self) -> f64 {
        match self.scheme {
            Scheme::Rk4RandomPde => self.noise.linear_coefficient().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub hs_u: f64,
    pub hs_gamma: f64,
    pub winf: f64,
    /// Physical-integral H^1 energy of the transformed state mu y.
    pub energy: f64,
    /// inf_x of the transformed velocity slope; NaN when d > 1.
    pub min_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Survived,
    Broke { t_star: f64 },
    DtUnderflow { t: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub seed: u64,
    pub records: Vec<Record>,
    pub status: Status,
    /// First record at which winf >= blowup_winf.
    pub winf_crossing: Option<usize>,
    /// First record at which ||y||_{H^s} >= blowup_hs.
    pub hs_crossing: Option<usize>,
    /// Integrated variable (mu y for the random PDE, y otherwise) at every
    /// record, when requested.
    pub snapshots: Vec<State>,
    pub transform_c: f64,
    /// Physical state at the last accepted step.
    pub final_state: State,
    pub steps: u64,
    pub halvings: u32,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn broke(&self) -> bool {
        matches!(self.status, Status::Broke { .. })
    }

    pub fn survived(&self) -> bool {
        self.status == Status::Survived
    }

    pub fn breaking_time(&self) -> Option<f64> {
        match self.status {
            Status::Broke { t_star } => Some(t_star),
            _ => None,
        }
    }

    /// Distance in records between the two blow-up clocks, when both fired.
    pub fn clock_gap(&self) -> Option<usize> {
        Some(self.winf_crossing?.abs_diff(self.hs_crossing?))
    }
}

/// One Euler-Maruyama step y + drift(y) dt + sum_j G_j(y) dW_j.
pub fn step_em(y: &State, t: f64, dt: f64, dw: &[f64], model: &NoiseModel) -> Result<State> {
    step_em_with(y, t, dt, dw, model, None)
}

/// Euler-Maruyama with the mollified, truncated drift.
pub fn step_em_regularized(
    y: &State,
    t: f64,
    dt: f64,
    dw: &[f64],
    model: &NoiseModel,
    reg: &RegularizationParams,
) -> Result<State> {
    step_em_with(y, t, dt, dw, model, Some(reg))
}

fn step_em_with(
    y: &State,
    t: f64,
    dt: f64,
    dw: &[f64],
    model: &NoiseModel,
    reg: Option<&RegularizationParams>,
) -> Result<State> {
    if !(dt > 0.0) {
        return Err(Error::param("dt must be positive"));
    }
    let g = diffusion(t, y, model)?;
    if g.len() != dw.len() {
        return Err(Error::param(format!(
            "{} Brownian increments for {} drivers",
            dw.len(),
            g.len()
        )));
    }
    let mut next = y.clone();
    let f = match reg {
        Some(p) => drift_regularized(y, p),
        None => drift(y),
    };
    next.axpy(dt, &f);
    for (gj, &w) in g.iter().zip(dw) {
        next.axpy(w, gj);
    }
    Ok(next.dealias())
}

/// exp(c W - c^2 t / 2), the inverse of mu.
fn mu_inv(t: f64, w: f64, c: f64) -> f64 {
    (c * w - 0.5 * c * c * t).exp()
}

/// Classical RK4 on d(mu y)/dt = mu^{-1}(t) drift(mu y), with W given at the
/// two ends of the step and linear in between.
pub fn step_rk4_random(y: &State, t: f64, dt: f64, w0: f64, w1: f64, c: f64) -> State {
    let wm = 0.5 * (w0 + w1);
    let (a0, am, a1) = (mu_inv(t, w0, c), mu_inv(t + 0.5 * dt, wm, c), mu_inv(t + dt, w1, c));
    let stage = |base: &State, h: f64, k: &State| {
        let mut z = base.clone();
        z.axpy(h, k);
        z
    };
    let k1 = drift(y).scale(a0);
    let k2 = drift(&stage(y, 0.5 * dt, &k1)).scale(am);
    let k3 = drift(&stage(y, 0.5 * dt, &k2)).scale(am);
    let k4 = drift(&stage(y, dt, &k3)).scale(a1);
    let mut next = y.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);
    next.dealias()
}

/// Run `config` from `y0` on the path drawn for `seed`.
pub fn simulate(config: &SimConfig, y0: &State, seed: u64) -> Result<Trajectory> {
    config.validate()?;
    let path = config.wiener_path(seed)?;
    simulate_on_path(config, y0, &path)
}

/// Run `config` from `y0` on a given path, which must have the config's
/// base step and at least as many steps and drivers.
pub fn simulate_on_path(config: &SimConfig, y0: &State, path: &WienerPath) -> Result<Trajectory> {
    config.validate()?;
    if !Arc::ptr_eq(y0.grid(), &config.grid) && **y0.grid() != *config.grid {
        return Err(Error::GridMismatch);
    }
    let steps0 = config.base_steps() as u64;
    let dt0 = config.base_dt();
    let drivers = config.noise.drivers();
    if path.drivers() < drivers || (path.steps() as u64) < steps0 {
        return Err(Error::param("Wiener path too short for the configuration"));
    }
    if ((path.dt() - dt0) / dt0).abs() > 1e-12 {
        return Err(Error::param(format!(
            "Wiener path step {} differs from the base step {dt0}",
            path.dt()
        )));
    }
    let c = config.transform_c();
    let w_at = |j: usize, k: u64, level: u32| path.value_dyadic(j, k, level);

    let mut run = Run {
        config,
        records: Vec::new(),
        snapshots: Vec::new(),
        winf_crossing: None,
        hs_crossing: None,
    };
    let mut level = 0u32;
    let mut k = 0u64;
    let mut steps = 0u64;
    let mut since_record = 0usize;
    // integrated variable; equals y except for the random PDE
    let mut z = y0.clone().dealias();
    let mut y = z.clone();
    let mut winf_ref = winf_norm(&y);
    let mut grace_left: Option<usize> = None;
    run.record(0.0, &y, &z);
    let status = loop {
        let h = dt0 / 2f64.powi(level as i32);
        let t = k as f64 * h;
        if k >= steps0 << level {
            break Status::Survived;
        }
        let next = match config.scheme {
            Scheme::Rk4RandomPde => {
                let (w0, w1) = if drivers > 0 {
                    (w_at(0, k, level), w_at(0, k + 1, level))
                } else {
                    (0.0, 0.0)
                };
                step_rk4_random(&z, t, h, w0, w1, c)
            }
            Scheme::EulerMaruyama | Scheme::EulerMaruyamaRegularized => {
                let dw: Vec<f64> = (0..drivers)
                    .map(|j| w_at(j, k + 1, level) - w_at(j, k, level))
                    .collect();
                step_em_with(&z, t, h, &dw, &config.noise, config.reg.as_ref())?
            }
        };
        k += 1;
        steps += 1;
        let t_next = k as f64 * h;
        if !next.is_finite() {
            run.records.push(Record {
                t: t_next,
                hs_u: f64::INFINITY,
                hs_gamma: f64::INFINITY,
                winf: f64::INFINITY,
                energy: f64::NAN,
                min_slope: f64::NAN,
            });
            break Status::Broke {
                t_star: run.first_crossing_time().unwrap_or(t_next),
            };
        }
        z = next;
        y = if c == 0.0 {
            z.clone()
        } else {
            let w = if drivers > 0 { w_at(0, k, level) } else { 0.0 };
            z.scale(mu_inv(t_next, w, c))
        };
        let probe = if config.clock_on_transformed { &z } else { &y };
        let winf = winf_norm(probe);
        let hs = probe.norm(config.s);
        let crosses = (winf >= config.blowup_winf && run.winf_crossing.is_none())
            || (hs >= config.blowup_hs && run.hs_crossing.is_none());
        since_record += 1;
        let at_end = k >= steps0 << level;
        if crosses || at_end || since_record >= config.record_every {
            run.record(t_next, &y, &z);
            since_record = 0;
            if let Some(left) = grace_left.as_mut() {
                *left = left.saturating_sub(1);
            }
        }
        if run.winf_crossing.is_some() && run.hs_crossing.is_some() {
            break Status::Broke {
                t_star: run.first_crossing_time().unwrap(),
            };
        }
        if run.winf_crossing.is_some() || run.hs_crossing.is_some() {
            let left = *grace_left.get_or_insert(config.grace_records);
            if left == 0 || at_end {
                break Status::Broke {
                    t_star: run.first_crossing_time().unwrap(),
                };
            }
        }
        if config.adaptive && winf_ref > 0.0 && winf >= 2.0 * winf_ref {
            if h / 2.0 < config.dt_min {
                break Status::DtUnderflow { t: t_next };
            }
            level += 1;
            k *= 2;
            winf_ref = winf;
        }
    };
    Ok(Trajectory {
        seed: path.seed(),
        records: run.records,
        status,
        winf_crossing: run.winf_crossing,
        hs_crossing: run.hs_crossing,
        snapshots: run.snapshots,
        transform_c: c,
        final_state: y,
        steps,
        halvings: level,
    })
}

struct Run<'a> {
    config: &'a SimConfig,
    records: Vec<Record>,
    snapshots: Vec<State>,
    winf_crossing: Option<usize>,
    hs_crossing: Option<usize>,
}

impl Run<'_> {
    fn record(&mut self, t: f64, y: &State, z: &State) {
        let s = self.config.s;
        let rec = Record {
            t,
            hs_u: y.u_norm(s),
            hs_gamma: y.gamma_norm(s),
            winf: winf_norm(y),
            energy: physical_h1_energy(z),
            min_slope: if z.d() == 1 {
                min_slope(&z.u[0]).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            },
        };
        let idx = self.records.len();
        let probe = if self.config.clock_on_transformed { z } else { y };
        if self.winf_crossing.is_none() && winf_norm(probe) >= self.config.blowup_winf {
            self.winf_crossing = Some(idx);
        }
        if self.hs_crossing.is_none() && probe.norm(s) >= self.config.blowup_hs {
            self.hs_crossing = Some(idx);
        }
        self.records.push(rec);
        if self.config.keep_states {
            self.snapshots.push(z.clone());
        }
    }

    fn first_crossing_time(&self) -> Option<f64> {
        let first = match (self.winf_crossing, self.hs_crossing) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return None,
        };
        Some(self.records[first].t)
    }
}

/// Characteristics X(t) of dX/dt = mu^{-1}(t) u~(t, X) and their spatial
/// derivatives, at the times where the flow was advanced.
#[derive(Clone, Debug)]
pub struct CharacteristicFlow {
    pub times: Vec<f64>,
    /// Index into the input snapshots of each output time.
    pub record_index: Vec<usize>,
    pub x0: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub phi_x: Vec<Vec<f64>>,
}

struct Velocity {
    u: SpectralField,
    ux: SpectralField,
    scale: f64,
}

impl Velocity {
    fn at(&self, x: f64) -> (f64, f64) {
        (self.scale * self.u.eval_at(x), self.scale * self.ux.eval_at(x))
    }
}

/// Integrate the characteristics through snapshots of the transformed
/// velocity. Consecutive pairs of intervals form one RK4 step with the middle
/// snapshot as the half-step stage; a leftover last interval uses the mean of
/// its end snapshots there. Phi_x is carried as its logarithm.
pub fn characteristic_flow(
    times: &[f64],
    states: &[State],
    c: f64,
    path: Option<&WienerPath>,
    x0: &[f64],
) -> Result<CharacteristicFlow> {
    if times.len() != states.len() || times.is_empty() {
        return Err(Error::param("need one snapshot per time, at least one"));
    }
    for y in states {
        if y.d() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: y.d(),
            });
        }
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("snapshot times must increase strictly"));
    }
    let weight = |t: f64| match path {
        Some(p) if c != 0.0 => mu_inv(t, p.value_at(0, t), c),
        _ => 1.0,
    };
    let velocity = |t: f64, y: &State| Velocity {
        u: y.u[0].clone(),
        ux: y.u[0].partial(0),
        scale: weight(t),
    };
    let rhs = |v: &Velocity, phi: &[f64]| -> (Vec<f64>, Vec<f64>) { phi.iter().map(|&x| v.at(x)).unzip() };

    let mut phi = x0.to_vec();
    let mut log_px = vec![0.0; x0.len()];
    let mut flow = CharacteristicFlow {
        times: vec![times[0]],
        record_index: vec![0],
        x0: x0.to_vec(),
        phi: vec![phi.clone()],
        phi_x: vec![vec![1.0; x0.len()]],
    };
    let mut i = 0;
    while i + 1 < times.len() {
        let (j, v0, vm, v1) = if i + 2 < times.len() {
            let (h1, h2) = (times[i + 1] - times[i], times[i + 2] - times[i + 1]);
            if ((h1 - h2) / h1).abs() > 1e-9 {
                return Err(Error::param("snapshots must be evenly spaced"));
            }
            (
                i + 2,
                velocity(times[i], &states[i]),
                velocity(times[i + 1], &states[i + 1]),
                velocity(times[i + 2], &states[i + 2]),
            )
        } else {
            let tm = 0.5 * (times[i] + times[i + 1]);
            let mut mid = states[i].scale(0.5);
            mid.axpy(0.5, &states[i + 1]);
            (
                i + 1,
                velocity(times[i], &states[i]),
                velocity(tm, &mid),
                velocity(times[i + 1], &states[i + 1]),
            )
        };
        let h = times[j] - times[i];
        let shifted = |k: &[f64], a: f64| -> Vec<f64> { phi.iter().zip(k).map(|(p, q)| p + a * q).collect() };
        let (k1, l1) = rhs(&v0, &phi);
        let (k2, l2) = rhs(&vm, &shifted(&k1, 0.5 * h));
        let (k3, l3) = rhs(&vm, &shifted(&k2, 0.5 * h));
        let (k4, l4) = rhs(&v1, &shifted(&k3, h));
        for p in 0..phi.len() {
            phi[p] += h / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
            log_px[p] += h / 6.0 * (l1[p] + 2.0 * l2[p] + 2.0 * l3[p] + l4[p]);
        }
        flow.times.push(times[j]);
        flow.record_index.push(j);
        flow.phi.push(phi.clone());
        flow.phi_x.push(log_px.iter().map(|l| l.exp()).collect());
        i = j;
    }
    Ok(flow)
}
