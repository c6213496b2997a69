use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{breaking_condition, riccati_window, riccati_window_pathwise, BreakingAssessment};
use crate::dynamics::{simulate, Scheme, SimConfig, Status, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Grid, State};
use crate::stochastics::{member_seed, NoiseModel};

/// Evaluate `f(member, seed)` for every member on the current rayon pool.
/// Results come back in member order whatever the scheduling.
pub fn run_members<T, F>(members: usize, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync,
{
    (0..members)
        .into_par_iter()
        .map(|m| f(m, member_seed(base_seed, m as u64)))
        .collect()
}

/// Least-squares line through (t, g) and the smallest upward shift of it
/// that bounds every point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineEnvelope {
    pub slope: f64,
    pub intercept: f64,
    /// g(t) <= intercept + offset + slope t at every point
    pub offset: f64,
    pub rms_residual: f64,
}

pub fn affine_envelope(times: &[f64], values: &[f64]) -> Option<AffineEnvelope> {
    if times.len() != values.len() || times.len() < 2 {
        return None;
    }
    let m = times.len() as f64;
    let mt = times.iter().sum::<f64>() / m;
    let mv = values.iter().sum::<f64>() / m;
    let stt: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    if stt == 0.0 {
        return None;
    }
    let stv: f64 = times.iter().zip(values).map(|(t, v)| (t - mt) * (v - mv)).sum();
    let slope = stv / stt;
    let intercept = mv - slope * mt;
    let resid: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(t, v)| v - intercept - slope * t)
        .collect();
    Some(AffineEnvelope {
        slope,
        intercept,
        offset: resid.iter().cloned().fold(0.0, f64::max),
        rms_residual: (resid.iter().map(|r| r * r).sum::<f64>() / m).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub members: usize,
    pub survived: usize,
    pub broke: usize,
    pub underflow: usize,
    /// None for an empty ensemble.
    pub survival_fraction: Option<f64>,
    pub breaking_fraction: Option<f64>,
    /// Breaking times of the members that broke, in member order.
    pub breaking_times: Vec<f64>,
    pub member_seeds: Vec<u64>,
    /// Envelope of max over surviving members of sup_{r <= t} (ell(r) - ell(0)),
    /// where ell = ln(e + ||u||^2_{H^s}) + ln(e + ||gamma||^2_{H^s}).
    pub lognorm: Option<AffineEnvelope>,
}

impl EnsembleReport {
    pub fn from_trajectories(trajs: &[Trajectory]) -> EnsembleReport {
        let members = trajs.len();
        let count = |f: fn(&Status) -> bool| trajs.iter().filter(|t| f(&t.status)).count();
        let survived = count(|s| *s == Status::Survived);
        let broke = count(|s| matches!(s, Status::Broke { .. }));
        let underflow = count(|s| matches!(s, Status::DtUnderflow { .. }));
        let frac = |k: usize| (members > 0).then(|| k as f64 / members as f64);
        EnsembleReport {
            members,
            survived,
            broke,
            underflow,
            survival_fraction: frac(survived),
            breaking_fraction: frac(broke),
            breaking_times: trajs.iter().filter_map(Trajectory::breaking_time).collect(),
            member_seeds: trajs.iter().map(|t| t.seed).collect(),
            lognorm: lognorm_envelope(trajs),
        }
    }
}

fn ell(hs_u: f64, hs_gamma: f64) -> f64 {
    use std::f64::consts::E;
    (E + hs_u * hs_u).ln() + (E + hs_gamma * hs_gamma).ln()
}

fn lognorm_envelope(trajs: &[Trajectory]) -> Option<AffineEnvelope> {
    // adaptive halving makes record times differ between members, so each
    // running maximum is a step function of t sampled on the union of times
    let runs: Vec<Vec<(f64, f64)>> = trajs
        .iter()
        .filter(|t| t.survived())
        .filter_map(|traj| {
            let r0 = traj.records.first()?;
            let base = ell(r0.hs_u, r0.hs_gamma);
            let mut running = f64::NEG_INFINITY;
            let run: Vec<(f64, f64)> = traj
                .records
                .iter()
                .map_while(|r| {
                    let v = ell(r.hs_u, r.hs_gamma) - base;
                    v.is_finite().then(|| {
                        running = running.max(v);
                        (r.t, running)
                    })
                })
                .collect();
            (!run.is_empty()).then_some(run)
        })
        .collect();
    let mut times: Vec<f64> = runs.iter().flatten().map(|p| p.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut env = vec![f64::NEG_INFINITY; times.len()];
    for run in &runs {
        let mut j = 0;
        for (k, &t) in times.iter().enumerate() {
            while j + 1 < run.len() && run[j + 1].0 <= t {
                j += 1;
            }
            if run[j].0 <= t {
                env[k] = env[k].max(run[j].1);
            }
        }
    }
    affine_envelope(&times, &env)
}

/// Which of the four global-existence regimes (delta1, c1, delta2, c2)
/// falls in, numbered 1-4; None outside all of them.
pub fn global_regime(c1: f64, c2: f64, delta1: f64, delta2: f64) -> Option<u8> {
    let u_strong = delta1 > 0.5 && c1 != 0.0;
    let u_edge = delta1 == 0.5 && c1.abs() > 2f64.sqrt();
    let g_strong = delta2 > 1.0 && c2 != 0.0;
    let g_edge = delta2 == 1.0 && c2.abs() > (-0.25f64).exp() / 2f64.sqrt();
    match (u_strong, u_edge, g_strong, g_edge) {
        (true, _, true, _) => Some(1),
        (true, _, _, true) => Some(2),
        (_, true, true, _) => Some(3),
        (_, true, _, true) => Some(4),
        _ => None,
    }
}

/// Independent runs of `config` from `scale * y0`.
pub fn global_ensemble(
    config: &SimConfig,
    y0: &State,
    scale: f64,
    members: usize,
    base_seed: u64,
) -> Result<EnsembleReport> {
    config.validate()?;
    let start = y0.scale(scale);
    let trajs: Result<Vec<Trajectory>> = run_members(members, base_seed, |_, seed| simulate(config, &start, seed))
        .into_iter()
        .collect();
    Ok(EnsembleReport::from_trajectories(&trajs?))
}

/// [`global_ensemble`] at several data scales on common random numbers.
pub fn scale_sweep(
    config: &SimConfig,
    y0: &State,
    scales: &[f64],
    members: usize,
    base_seed: u64,
) -> Result<Vec<(f64, EnsembleReport)>> {
    scales
        .iter()
        .map(|&k| Ok((k, global_ensemble(config, y0, k, members, base_seed)?)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct BreakingSetup {
    pub grid: Arc<Grid>,
    pub s: f64,
    pub dt: f64,
    pub t_end: f64,
    pub c: f64,
    pub lambda: f64,
    /// The W^{1,inf} threshold is this multiple of |inf u0'|.
    pub winf_factor: f64,
    pub record_every: usize,
}

impl BreakingSetup {
    pub fn config(&self, noise: NoiseModel) -> SimConfig {
        let mut cfg = SimConfig::new(&self.grid, self.s, self.dt, self.t_end);
        cfg.scheme = Scheme::Rk4RandomPde;
        cfg.noise = noise;
        cfg.adaptive = true;
        cfg.record_every = self.record_every;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakingMember {
    pub seed: u64,
    pub status: Status,
    pub clock_gap: Option<usize>,
    /// Breaking-time bound along this member's path, if the path reaches it.
    pub pathwise_window: Option<f64>,
    /// Whether inf u~_x fell below -sqrt(E0) no later than the blow-up
    /// threshold was crossed; None for members that did not break.
    pub barrier_first: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakingReport {
    pub assessment: BreakingAssessment,
    /// Deterministic bound -1/H0 = (1/2)(1 - E0/H0^2) t.
    pub riccati_window: Option<f64>,
    pub blowup_winf: f64,
    /// Calibrated on the noiseless pilot run.
    pub blowup_hs: f64,
    pub pilot_breaking_time: Option<f64>,
    pub ensemble: EnsembleReport,
    pub members: Vec<BreakingMember>,
}

impl BreakingReport {
    /// Largest clock gap over broken members; None if some broken member
    /// saw only one clock fire.
    pub fn max_clock_gap(&self) -> Option<usize> {
        self.members
            .iter()
            .filter(|m| matches!(m.status, Status::Broke { .. }))
            .map(|m| m.clock_gap)
            .try_fold(0, |acc, g| g.map(|g| acc.max(g)))
    }
}

/// Monte Carlo over Wiener paths for linear noise c y dW from data
/// satisfying the shape condition.
pub fn breaking_ensemble(setup: &BreakingSetup, y0: &State, members: usize, base_seed: u64) -> Result<BreakingReport> {
    if y0.d() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: y0.d(),
        });
    }
    let assessment = breaking_condition(&y0.u[0], &y0.gamma, setup.c, setup.lambda)?;
    if !assessment.satisfied {
        return Err(Error::param(format!(
            "initial slope {} does not undercut the breaking threshold {}",
            assessment.min_slope0, assessment.threshold
        )));
    }
    let (h0, e0) = (assessment.min_slope0, assessment.energy0);
    let blowup_winf = setup.winf_factor * h0.abs();

    let mut pilot_cfg = setup.config(NoiseModel::Zero);
    pilot_cfg.blowup_winf = blowup_winf;
    let pilot = simulate(&pilot_cfg, y0, base_seed)?;
    let blowup_hs = match pilot.winf_crossing {
        Some(k) => {
            let r = &pilot.records[k];
            r.hs_u.hypot(r.hs_gamma)
        }
        None => SimConfig::DEFAULT_BLOWUP_HS,
    };

    let mut cfg = setup.config(NoiseModel::Linear {
        c1: setup.c,
        c2: setup.c,
    });
    cfg.blowup_winf = blowup_winf;
    cfg.blowup_hs = blowup_hs;
    cfg.validate()?;
    let barrier = -e0.sqrt();
    let outcomes: Result<Vec<(Trajectory, BreakingMember)>> = run_members(members, base_seed, |_, seed| {
        let path = cfg.wiener_path(seed)?;
        let traj = crate::dynamics::simulate_on_path(&cfg, y0, &path)?;
        let barrier_first = traj.winf_crossing.filter(|_| traj.broke()).map(|k| {
            traj.records
                .iter()
                .position(|r| r.min_slope < barrier)
                .is_some_and(|j| j <= k)
        });
        let member = BreakingMember {
            seed,
            status: traj.status,
            clock_gap: traj.clock_gap(),
            pathwise_window: riccati_window_pathwise(h0, e0, setup.c, &path),
            barrier_first,
        };
        Ok((traj, member))
    })
    .into_iter()
    .collect();
    let (trajs, members): (Vec<Trajectory>, Vec<BreakingMember>) = outcomes?.into_iter().unzip();
    Ok(BreakingReport {
        riccati_window: riccati_window(h0, e0),
        assessment,
        blowup_winf,
        blowup_hs,
        pilot_breaking_time: pilot.breaking_time(),
        ensemble: EnsembleReport::from_trajectories(&trajs),
        members,
    })
}

/// Survival under linear noise c y dW from `scale * y0` for each scale, on
/// common random numbers. The W^{1,inf} threshold at scale k is
/// `winf_factor * k * |inf u0'|`, so every scale is judged relative to its own
/// initial slope, and the clocks watch mu y.
pub fn breaking_sweep(
    setup: &BreakingSetup,
    y0: &State,
    scales: &[f64],
    members: usize,
    base_seed: u64,
) -> Result<Vec<(f64, EnsembleReport)>> {
    if y0.d() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: y0.d(),
        });
    }
    let h0 = crate::diagnostics::min_slope(&y0.u[0])?;
    if !(h0 < 0.0) {
        return Err(Error::param("data must have a negative slope somewhere"));
    }
    scales
        .iter()
        .map(|&k| {
            if !(k > 0.0) {
                return Err(Error::param(format!("scales must be positive, got {k}")));
            }
            let mut cfg = setup.config(NoiseModel::Linear {
                c1: setup.c,
                c2: setup.c,
            });
            cfg.blowup_winf = setup.winf_factor * k * h0.abs();
            cfg.clock_on_transformed = true;
            Ok((k, global_ensemble(&cfg, y0, k, members, base_seed)?))
        })
        .collect()
}
