//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! grid.d = 1
//! grid.n = 256
//! sim.dt = 1e-4
//! sim.t_end = 1
//! noise.kind = zero
//! ```
//!
//! Keys (defaults in brackets):
//!
//! | key | meaning |
//! |-----|---------|
//! | `grid.d`, `grid.n` | dimension (1 or 2) and points per axis (required) |
//! | `sim.s` | tracked Sobolev index [2 + d/2] |
//! | `sim.dt`, `sim.t_end` | step and horizon (required) |
//! | `sim.scheme` | `euler_maruyama`, `rk4_random_pde`, `euler_maruyama_regularized` [euler_maruyama] |
//! | `sim.blowup_winf`, `sim.blowup_hs`, `sim.dt_min` | stopping thresholds [1e3, 1e12, 1e-10] |
//! | `sim.record_every`, `sim.grace_records` | [1, 20] |
//! | `sim.adaptive` | halve dt as the W^{1,inf} norm doubles [false] |
//! | `sim.clock` | `physical` or `transformed`: state watched by the blow-up clocks [physical] |
//! | `noise.kind` | `zero`, `linear`, `polynomial`, `finite_mode` (required) |
//! | `noise.c1`, `noise.c2` | linear and polynomial coefficients (required for those kinds) |
//! | `noise.delta1`, `noise.delta2` | polynomial exponents (required for polynomial) |
//! | `noise.s_norm` | Sobolev index inside the polynomial noise [sim.s] |
//! | `noise.modes` | finite modes `k1:k2:amplitude;...` (required for finite_mode) |
//! | `reg.epsilon`, `reg.r` | mollifier scale and truncation radius |
//! | `init.kind` | `smooth`, `steep`, `family`, `zero` [smooth] |
//! | `init.amplitude` | scale of smooth or steep data [1] |
//! | `init.c`, `init.lambda`, `init.margin` | steep data targets [0.1, 0.5, 2] |
//! | `init.n`, `init.kappa` | family frequency and sign [8, 1] |
//! | `run.seed`, `run.members` | base seed and ensemble size [0, 1] |

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::dynamics::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::experiments::{approx_solution, steep_slope_data, ApproxFamilyParams};
use crate::operators::RegularizationParams;
use crate::spectral::{Grid, SpectralField, State};
use crate::stochastics::{NoiseMode, NoiseModel};

const KEYS: &[&str] = &[
    "grid.d",
    "grid.n",
    "sim.s",
    "sim.dt",
    "sim.t_end",
    "sim.scheme",
    "sim.blowup_winf",
    "sim.blowup_hs",
    "sim.dt_min",
    "sim.record_every",
    "sim.grace_records",
    "sim.adaptive",
    "sim.clock",
    "noise.kind",
    "noise.c1",
    "noise.c2",
    "noise.delta1",
    "noise.delta2",
    "noise.s_norm",
    "noise.modes",
    "reg.epsilon",
    "reg.r",
    "init.kind",
    "init.amplitude",
    "init.c",
    "init.lambda",
    "init.margin",
    "init.n",
    "init.kappa",
    "run.seed",
    "run.members",
];

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Zero,
    Smooth {
        amplitude: f64,
    },
    Steep {
        amplitude: f64,
        c: f64,
        lambda: f64,
        margin: f64,
    },
    Family {
        n: u32,
        kappa: f64,
        s: f64,
    },
}

impl InitSpec {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<State> {
        match *self {
            InitSpec::Zero => Ok(State::zeros(grid)),
            InitSpec::Smooth { amplitude } => Ok(smooth_data(grid, amplitude)),
            InitSpec::Steep {
                amplitude,
                c,
                lambda,
                margin,
            } => Ok(steep_slope_data(grid, amplitude, c, lambda, margin)?.state),
            InitSpec::Family { n, kappa, s } => {
                let d = grid.d() as f64;
                let p = ApproxFamilyParams {
                    kappa,
                    n,
                    s,
                    sigma: 0.5 * (d / 2.0 + (s - 1.0).min(1.0 + d / 2.0)),
                    d: grid.d(),
                    t_end: 0.0,
                };
                approx_solution(grid, &p, 0.0)
            }
        }
    }
}

/// A few low modes in every field, scaled so that ||y||_{H^3} = amplitude.
pub fn smooth_data(grid: &Arc<Grid>, amplitude: f64) -> State {
    let two = grid.d() == 2;
    let wave = move |x: [f64; 2], a: f64, b: f64, c: f64| {
        let y = if two { x[1] } else { 0.0 };
        a * (x[0] + 0.3).sin() + b * (2.0 * x[0] - 0.7 + y).cos() + c * (3.0 * y + x[0]).sin()
    };
    let u = (0..grid.d())
        .map(|i| {
            let shift = i as f64;
            SpectralField::from_fn(grid, |x| wave([x[0] + shift, x[1]], 1.0, 0.4, 0.1))
        })
        .collect();
    let gamma = SpectralField::from_fn(grid, |x| wave(x, 0.5, -0.3, 0.2));
    let y = State::new(u, gamma).expect("fields share the grid").dealias();
    let norm = y.norm(3.0);
    if norm == 0.0 || amplitude == 0.0 {
        State::zeros(grid)
    } else {
        y.scale(amplitude / norm)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub init: InitSpec,
    pub seed: u64,
    pub members: usize,
    /// Every recognised key with its value as written, sorted by key.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    /// Canonical text: one `key = value` line per given key, sorted.
    pub fn canonical_text(&self) -> String {
        self.echo.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn with_seed(mut self, seed: u64) -> RunConfig {
        self.seed = seed;
        self.echo.insert("run.seed".into(), seed.to_string());
        self
    }
}

struct Table {
    values: BTreeMap<String, (usize, String)>,
}

impl Table {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.values.get(key)
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |v| v.0)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| Error::Config {
                line: *line,
                key: key.into(),
                msg: format!("cannot parse `{v}`"),
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::MissingKey(key.into()))
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(key),
            key: key.into(),
            msg: msg.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Table> {
    let known: BTreeSet<&str> = KEYS.iter().copied().collect();
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.into(),
            msg: "expected `key = value`".into(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !known.contains(k) {
            return Err(Error::Config {
                line,
                key: k.into(),
                msg: "unknown key".into(),
            });
        }
        if values.insert(k.to_string(), (line, v.to_string())).is_some() {
            return Err(Error::Config {
                line,
                key: k.into(),
                msg: "duplicate key".into(),
            });
        }
    }
    Ok(Table { values })
}

fn parse_modes(t: &Table) -> Result<Vec<NoiseMode>> {
    let (_, text) = t
        .raw("noise.modes")
        .ok_or_else(|| Error::MissingKey("noise.modes".into()))?;
    text.split(';')
        .filter(|m| !m.trim().is_empty())
        .map(|m| {
            let parts: Vec<&str> = m.split(':').map(str::trim).collect();
            let bad = || t.invalid("noise.modes", format!("mode `{m}` is not k1:k2:amplitude"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(NoiseMode {
                wavevector: [
                    parts[0].parse().map_err(|_| bad())?,
                    parts[1].parse().map_err(|_| bad())?,
                ],
                amplitude: parts[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Parse and validate a run configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let t = tokenize(text)?;
    let d: usize = t.require("grid.d")?;
    let n: usize = t.require("grid.n")?;
    let grid = Grid::new(d, n).map_err(|e| t.invalid("grid.n", e.to_string()))?;
    let s: f64 = t.or("sim.s", 2.0 + d as f64 / 2.0)?;
    if !(s > 1.0 + d as f64 / 2.0) {
        return Err(t.invalid(
            "sim.s",
            format!(
                "s = {s} violates the well-posedness constraint s > 1 + d/2 = {}",
                1.0 + d as f64 / 2.0
            ),
        ));
    }
    let dt: f64 = t.require("sim.dt")?;
    let t_end: f64 = t.require("sim.t_end")?;
    let mut sim = SimConfig::new(&grid, s, dt, t_end);
    if let Some(name) = t.get::<String>("sim.scheme")? {
        sim.scheme = Scheme::parse(&name).ok_or_else(|| t.invalid("sim.scheme", format!("unknown scheme `{name}`")))?;
    }
    sim.blowup_winf = t.or("sim.blowup_winf", sim.blowup_winf)?;
    sim.blowup_hs = t.or("sim.blowup_hs", sim.blowup_hs)?;
    sim.dt_min = t.or("sim.dt_min", sim.dt_min)?;
    sim.record_every = t.or("sim.record_every", sim.record_every)?;
    sim.grace_records = t.or("sim.grace_records", sim.grace_records)?;
    sim.adaptive = t.or("sim.adaptive", false)?;
    sim.clock_on_transformed = match t.or("sim.clock", "physical".to_string())?.as_str() {
        "physical" => false,
        "transformed" => true,
        other => return Err(t.invalid("sim.clock", format!("unknown clock `{other}`"))),
    };

    let kind: String = t.require("noise.kind")?;
    sim.noise = match kind.as_str() {
        "zero" => NoiseModel::Zero,
        "linear" => NoiseModel::Linear {
            c1: t.require("noise.c1")?,
            c2: t.require("noise.c2")?,
        },
        "polynomial" => NoiseModel::Polynomial {
            c1: t.require("noise.c1")?,
            c2: t.require("noise.c2")?,
            delta1: t.require("noise.delta1")?,
            delta2: t.require("noise.delta2")?,
            s_norm: t.or("noise.s_norm", s)?,
        },
        "finite_mode" => NoiseModel::FiniteMode {
            modes: parse_modes(&t)?,
        },
        other => return Err(t.invalid("noise.kind", format!("unknown noise kind `{other}`"))),
    };
    sim.noise
        .validate(d)
        .map_err(|e| t.invalid("noise.kind", e.to_string()))?;

    match (t.get::<f64>("reg.epsilon")?, t.get::<f64>("reg.r")?) {
        (Some(eps), Some(r)) => {
            sim.reg = Some(RegularizationParams::new(eps, r).map_err(|e| t.invalid("reg.epsilon", e.to_string()))?)
        }
        (None, None) => {}
        (Some(_), None) => return Err(Error::MissingKey("reg.r".into())),
        (None, Some(_)) => return Err(Error::MissingKey("reg.epsilon".into())),
    }
    sim.validate().map_err(|e| t.invalid("sim.scheme", e.to_string()))?;

    let init_kind: String = t.or("init.kind", "smooth".to_string())?;
    let amplitude = t.or("init.amplitude", 1.0)?;
    let init = match init_kind.as_str() {
        "zero" => InitSpec::Zero,
        "smooth" => InitSpec::Smooth { amplitude },
        "steep" => InitSpec::Steep {
            amplitude,
            c: t.or("init.c", 0.1)?,
            lambda: t.or("init.lambda", 0.5)?,
            margin: t.or("init.margin", 2.0)?,
        },
        "family" => InitSpec::Family {
            n: t.or("init.n", 8)?,
            kappa: t.or("init.kappa", 1.0)?,
            s,
        },
        other => return Err(t.invalid("init.kind", format!("unknown initial data `{other}`"))),
    };
    let members: usize = t.or("run.members", 1)?;
    let seed: u64 = t.or("run.seed", 0)?;
    let echo = t.values.into_iter().map(|(k, (_, v))| (k, v)).collect();
    Ok(RunConfig {
        sim,
        init,
        seed,
        members,
        echo,
    })
}
