//! Command-line front end: configuration, ensemble orchestration, output
//! files and run manifests.
//!
//! Every command writes into `--out` (default `out/`): CSV tables, SVG plots,
//! `report.json` holding `{manifest, report}`, and `manifest.json`. Exit codes
//! are 0 on success, 1 when a check fails or a run errors, 2 on bad usage or
//! invalid configuration.

pub mod checks;
pub mod config;
pub mod manifest;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, Status, Trajectory};
use crate::error::{Error, Result};
use crate::experiments::{
    breaking_ensemble, decay_fit, family_gap, global_regime, run_members, scale_sweep, simulated_gap, steep_slope_data,
    BreakingSetup, EnsembleReport, Gap,
};
use crate::spectral::Grid;
use crate::stochastics::NoiseModel;

pub use config::{parse_config, smooth_data, InitSpec, RunConfig};
pub use manifest::{Report, RunManifest};
pub use output::{emit_svg, read_csv, svg_string, write_csv, write_json, PlotOptions, Series};

/// Environment variable that overrides the base seed of every command.
pub const SEED_ENV: &str = "MCH2_SEED";

#[derive(Parser, Debug)]
#[command(name = "mch2", version, about = "Stochastic two-component Camassa-Holm simulator")]
struct Cli {
    /// Worker threads for ensembles [default: logical cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trajectory, or an ensemble when run.members > 1
    Simulate(SimulateArgs),
    /// Run the operator and mollifier identity checks
    VerifyOps(VerifyArgs),
    /// Fit the decay rate of the approximate-solution residual in n
    Decay(DecayArgs),
    /// Distance between the kappa = +1 and -1 travelling solutions
    Gap(GapArgs),
    /// Survival statistics for an ensemble, optionally across data scales
    Global(GlobalArgs),
    /// Breaking statistics from steep-slope data under linear noise
    Breaking(BreakingArgs),
    /// Plot columns of a CSV file
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Run configuration file
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    config: Option<PathBuf>,
    /// Replay the run recorded in a manifest.json
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    members: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Also write checks.json here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecayArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Frequencies, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Simpson panels on [0, t_end]
    #[arg(long, default_value_t = 8)]
    panels: usize,
    /// Exit 1 if the fitted rate deviates from the prediction by more than this fraction
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct GapArgs {
    #[arg(long, value_delimiter = ',', default_value = "64,128")]
    n: Vec<u32>,
    #[arg(long, default_value_t = 2.5)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Also simulate both solutions from their initial data (zero noise)
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 0.025)]
    dt: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Base run configuration
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    config: Option<PathBuf>,
    /// Replay the run recorded in a manifest.json
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Data scales, comma separated
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    members: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct BreakingArgs {
    #[arg(long, default_value_t = 1024)]
    grid_n: usize,
    #[arg(long, default_value_t = 8.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 2.0)]
    t_end: f64,
    /// Blow-up threshold on the W^{1,inf} norm as a multiple of |inf u0'|
    #[arg(long, default_value_t = 3.0)]
    winf_factor: f64,
    #[arg(long, default_value_t = 5)]
    record_every: usize,
    #[arg(long, default_value_t = 100)]
    members: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    x: String,
    /// Columns to draw, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<String>,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
    #[arg(long, default_value = "")]
    title: String,
    /// SVG file to write
    #[arg(long)]
    out: PathBuf,
}

/// Run the CLI on `argv` (program name first) and return the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with_env(argv, std::env::var(SEED_ENV).ok())
}

/// [`run_cli`] with the value of `MCH2_SEED` passed in explicitly.
pub fn run_cli_with_env<I, T>(argv: I, env_seed: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_seed = match env_seed.map(|s| s.trim().parse::<u64>()) {
        None => None,
        Some(Ok(v)) => Some(v),
        Some(Err(_)) => {
            eprintln!("error: {SEED_ENV} must be an unsigned integer");
            return 2;
        }
    };
    let run = || dispatch(cli.command, env_seed);
    let result = match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {j} worker threads: {e}");
                return 1;
            }
        },
        None => run(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::MissingKey(_)
        | Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::Unresolved { .. }
        | Error::Dimension { .. } => 2,
        _ => 1,
    }
}

fn dispatch(command: Command, env_seed: Option<u64>) -> Result<i32> {
    match command {
        Command::Simulate(a) => cmd_simulate(a, env_seed),
        Command::VerifyOps(a) => cmd_verify(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Global(a) => cmd_global(a, env_seed),
        Command::Breaking(a) => cmd_breaking(a, env_seed),
        Command::Plot(a) => cmd_plot(a),
    }
}

/// Collects output files and writes `report.json` and `manifest.json` last.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl Outputs {
    fn new(dir: &Path) -> Outputs {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        }
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        write_csv(&self.dir.join(name), header, rows)?;
        self.files.push(name.into());
        Ok(())
    }

    fn svg(&mut self, name: &str, series: &[Series], opts: &PlotOptions) -> Result<()> {
        emit_svg(&self.dir.join(name), series, opts)?;
        self.files.push(name.into());
        Ok(())
    }

    fn finish<T: Serialize>(mut self, mut manifest: RunManifest, report: &T) -> Result<()> {
        self.files.push("report.json".into());
        self.files.push("manifest.json".into());
        manifest.outputs = self.files;
        let det = manifest.deterministic();
        write_json(&self.dir.join("report.json"), &Report { manifest: &det, report })?;
        manifest.wall_clock_seconds = Some(self.started.elapsed().as_secs_f64());
        write_json(&self.dir.join("manifest.json"), &manifest)?;
        println!("wrote {} files to {}", manifest.outputs.len(), self.dir.display());
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Config text from a config file or from a manifest of `command`, with the
/// keys belonging to `command` itself split off.
fn load_config(
    command: &str,
    config: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<(String, BTreeMap<String, String>)> {
    let text = match (config, manifest) {
        (Some(p), _) => return Ok((read_text(p)?, BTreeMap::new())),
        (None, Some(p)) => {
            let m = RunManifest::read(p)?;
            if m.command != command {
                return Err(Error::param(format!(
                    "{} records a `{}` run, not `{command}`",
                    p.display(),
                    m.command
                )));
            }
            m.config
        }
        (None, None) => return Err(Error::MissingKey("--config".into())),
    };
    let prefix = format!("{command}.");
    let (own, sim): (BTreeMap<_, _>, BTreeMap<_, _>) = text.into_iter().partition(|(k, _)| k.starts_with(&prefix));
    Ok((sim.iter().map(|(k, v)| format!("{k} = {v}\n")).collect(), own))
}

fn resolve(mut cfg: RunConfig, seed: Option<u64>, env_seed: Option<u64>, members: Option<usize>) -> RunConfig {
    if let Some(s) = seed.or(env_seed) {
        cfg = cfg.with_seed(s);
    }
    if let Some(m) = members {
        cfg.members = m;
        cfg.echo.insert("run.members".into(), m.to_string());
    }
    cfg
}

/// Per-trajectory summary stored in `report.json` for single runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub seed: u64,
    pub status: Status,
    pub records: usize,
    pub steps: u64,
    pub halvings: u32,
    pub winf_crossing: Option<usize>,
    pub hs_crossing: Option<usize>,
    pub final_time: f64,
    pub initial_energy: f64,
    /// max_t |E(t) - E(0)| / E(0) over the records
    pub max_energy_drift: f64,
}

impl TrajectorySummary {
    pub fn of(traj: &Trajectory) -> TrajectorySummary {
        let e0 = traj.records.first().map_or(f64::NAN, |r| r.energy);
        let drift = traj
            .records
            .iter()
            .map(|r| (r.energy - e0).abs() / e0)
            .fold(0.0, f64::max);
        TrajectorySummary {
            seed: traj.seed,
            status: traj.status,
            records: traj.records.len(),
            steps: traj.steps,
            halvings: traj.halvings,
            winf_crossing: traj.winf_crossing,
            hs_crossing: traj.hs_crossing,
            final_time: traj.records.last().map_or(0.0, |r| r.t),
            initial_energy: e0,
            max_energy_drift: drift,
        }
    }
}

fn status_code(s: &Status) -> f64 {
    match s {
        Status::Survived => 0.0,
        Status::Broke { .. } => 1.0,
        Status::DtUnderflow { .. } => 2.0,
    }
}

fn norm_plot(trajs: &[Trajectory], title: &str) -> (Vec<Series>, PlotOptions) {
    let series = trajs
        .iter()
        .enumerate()
        .map(|(i, t)| Series {
            label: if trajs.len() == 1 {
                "||y||_{H^s}".into()
            } else {
                format!("member {i}")
            },
            x: t.times(),
            y: t.records.iter().map(|r| r.hs_u.hypot(r.hs_gamma)).collect(),
            points: false,
        })
        .collect();
    let opts = PlotOptions {
        title: title.into(),
        x_label: "t".into(),
        y_label: "H^s norm".into(),
        log_y: true,
        ..PlotOptions::default()
    };
    (series, opts)
}

fn cmd_simulate(a: SimulateArgs, env_seed: Option<u64>) -> Result<i32> {
    let (text, _) = load_config("simulate", a.config.as_deref(), a.manifest.as_deref())?;
    let cfg = resolve(parse_config(&text)?, a.seed, env_seed, a.members);
    let y0 = cfg.init.build(&cfg.sim.grid)?;
    let mut out = Outputs::new(&a.out.out);
    let mut manifest = RunManifest::new("simulate", cfg.echo.clone(), cfg.seed);
    if cfg.members <= 1 {
        let traj = simulate(&cfg.sim, &y0, cfg.seed)?;
        manifest.member_seeds = vec![cfg.seed];
        out.csv(
            "trajectory.csv",
            &output::TRAJECTORY_COLUMNS,
            &output::trajectory_rows(&traj),
        )?;
        let (series, opts) = norm_plot(std::slice::from_ref(&traj), "trajectory");
        out.svg("trajectory.svg", &series, &opts)?;
        let summary = TrajectorySummary::of(&traj);
        println!(
            "status {:?} after {} steps ({} records); max relative energy drift {:.3e}",
            summary.status, summary.steps, summary.records, summary.max_energy_drift
        );
        out.finish(manifest, &summary)?;
    } else {
        let trajs = run_members(cfg.members, cfg.seed, |_, seed| simulate(&cfg.sim, &y0, seed))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let report = EnsembleReport::from_trajectories(&trajs);
        manifest.member_seeds = report.member_seeds.clone();
        let rows: Vec<Vec<f64>> = trajs
            .iter()
            .enumerate()
            .map(|(i, t)| {
                vec![
                    i as f64,
                    status_code(&t.status),
                    t.records.last().map_or(0.0, |r| r.t),
                    t.records.iter().map(|r| r.winf).fold(0.0, f64::max),
                ]
            })
            .collect();
        out.csv("ensemble.csv", &["member", "status", "t_final", "winf_max"], &rows)?;
        let (series, opts) = norm_plot(&trajs, "ensemble");
        out.svg("ensemble.svg", &series, &opts)?;
        println!(
            "{} members: {} survived, {} broke, {} dt underflow",
            report.members, report.survived, report.broke, report.underflow
        );
        out.finish(manifest, &report)?;
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let all = checks::all_checks()?;
    for c in &all {
        println!("{}", c.line());
    }
    let passed = all.iter().filter(|c| c.passed).count();
    println!("passed {passed}/{}", all.len());
    if let Some(dir) = a.out {
        write_json(&dir.join("checks.json"), &all)?;
    }
    Ok(if passed == all.len() { 0 } else { 1 })
}

fn cmd_decay(a: DecayArgs) -> Result<i32> {
    let fit = decay_fit(a.d, a.s, a.sigma, &a.n, a.t_end, a.panels)?;
    let mut out = Outputs::new(&a.out.out);
    let rows: Vec<Vec<f64>> = fit
        .ns
        .iter()
        .zip(&fit.errors)
        .map(|(&n, &e)| vec![n as f64, e])
        .collect();
    out.csv("decay.csv", &["n", "error"], &rows)?;
    let xs: Vec<f64> = fit.ns.iter().map(|&n| n as f64).collect();
    let line: Vec<f64> = xs
        .iter()
        .map(|x| (fit.intercept - fit.exponent * x.ln()).exp())
        .collect();
    let series = [
        Series {
            label: "residual error".into(),
            x: xs.clone(),
            y: fit.errors.clone(),
            points: true,
        },
        Series {
            label: "least-squares fit".into(),
            x: xs,
            y: line,
            points: false,
        },
    ];
    let opts = PlotOptions {
        title: format!("residual decay, s = {}, sigma = {}", a.s, a.sigma),
        x_label: "n".into(),
        y_label: "||E(T)||".into(),
        log_x: true,
        log_y: true,
        annotation: Some(format!(
            "fitted rate = {:.4} (predicted {})",
            fit.exponent, fit.expected
        )),
    };
    out.svg("decay.svg", &series, &opts)?;
    let config = BTreeMap::from([
        ("decay.d".to_string(), a.d.to_string()),
        (
            "decay.n".into(),
            a.n.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        ),
        ("decay.panels".into(), a.panels.to_string()),
        ("decay.s".into(), format!("{:?}", a.s)),
        ("decay.sigma".into(), format!("{:?}", a.sigma)),
        ("decay.t_end".into(), format!("{:?}", a.t_end)),
    ]);
    println!(
        "fitted rate {:.4}, predicted {}, relative deviation {:.2}%",
        fit.exponent,
        fit.expected,
        100.0 * fit.relative_deviation()
    );
    out.finish(RunManifest::new("decay", config, 0), &fit)?;
    Ok(match a.tol {
        Some(tol) if !(fit.relative_deviation() <= tol) => 1,
        _ => 0,
    })
}

/// Smallest power-of-two grid (at least 64 per axis, d = 2) retaining
/// frequency n.
fn gap_grid(n: u32) -> Result<Arc<Grid>> {
    let mut size = 64;
    loop {
        let g = Grid::new(2, size)?;
        if g.cutoff() >= n as usize {
            return Ok(g);
        }
        size *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u32,
    pub family: Gap,
    pub simulated: Option<Gap>,
}

fn cmd_gap(a: GapArgs) -> Result<i32> {
    let mut rows = Vec::new();
    for &n in &a.n {
        let g = gap_grid(n)?;
        let family = family_gap(&g, n, a.s, a.t_end, a.samples)?;
        let simulated = if a.simulate {
            Some(simulated_gap(&g, n, a.s, a.t_end, a.dt, NoiseModel::Zero, 0)?.gap)
        } else {
            None
        };
        println!(
            "n = {n}: initial {:.4e}, sup {:.4} at t = {:.3}{}",
            family.initial,
            family.sup,
            family.t_sup,
            simulated.map_or(String::new(), |s| format!(", simulated sup {:.4}", s.sup))
        );
        rows.push(GapRow { n, family, simulated });
    }
    let mut out = Outputs::new(&a.out.out);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n as f64,
                r.family.initial,
                r.family.sup,
                r.family.t_sup,
                r.simulated.map_or(f64::NAN, |s| s.sup),
            ]
        })
        .collect();
    out.csv("gap.csv", &["n", "initial", "sup", "t_sup", "simulated_sup"], &table)?;
    let ns: Vec<f64> = a.n.iter().map(|&n| n as f64).collect();
    let series = [
        Series {
            label: "initial distance".into(),
            x: ns.clone(),
            y: rows.iter().map(|r| r.family.initial).collect(),
            points: true,
        },
        Series {
            label: "sup distance".into(),
            x: ns,
            y: rows.iter().map(|r| r.family.sup).collect(),
            points: true,
        },
    ];
    let opts = PlotOptions {
        title: "distance between the two travelling solutions".into(),
        x_label: "n".into(),
        y_label: "H^s distance".into(),
        log_x: true,
        log_y: true,
        annotation: None,
    };
    out.svg("gap.svg", &series, &opts)?;
    let config = BTreeMap::from([
        ("gap.dt".to_string(), format!("{:?}", a.dt)),
        (
            "gap.n".into(),
            a.n.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        ),
        ("gap.s".into(), format!("{:?}", a.s)),
        ("gap.samples".into(), a.samples.to_string()),
        ("gap.simulate".into(), a.simulate.to_string()),
        ("gap.t_end".into(), format!("{:?}", a.t_end)),
    ]);
    out.finish(RunManifest::new("gap", config, 0), &rows)?;
    Ok(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalReport {
    /// Regime number 1-4 for polynomial noise, if any applies.
    pub regime: Option<u8>,
    pub scales: Vec<f64>,
    pub ensembles: Vec<EnsembleReport>,
}

fn cmd_global(a: GlobalArgs, env_seed: Option<u64>) -> Result<i32> {
    let (text, own) = load_config("global", a.config.as_deref(), a.manifest.as_deref())?;
    let cfg = resolve(parse_config(&text)?, a.seed, env_seed, a.members);
    let scales = match (a.scales, own.get("global.scales")) {
        (Some(s), _) => s,
        (None, Some(s)) => s
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| Error::param(format!("bad scale `{v}`"))))
            .collect::<Result<_>>()?,
        (None, None) => vec![1.0],
    };
    let regime = match cfg.sim.noise {
        NoiseModel::Polynomial {
            c1, c2, delta1, delta2, ..
        } => global_regime(c1, c2, delta1, delta2),
        _ => None,
    };
    let y0 = cfg.init.build(&cfg.sim.grid)?;
    let sweep = scale_sweep(&cfg.sim, &y0, &scales, cfg.members, cfg.seed)?;
    let mut echo = cfg.echo.clone();
    echo.insert(
        "global.scales".into(),
        scales.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(","),
    );
    let mut manifest = RunManifest::new("global", echo, cfg.seed);
    manifest.member_seeds = sweep.first().map(|(_, r)| r.member_seeds.clone()).unwrap_or_default();
    let mut out = Outputs::new(&a.out.out);
    let rows: Vec<Vec<f64>> = sweep
        .iter()
        .map(|(k, r)| {
            vec![
                *k,
                r.members as f64,
                r.survival_fraction.unwrap_or(f64::NAN),
                r.breaking_fraction.unwrap_or(f64::NAN),
                r.lognorm.map_or(f64::NAN, |e| e.slope),
                r.lognorm.map_or(f64::NAN, |e| e.rms_residual),
            ]
        })
        .collect();
    out.csv(
        "global.csv",
        &[
            "scale",
            "members",
            "survival",
            "breaking",
            "lognorm_slope",
            "lognorm_rms",
        ],
        &rows,
    )?;
    let series = [Series {
        label: "survival fraction".into(),
        x: scales.clone(),
        y: rows.iter().map(|r| r[2]).collect(),
        points: true,
    }];
    let opts = PlotOptions {
        title: "survival against data scale".into(),
        x_label: "scale".into(),
        y_label: "survival fraction".into(),
        log_x: true,
        ..PlotOptions::default()
    };
    out.svg("global.svg", &series, &opts)?;
    for (k, r) in &sweep {
        println!(
            "scale {k}: survived {}/{}{}",
            r.survived,
            r.members,
            r.lognorm.map_or(String::new(), |e| format!(
                ", log-norm slope {:.4e} (rms {:.2e})",
                e.slope, e.rms_residual
            ))
        );
    }
    let report = GlobalReport {
        regime,
        scales,
        ensembles: sweep.into_iter().map(|(_, r)| r).collect(),
    };
    out.finish(manifest, &report)?;
    Ok(0)
}

fn cmd_breaking(a: BreakingArgs, env_seed: Option<u64>) -> Result<i32> {
    let seed = env_seed.unwrap_or(a.seed);
    let grid = Grid::new(1, a.grid_n)?;
    let data = steep_slope_data(&grid, a.amplitude, a.c, a.lambda, a.margin)?;
    let setup = BreakingSetup {
        grid,
        s: 2.0,
        dt: a.dt,
        t_end: a.t_end,
        c: a.c,
        lambda: a.lambda,
        winf_factor: a.winf_factor,
        record_every: a.record_every,
    };
    let report = breaking_ensemble(&setup, &data.state, a.members, seed)?;
    let mut out = Outputs::new(&a.out.out);
    let rows: Vec<Vec<f64>> = report
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            vec![
                i as f64,
                status_code(&m.status),
                match m.status {
                    Status::Broke { t_star } => t_star,
                    _ => f64::NAN,
                },
                m.clock_gap.map_or(f64::NAN, |g| g as f64),
                m.pathwise_window.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    out.csv(
        "breaking.csv",
        &["member", "status", "t_star", "clock_gap", "pathwise_window"],
        &rows,
    )?;
    let series = [
        Series {
            label: "breaking time".into(),
            x: rows.iter().map(|r| r[0]).collect(),
            y: rows.iter().map(|r| r[2]).collect(),
            points: true,
        },
        Series {
            label: "pathwise bound".into(),
            x: rows.iter().map(|r| r[0]).collect(),
            y: rows.iter().map(|r| r[4]).collect(),
            points: true,
        },
    ];
    let opts = PlotOptions {
        title: "breaking times per path".into(),
        x_label: "member".into(),
        y_label: "t".into(),
        annotation: report.riccati_window.map(|w| format!("deterministic bound {w:.4}")),
        ..PlotOptions::default()
    };
    out.svg("breaking.svg", &series, &opts)?;
    let config = BTreeMap::from([
        ("breaking.amplitude".to_string(), format!("{:?}", a.amplitude)),
        ("breaking.c".into(), format!("{:?}", a.c)),
        ("breaking.dt".into(), format!("{:?}", a.dt)),
        ("breaking.grid_n".into(), a.grid_n.to_string()),
        ("breaking.lambda".into(), format!("{:?}", a.lambda)),
        ("breaking.margin".into(), format!("{:?}", a.margin)),
        ("breaking.members".into(), a.members.to_string()),
        ("breaking.record_every".into(), a.record_every.to_string()),
        ("breaking.t_end".into(), format!("{:?}", a.t_end)),
        ("breaking.winf_factor".into(), format!("{:?}", a.winf_factor)),
    ]);
    let mut manifest = RunManifest::new("breaking", config, seed);
    manifest.member_seeds = report.members.iter().map(|m| m.seed).collect();
    println!(
        "inf u0' = {:.4}, threshold {:.4}; broke {}/{}; max clock gap {:?}",
        report.assessment.min_slope0,
        report.assessment.threshold,
        report.ensemble.broke,
        report.ensemble.members,
        report.max_clock_gap()
    );
    out.finish(manifest, &report)?;
    Ok(0)
}

fn cmd_plot(a: PlotArgs) -> Result<i32> {
    let (header, cols) = read_csv(&read_text(&a.csv)?)?;
    let column = |name: &str| -> Result<&Vec<f64>> {
        header
            .iter()
            .position(|h| h == name)
            .map(|i| &cols[i])
            .ok_or_else(|| Error::param(format!("{} has no column `{name}`", a.csv.display())))
    };
    let x = column(&a.x)?;
    let series =
        a.y.iter()
            .map(|name| {
                Ok(Series {
                    label: name.clone(),
                    x: x.clone(),
                    y: column(name)?.clone(),
                    points: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
    let opts = PlotOptions {
        title: a.title,
        x_label: a.x,
        y_label: a.y.join(", "),
        log_x: a.log_x,
        log_y: a.log_y,
        annotation: None,
    };
    emit_svg(&a.out, &series, &opts)?;
    println!("wrote {}", a.out.display());
    Ok(0)
}
