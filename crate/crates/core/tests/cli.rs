//! End-to-end runs of the `mch2` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = "\
# small linear-noise run
grid.d = 1
grid.n = 32
sim.dt = 1e-3
sim.t_end = 0.05
sim.scheme = rk4_random_pde
sim.record_every = 5
noise.kind = linear
noise.c1 = 0.5
noise.c2 = 0.5
run.seed = 3
";

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mch2-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn mch2(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mch2"));
    cmd.args(args).env_remove("MCH2_SEED");
    if let Some(s) = env_seed {
        cmd.env("MCH2_SEED", s);
    }
    cmd.output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> String {
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn simulate_replays_byte_identically_from_its_manifest() {
    let dir = scratch("replay");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, CONFIG).unwrap();
    let (a, b) = (dir.join("a"), dir.join("b"));
    let first = mch2(&["simulate", "--config", path(&cfg), "--out", path(&a)], None);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let manifest = a.join("manifest.json");
    let second = mch2(&["simulate", "--manifest", path(&manifest), "--out", path(&b)], None);
    assert_eq!(
        second.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    for f in ["trajectory.csv", "trajectory.svg", "report.json"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f} differs on replay");
    }
    let m = read(manifest);
    assert!(m.contains("\"wall_clock_seconds\"") && m.contains("\"trajectory.csv\""));
    assert!(!read(a.join("report.json")).contains("wall_clock"));
    assert!(read(a.join("trajectory.csv")).starts_with("t,hs_u,hs_gamma,winf,energy,min_slope\n"));
}

#[test]
fn seed_precedence_is_flag_then_environment_then_config() {
    let dir = scratch("seed");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, CONFIG).unwrap();
    let run = |name: &str, extra: &[&str], env: Option<&str>| {
        let out = dir.join(name);
        let mut args = vec!["simulate", "--config", path(&cfg), "--out", path(&out)];
        args.extend_from_slice(extra);
        assert_eq!(mch2(&args, env).status.code(), Some(0));
        read(out.join("trajectory.csv"))
    };
    let base = run("base", &[], None);
    let env = run("env", &[], Some("99"));
    let flag = run("flag", &["--seed", "99"], Some("5"));
    let explicit = run("explicit", &["--seed", "3"], None);
    assert_ne!(base, env);
    assert_eq!(env, flag);
    assert_eq!(base, explicit);
}

#[test]
fn ensemble_is_the_same_on_one_or_many_workers() {
    let dir = scratch("jobs");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, CONFIG).unwrap();
    let run = |jobs: &str| {
        let out = dir.join(format!("j{jobs}"));
        let o = mch2(
            &[
                "--jobs",
                jobs,
                "simulate",
                "--config",
                path(&cfg),
                "--members",
                "6",
                "--out",
                path(&out),
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0));
        (read(out.join("ensemble.csv")), read(out.join("report.json")))
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn usage_and_validation_errors_exit_with_two() {
    let dir = scratch("errors");
    assert_eq!(mch2(&["simulate", "--bogus"], None).status.code(), Some(2));
    assert_eq!(mch2(&[], None).status.code(), Some(2));
    assert_eq!(mch2(&["--help"], None).status.code(), Some(0));
    assert_eq!(mch2(&["--jobs", "0", "verify-ops"], None).status.code(), Some(2));

    let bad = dir.join("bad.cfg");
    fs::write(&bad, CONFIG.replace("grid.n = 32", "grid.n = 30")).unwrap();
    let o = mch2(
        &["simulate", "--config", path(&bad), "--out", path(&dir.join("o"))],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());

    let unknown = dir.join("unknown.cfg");
    fs::write(&unknown, format!("{CONFIG}sim.typo = 1\n")).unwrap();
    let o = mch2(
        &["simulate", "--config", path(&unknown), "--out", path(&dir.join("o"))],
        None,
    );
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(
        mch2(&["simulate", "--config", path(&bad)], Some("abc")).status.code(),
        Some(2)
    );
    let missing = mch2(&["simulate", "--config", path(&dir.join("nope.cfg"))], None);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn verify_ops_passes_and_writes_checks() {
    let dir = scratch("verify");
    let o = mch2(&["verify-ops", "--out", path(&dir)], None);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(!stdout.contains("FAIL"), "{stdout}");
    assert!(stdout.contains("passed 8/8"));
    let checks: serde_json::Value = serde_json::from_str(&read(dir.join("checks.json"))).unwrap();
    assert_eq!(checks.as_array().unwrap().len(), 8);
}

#[test]
fn plot_reads_csv_and_flags_empty_data() {
    let dir = scratch("plot");
    let csv = dir.join("d.csv");
    fs::write(&csv, "n,error\n8,1e-2\n16,2e-3\n32,4e-4\n").unwrap();
    let svg = dir.join("d.svg");
    let o = mch2(
        &[
            "plot",
            "--csv",
            path(&csv),
            "--x",
            "n",
            "--y",
            "error",
            "--log-x",
            "--log-y",
            "--out",
            path(&svg),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = read(svg.clone());
    assert!(text.contains("<polyline") && text.contains("error (log10)"));

    fs::write(&csv, "n,error\n8,-1\n").unwrap();
    let o = mch2(
        &[
            "plot",
            "--csv",
            path(&csv),
            "--x",
            "n",
            "--y",
            "error",
            "--log-y",
            "--out",
            path(&svg),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(read(svg).contains("no data"));

    let o = mch2(
        &[
            "plot",
            "--csv",
            path(&csv),
            "--x",
            "n",
            "--y",
            "missing",
            "--out",
            path(&dir.join("x.svg")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gap_and_decay_write_their_tables() {
    let dir = scratch("tables");
    let o = mch2(
        &["gap", "--n", "8,16", "--samples", "20", "--out", path(&dir.join("gap"))],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let gap = read(dir.join("gap/gap.csv"));
    assert!(gap.starts_with("n,initial,sup,t_sup,simulated_sup\n8.0,"));
    assert_eq!(gap.lines().count(), 3);

    let o = mch2(
        &[
            "decay",
            "--s",
            "2.5",
            "--sigma",
            "1.2",
            "--n",
            "4,6,8,12",
            "--panels",
            "2",
            "--out",
            path(&dir.join("decay")),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(dir.join("decay/decay.csv")).starts_with("n,error\n4.0,"));
    assert!(read(dir.join("decay/decay.svg")).contains("fitted rate"));
    let m = read(dir.join("decay/manifest.json"));
    assert!(m.contains("\"command\": \"decay\""));
}
