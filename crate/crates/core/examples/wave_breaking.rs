//! Steep data under linear noise: breaking times, clock agreement and the
//! Riccati window.

use mch2::dynamics::Status;
use mch2::experiments::{breaking_ensemble, steep_slope_data, BreakingSetup};
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let members: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let grid = Grid::new(1, 1024)?;
    let data = steep_slope_data(&grid, 8.0, 0.1, 0.5, 2.0)?;
    let a = &data.assessment;
    println!(
        "inf u0' = {:.3}, threshold {:.3}, E0 = {:.3}",
        a.min_slope0, a.threshold, a.energy0
    );
    let setup = BreakingSetup {
        grid,
        s: 2.0,
        dt: 1e-3,
        t_end: 2.0,
        c: 0.1,
        lambda: 0.5,
        winf_factor: 3.0,
        record_every: 5,
    };
    let r = breaking_ensemble(&setup, &data.state, members, 0)?;
    println!(
        "riccati window {:?}, noiseless breaking time {:?}",
        r.riccati_window, r.pilot_breaking_time
    );
    for m in &r.members {
        match m.status {
            Status::Broke { t_star } => println!(
                "seed {:>20}: t* = {t_star:.4}  clock gap {:?}  barrier first {:?}",
                m.seed, m.clock_gap, m.barrier_first
            ),
            other => println!("seed {:>20}: {other:?}", m.seed),
        }
    }
    println!(
        "broke {}/{}, largest clock gap {:?}",
        r.ensemble.broke,
        r.ensemble.members,
        r.max_clock_gap()
    );
    Ok(())
}
