//! Survival fraction of steep 1-D data under linear noise as the data shrinks.

use std::time::Instant;

use mch2::experiments::{breaking_sweep, steep_slope_data, BreakingSetup};
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(512);
    let members: usize = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(16);
    let grid = Grid::new(1, n)?;
    let data = steep_slope_data(&grid, 8.0, 0.1, 0.5, 2.0)?;
    let setup = BreakingSetup {
        grid,
        s: 2.0,
        dt: 2e-3,
        t_end: 5.0,
        c: 1.0,
        lambda: 0.5,
        winf_factor: 3.0,
        record_every: 10,
    };
    let start = Instant::now();
    let sweep = breaking_sweep(&setup, &data.state, &[1.0, 0.5, 0.25, 0.125], members, 11)?;
    for (k, r) in &sweep {
        println!(
            "scale {k:<6} survived {:>3}/{:<3} broke {:>3} underflow {}",
            r.survived, r.members, r.broke, r.underflow
        );
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
