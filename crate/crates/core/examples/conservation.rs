//! H^1 energy of mu y along a linear-noise run of the random PDE.

use mch2::dynamics::{simulate, Scheme, SimConfig};
use mch2::harness::smooth_data;
use mch2::stochastics::NoiseModel;
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let c: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let g = Grid::new(1, 256)?;
    let y0 = smooth_data(&g, 1.0);
    let mut cfg = SimConfig::new(&g, 3.0, 1e-4, 1.0);
    cfg.scheme = Scheme::Rk4RandomPde;
    cfg.noise = NoiseModel::Linear { c1: c, c2: c };
    cfg.record_every = 1000;
    let traj = simulate(&cfg, &y0, 7)?;
    let e0 = traj.records[0].energy;
    println!("{:>6} {:>14} {:>12} {:>12}", "t", "E(t)", "rel drift", "||u||_H^3");
    for r in &traj.records {
        println!(
            "{:>6.2} {:>14.10} {:>12.3e} {:>12.5}",
            r.t,
            r.energy,
            (r.energy - e0).abs() / e0,
            r.hs_u
        );
    }
    Ok(())
}
