//! The transformed density rides along the random characteristics.

use std::f64::consts::PI;

use mch2::diagnostics::transport_residual;
use mch2::dynamics::{simulate_on_path, Scheme, SimConfig};
use mch2::harness::smooth_data;
use mch2::stochastics::NoiseModel;
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let xs: Vec<f64> = (0..64).map(|i| 2.0 * PI * i as f64 / 64.0).collect();
    for (n, dt) in [(64, 4e-3), (128, 2e-3), (256, 1e-3)] {
        let g = Grid::new(1, n)?;
        let mut cfg = SimConfig::new(&g, 3.0, dt, 0.5);
        cfg.scheme = Scheme::Rk4RandomPde;
        cfg.noise = NoiseModel::Linear { c1: 0.5, c2: 0.5 };
        cfg.record_every = 5;
        cfg.keep_states = true;
        let path = cfg.wiener_path(3)?;
        let traj = simulate_on_path(&cfg, &smooth_data(&g, 1.0), &path)?;
        let r = transport_residual(&traj, &path, &xs)?;
        println!(
            "N = {n:>3} dt = {dt:.0e}: relative residual {:.3e}, min Phi_x {:.4}",
            r.relative(),
            r.min_phi_x
        );
    }
    Ok(())
}
