//! Survival under strong polynomial noise and the growth of the log-norm.

use mch2::dynamics::SimConfig;
use mch2::experiments::{global_ensemble, global_regime};
use mch2::harness::smooth_data;
use mch2::stochastics::NoiseModel;
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let members: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let t_end: f64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let (c1, c2, delta1, delta2) = (1.0, 1.0, 1.0, 1.5);
    println!("regime {:?}", global_regime(c1, c2, delta1, delta2));
    let g = Grid::new(1, 64)?;
    let mut cfg = SimConfig::new(&g, 2.5, 2.5e-4, t_end);
    cfg.noise = NoiseModel::Polynomial {
        c1,
        c2,
        delta1,
        delta2,
        s_norm: 2.5,
    };
    cfg.adaptive = true;
    cfg.record_every = 400;
    let r = global_ensemble(&cfg, &smooth_data(&g, 1.0), 1.0, members, 5)?;
    println!(
        "survived {}/{} (broke {}, underflow {})",
        r.survived, r.members, r.broke, r.underflow
    );
    if let Some(e) = r.lognorm {
        println!(
            "log-norm envelope: slope {:.4}, intercept {:.4}, rms {:.4}",
            e.slope, e.intercept, e.rms_residual
        );
    }
    Ok(())
}
