//! Two travelling solutions that start 1/n apart and separate by O(1).

use mch2::experiments::{family_gap, simulated_gap};
use mch2::stochastics::NoiseModel;
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let s = 2.5;
    for (n, size) in [(8, 64), (16, 64), (32, 128)] {
        let g = Grid::new(2, size)?;
        let gap = family_gap(&g, n, s, 1.0, 100)?;
        println!(
            "n = {n:>3}: initial {:.4e}  sup {:.4} at t = {:.2}",
            gap.initial, gap.sup, gap.t_sup
        );
    }
    let g = Grid::new(2, 64)?;
    let sim = simulated_gap(&g, 16, s, 1.0, 0.025, NoiseModel::Zero, 0)?;
    println!(
        "simulated n = 16: initial {:.4e}  sup {:.4}  distance to the family {:.3e}",
        sim.gap.initial, sim.gap.sup, sim.tube
    );
    Ok(())
}
