//! Sobolev norms, Bessel potentials and the Littlewood-Paley split of a
//! rough field, plus its mollification.

use mch2::spectral::{lp_block, mollify, power_law_field};
use mch2::Grid;

fn main() -> mch2::Result<()> {
    let g = Grid::new(1, 1024)?;
    let f = power_law_field(&g, 2.6);
    for s in [0.0, 1.0, 2.0, 2.4] {
        println!("||f||_H^{s:<4} = {:.6}", f.sobolev_norm(s));
    }
    let lifted = f.bessel(1.0);
    println!(
        "||Lambda f||_H^1 = {:.6} vs ||f||_H^2 = {:.6}",
        lifted.sobolev_norm(1.0),
        f.sobolev_norm(2.0)
    );

    let mut total = 0.0;
    for q in -1..=8 {
        let block = lp_block(&f, q)?;
        let e = block.sobolev_norm(0.0).powi(2);
        total += e;
        println!("block {q:>2}: L2 energy {e:.3e}");
    }
    println!("sum of blocks {total:.6e}, ||f||^2 {:.6e}", f.sobolev_norm(0.0).powi(2));

    for k in 2..=6 {
        let eps = 2f64.powi(-k);
        let defect = (&f - &mollify(&f, eps)?).sobolev_norm(0.0);
        println!("eps = {eps:<9} ||f - J_eps f||_L2 = {defect:.3e}");
    }
    Ok(())
}
