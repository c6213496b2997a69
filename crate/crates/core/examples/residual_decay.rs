//! Decay in n of the residual of the travelling approximate solutions.

use mch2::experiments::decay_fit;

fn main() -> mch2::Result<()> {
    let s: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.5);
    let fit = decay_fit(2, s, 1.2, &[8, 16, 32, 64], 1.0, 8)?;
    for (n, e) in fit.ns.iter().zip(&fit.errors) {
        println!("n = {n:>3}  ||E(T)|| = {e:.4e}");
    }
    println!("fitted rate {:.4}, predicted {:.4}", fit.exponent, fit.expected);
    Ok(())
}
