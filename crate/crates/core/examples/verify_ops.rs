//! Operator, family and mollifier identity checks, as run by `mch2 verify-ops`.

use mch2::harness::checks::all_checks;

fn main() -> mch2::Result<()> {
    let checks = all_checks()?;
    for c in &checks {
        println!("{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(())
}
