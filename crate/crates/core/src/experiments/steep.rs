use std::sync::Arc;

use num_complex::Complex64;

use crate::diagnostics::{breaking_condition, BreakingAssessment};
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField, State};

#[derive(Clone, Debug)]
pub struct SteepData {
    pub state: State,
    /// Concentration of the slope bump exp(k (cos x - 1)).
    pub concentration: f64,
    pub assessment: BreakingAssessment,
}

/// u with u' = -A (b - mean b), b = exp(k (cos x - 1)); gamma = 0.
fn profile(grid: &Arc<Grid>, amplitude: f64, k: f64) -> Result<SpectralField> {
    let bump = SpectralField::from_fn(grid, |x| (k * (x[0].cos() - 1.0)).exp());
    let kmax = grid.cutoff() as i64;
    let tail = bump.mode([kmax, 0]).norm() / bump.mode([0, 0]).norm();
    if tail > 1e-13 {
        return Err(Error::param(format!(
            "slope bump with concentration {k:.3e} is not resolved on N = {}",
            grid.n_per_dim()
        )));
    }
    let mut slope = bump.scale(-amplitude);
    slope.set_mode([0, 0], Complex64::new(0.0, 0.0))?;
    Ok(slope
        .apply_multiplier(|xi| {
            if xi[0] == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / xi[0])
            }
        })
        .dealias())
}

/// Steep-slope 1-D data: a concentrated negative slope of depth about
/// `amplitude`, with the bump width chosen by bisection so that
/// inf u0' = margin * threshold(E0, c, lambda).
pub fn steep_slope_data(grid: &Arc<Grid>, amplitude: f64, c: f64, lambda: f64, margin: f64) -> Result<SteepData> {
    if grid.d() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: grid.d(),
        });
    }
    if !(amplitude > 0.0 && margin >= 1.0) {
        return Err(Error::param("amplitude must be positive and margin at least 1"));
    }
    let zero = SpectralField::zeros(grid);
    let excess = |k: f64| -> Result<f64> {
        let u = profile(grid, amplitude, k)?;
        let a = breaking_condition(&u, &zero, c, lambda)?;
        Ok(a.min_slope0 - margin * a.threshold)
    };
    // wide bumps have small slopes and large energy; narrow ones the reverse
    let (mut lo, mut hi) = (0.0f64, 2.0f64.ln());
    loop {
        match excess(hi.exp()) {
            Ok(v) if v < 0.0 => break,
            Ok(_) => {
                lo = hi;
                hi += 2.0f64.ln();
            }
            Err(_) => {
                return Err(Error::param(format!(
                    "no resolvable slope bump reaches margin {margin} on N = {}",
                    grid.n_per_dim()
                )))
            }
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid.exp())? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let k = hi.exp();
    let u = profile(grid, amplitude, k)?;
    let assessment = breaking_condition(&u, &zero, c, lambda)?;
    Ok(SteepData {
        state: State::new_1d(u, zero)?,
        concentration: k,
        assessment,
    })
}
