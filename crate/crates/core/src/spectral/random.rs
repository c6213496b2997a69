//! Seeded random band-limited fields for identity checks and tests.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{Grid, SpectralField, State};

/// Random real field with modes up to `kmax` per axis and amplitudes decaying
/// like (1 + |m|^2)^{-1}.
pub fn random_field(grid: &Arc<Grid>, kmax: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let k2max = if grid.d() == 2 { kmax } else { 0 };
    for m0 in -kmax..=kmax {
        for m1 in -k2max..=k2max {
            if (m0, m1) < (0, 0) {
                continue;
            }
            let decay = 1.0 / (1.0 + (m0 * m0 + m1 * m1) as f64);
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            f.set_mode([m0, m1], v).unwrap();
        }
    }
    f
}

pub fn random_state(grid: &Arc<Grid>, kmax: i64, seed: u64) -> State {
    let d = grid.d() as u64;
    let u = (0..d)
        .map(|i| random_field(grid, kmax, seed.wrapping_mul(31).wrapping_add(i)))
        .collect();
    let gamma = random_field(grid, kmax, seed.wrapping_mul(31).wrapping_add(d));
    State::new(u, gamma).unwrap()
}
