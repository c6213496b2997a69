//! Brownian paths, diffusion coefficients and the exponential change of
//! variables that removes linear multiplicative noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Tendency;
use crate::spectral::{dealiased_product, SpectralField, State};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_key(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Standard normal draw determined entirely by its key.
pub fn keyed_normal(seed: u64, driver: u64, level: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(hash_key(&[seed, driver, level, index]));
    StandardNormal.sample(&mut rng)
}

/// Seed of ensemble member `member` under `base`.
pub fn member_seed(base: u64, member: u64) -> u64 {
    hash_key(&[base, member, 0x6d65_6d62])
}

/// Brownian paths for a set of independent scalar drivers on the grid
/// t_k = k dt, k = 0..=steps.
///
/// Values at dyadic refinements t = k dt / 2^level are produced by Brownian
/// bridge midpoints keyed the same way, so halving the step never changes
/// the path already used.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    seed: u64,
    dt: f64,
    steps: usize,
    increments: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    coarsening: usize,
}

impl WienerPath {
    pub fn sample(seed: u64, dt: f64, steps: usize, drivers: usize) -> Result<WienerPath> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("dt must be positive, got {dt}")));
        }
        let sq = dt.sqrt();
        let increments: Vec<Vec<f64>> = (0..drivers as u64)
            .map(|j| (0..steps as u64).map(|k| sq * keyed_normal(seed, j, 0, k)).collect())
            .collect();
        let cumulative = increments.iter().map(|inc| prefix_sum(inc)).collect();
        Ok(WienerPath {
            seed,
            dt,
            steps,
            increments,
            cumulative,
            coarsening: 1,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn drivers(&self) -> usize {
        self.increments.len()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn increments(&self, driver: usize) -> &[f64] {
        &self.increments[driver]
    }

    /// W(t_0), ..., W(t_steps); starts at 0.
    pub fn cumulative(&self, driver: usize) -> &[f64] {
        &self.cumulative[driver]
    }

    pub fn value(&self, driver: usize, k: usize) -> f64 {
        self.cumulative[driver][k]
    }

    /// Piecewise-linear interpolation of W between grid nodes, clamped to the
    /// path horizon.
    pub fn value_at(&self, driver: usize, t: f64) -> f64 {
        let w = &self.cumulative[driver];
        let pos = (t / self.dt).clamp(0.0, (w.len() - 1) as f64);
        let k = (pos.floor() as usize).min(w.len().saturating_sub(2));
        if w.len() < 2 {
            return w[0];
        }
        let frac = pos - k as f64;
        w[k] + frac * (w[k + 1] - w[k])
    }

    /// W at t = k dt / 2^level. Odd indices are bridge midpoints of the
    /// level above; the conditional variance of a midpoint of an interval of
    /// length h is h/4.
    pub fn value_dyadic(&self, driver: usize, k: u64, level: u32) -> f64 {
        if level == 0 {
            return self.cumulative[driver][k as usize];
        }
        if k.is_multiple_of(2) {
            return self.value_dyadic(driver, k / 2, level - 1);
        }
        if self.coarsening != 1 {
            panic!("dyadic refinement is only defined on sampled paths");
        }
        let left = self.value_dyadic(driver, (k - 1) / 2, level - 1);
        let right = self.value_dyadic(driver, k.div_ceil(2), level - 1);
        let h = self.dt / 2f64.powi(level as i32 - 1);
        let z = keyed_normal(self.seed, driver as u64, level as u64, k);
        0.5 * (left + right) + 0.5 * h.sqrt() * z
    }

    /// Path on the grid with step `factor * dt`, obtained by summing
    /// consecutive increments. Trailing steps that do not fill a block are
    /// dropped.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        if factor == 0 {
            return Err(Error::param("coarsening factor must be positive"));
        }
        let increments: Vec<Vec<f64>> = self
            .increments
            .iter()
            .map(|inc| inc.chunks_exact(factor).map(|c| c.iter().sum()).collect())
            .collect();
        let cumulative = increments.iter().map(|inc| prefix_sum(inc)).collect();
        Ok(WienerPath {
            seed: self.seed,
            dt: self.dt * factor as f64,
            steps: self.steps / factor,
            increments,
            cumulative,
            coarsening: self.coarsening * factor,
        })
    }
}

fn prefix_sum(inc: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(inc.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for v in inc {
        acc += v;
        out.push(acc);
    }
    out
}

pub fn sample_path(seed: u64, dt: f64, steps: usize, drivers: usize) -> Result<WienerPath> {
    WienerPath::sample(seed, dt, steps, drivers)
}

/// One driver of the finite-mode model: G_j(y) = amplitude L^{-2}(cos(k . x) y)
/// applied to every field. Since L^{-2} gains two derivatives,
/// ||G_j(y)||_{H^s} <= amplitude C(k, s) ||y||_{H^s}, a linear growth bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMode {
    pub wavevector: [i64; 2],
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Zero,
    /// (c1 u, c2 gamma) dW
    Linear {
        c1: f64,
        c2: f64,
    },
    /// (c1 ||u||^delta1_{H^s} u, c2 ||gamma||^delta2_{H^s} gamma) dW
    Polynomial {
        c1: f64,
        c2: f64,
        delta1: f64,
        delta2: f64,
        s_norm: f64,
    },
    FiniteMode {
        modes: Vec<NoiseMode>,
    },
}

impl NoiseModel {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            NoiseModel::Zero => Ok(()),
            NoiseModel::Linear { c1, c2 } => finite(&[*c1, *c2]),
            NoiseModel::Polynomial {
                c1,
                c2,
                delta1,
                delta2,
                s_norm,
            } => {
                finite(&[*c1, *c2, *delta1, *delta2, *s_norm])?;
                if *delta1 < 0.0 || *delta2 < 0.0 {
                    return Err(Error::param("noise intensities delta1, delta2 must be >= 0"));
                }
                let floor = 1.0 + d as f64 / 2.0;
                if *s_norm <= floor {
                    return Err(Error::param(format!("s_norm = {s_norm} must exceed 1 + d/2 = {floor}")));
                }
                Ok(())
            }
            NoiseModel::FiniteMode { modes } => {
                for m in modes {
                    finite(&[m.amplitude])?;
                    if d == 1 && m.wavevector[1] != 0 {
                        return Err(Error::param("second wavevector entry must be 0 when d = 1"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of independent scalar Brownian drivers. The linear and
    /// polynomial models share one W between u and gamma.
    pub fn drivers(&self) -> usize {
        match self {
            NoiseModel::Zero => 0,
            NoiseModel::Linear { .. } | NoiseModel::Polynomial { .. } => 1,
            NoiseModel::FiniteMode { modes } => modes.len(),
        }
    }

    /// The common coefficient c when the model is c y dW, which is what the
    /// exponential transformation can remove.
    pub fn linear_coefficient(&self) -> Option<f64> {
        match *self {
            NoiseModel::Zero => Some(0.0),
            NoiseModel::Linear { c1, c2 } if c1 == c2 => Some(c1),
            NoiseModel::Polynomial {
                c1, c2, delta1, delta2, ..
            } if delta1 == 0.0 && delta2 == 0.0 && c1 == c2 => Some(c1),
            _ => None,
        }
    }
}

fn finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::param("noise parameters must be finite"))
    }
}

/// Diffusion coefficient, one tendency per driver. The models here do not
/// depend on t explicitly.
pub fn diffusion(_t: f64, y: &State, model: &NoiseModel) -> Result<Vec<Tendency>> {
    model.validate(y.d())?;
    Ok(match model {
        NoiseModel::Zero => Vec::new(),
        NoiseModel::Linear { c1, c2 } => vec![scaled(y, *c1, *c2)],
        NoiseModel::Polynomial {
            c1,
            c2,
            delta1,
            delta2,
            s_norm,
        } => {
            let a = c1 * power(y.u_norm(*s_norm), *delta1);
            let b = c2 * power(y.gamma_norm(*s_norm), *delta2);
            vec![scaled(y, a, b)]
        }
        NoiseModel::FiniteMode { modes } => modes
            .iter()
            .map(|m| {
                let k = [m.wavevector[0] as f64, m.wavevector[1] as f64];
                let shape = SpectralField::from_fn(y.grid(), |x| (k[0] * x[0] + k[1] * x[1]).cos());
                let apply = |f: &SpectralField| {
                    dealiased_product(&shape, f)
                        .expect("fields share the state grid")
                        .inv_helmholtz()
                        .scale(m.amplitude)
                };
                State {
                    u: y.u.iter().map(apply).collect(),
                    gamma: apply(&y.gamma),
                }
            })
            .collect(),
    })
}

/// x^delta with 0^0 = 1.
fn power(x: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        1.0
    } else {
        x.powf(delta)
    }
}

fn scaled(y: &State, a: f64, b: f64) -> State {
    State {
        u: y.u.iter().map(|c| c.scale(a)).collect(),
        gamma: y.gamma.scale(b),
    }
}

/// mu(t) = exp(c^2 t / 2 - c W(t)).
pub fn mu(t: f64, w: f64, c: f64) -> f64 {
    (0.5 * c * c * t - c * w).exp()
}

/// (mu u, mu gamma).
pub fn transform_state(y: &State, mu_t: f64) -> Result<State> {
    if !(mu_t > 0.0 && mu_t.is_finite()) {
        return Err(Error::param(format!("mu must be positive and finite, got {mu_t}")));
    }
    Ok(y.scale(mu_t))
}

pub fn untransform_state(y: &State, mu_t: f64) -> Result<State> {
    if !(mu_t > 0.0 && mu_t.is_finite()) {
        return Err(Error::param(format!("mu must be positive and finite, got {mu_t}")));
    }
    Ok(y.scale(1.0 / mu_t))
}
