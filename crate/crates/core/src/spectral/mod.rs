//! Fourier representation of fields on the torus T^d = (R / 2piZ)^d.
//!
//! Coefficients use the normalization a_m = (2pi)^{-d} (f, e_m)_{L^2}, so the
//! Sobolev norm is ||f||_{H^s}^2 = sum_m (1 + |m|^2)^s |a_m|^2 and a constant
//! field has norm equal to its absolute value. Physical integrals, where they
//! are needed, carry the extra (2pi)^d factor explicitly.
//!
//! Every nonlinear operation here is quadratic and is followed by 2/3-rule
//! truncation: inputs band-limited to |m_i| <= K produce exact retained modes.

mod field;
mod grid;
pub mod random;
mod state;

use std::sync::Arc;

pub use field::SpectralField;
pub use grid::Grid;
pub use random::{random_field, random_state};
pub use state::State;

use crate::error::{Error, Result};

pub fn to_physical(f: &SpectralField) -> Vec<f64> {
    f.to_physical()
}

pub fn bessel_potential(f: &SpectralField, s: f64) -> SpectralField {
    f.bessel(s)
}

pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.sobolev_norm(s)
}

/// Discrete W^{1,infinity} norm of a state: the largest collocation value of
/// |u_i|, |gamma|, |d_j u_i| and |d_j gamma|.
pub fn winf_norm(y: &State) -> f64 {
    let d = y.d();
    let mut worst: f64 = 0.0;
    for f in y.fields() {
        worst = worst.max(sup_abs(f));
        for j in 0..d {
            worst = worst.max(sup_abs(&f.partial(j)));
        }
    }
    worst
}

/// max over collocation points of |f|.
pub fn sup_abs(f: &SpectralField) -> f64 {
    f.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// The polynomial blend t^3 (10 - 15 t + 6 t^2), rising from 0 at t = 0 to 1
/// at t = 1 with vanishing first and second derivatives at both ends.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// One-dimensional cutoff: 1 on [0, 1], 0 on [2, inf), smooth in between.
pub fn cutoff_profile(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(x - 1.0)
    }
}

/// Mollifier symbol: tensor product of [`cutoff_profile`] over the axes.
pub fn mollifier_symbol(xi: [f64; 2]) -> f64 {
    cutoff_profile(xi[0]) * cutoff_profile(xi[1])
}

/// Friedrichs mollifier J_eps: a_m -> jhat(eps m) a_m.
pub fn mollify(f: &SpectralField, eps: f64) -> Result<SpectralField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("mollifier scale must lie in (0,1), got {eps}")));
    }
    Ok(mollify_unchecked(f, eps))
}

pub(crate) fn mollify_unchecked(f: &SpectralField, eps: f64) -> SpectralField {
    f.apply_real_multiplier(|m| mollifier_symbol([eps * m[0], eps * m[1]]))
}

/// Constant C with ||J_eps f||_{H^r} <= C eps^{s-r} ||f||_{H^s} for r >= s:
/// the symbol vanishes outside |m_i| <= 2/eps, where
/// (1 + |m|^2)^{r-s} <= ((1 + 4d) / eps^2)^{r-s}.
pub fn mollifier_bound_constant(d: usize, r: f64, s: f64) -> f64 {
    (1.0 + 4.0 * d as f64).powf(0.5 * (r - s))
}

/// Field with |a_m| = (1 + |m|^2)^{-p/2} on every retained mode, the borderline
/// H^s profile used by mollifier rate probes when p = s + d/2 + 0.1.
pub fn power_law_field(grid: &Arc<Grid>, p: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        if grid.is_retained(i) {
            let m = grid.wavevector(i);
            f.coeffs_mut()[i] =
                num_complex::Complex64::new((1.0 + (m[0] * m[0] + m[1] * m[1]) as f64).powf(-0.5 * p), 0.0);
        }
    }
    f
}

pub fn gradient(f: &SpectralField) -> Vec<SpectralField> {
    (0..f.grid().d()).map(|j| f.partial(j)).collect()
}

pub fn divergence(v: &[SpectralField]) -> Result<SpectralField> {
    let first = v.first().ok_or_else(|| Error::param("empty vector field"))?;
    let d = first.grid().d();
    if v.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: v.len(),
        });
    }
    let mut out = first.partial(0);
    for (j, c) in v.iter().enumerate().skip(1) {
        c.same_grid(first)?;
        out.axpy(1.0, &c.partial(j));
    }
    Ok(out)
}

/// Pointwise product with 2/3-rule truncation.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.same_grid(g)?;
    let a = f.to_physical();
    let b = g.to_physical();
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(SpectralField::from_physical(f.grid(), &prod)?.dealias())
}

/// Sharp dyadic Littlewood-Paley block: |m| < 1 for q = -1, and
/// 2^{q-1} <= |m| < 2^q for q >= 0.
pub fn lp_block(f: &SpectralField, q: i32) -> Result<SpectralField> {
    if q < -1 {
        return Err(Error::param(format!("block index must be >= -1, got {q}")));
    }
    let (lo, hi) = block_bounds(q);
    Ok(f.apply_real_multiplier(|m| {
        let r = (m[0] * m[0] + m[1] * m[1]).sqrt();
        if r >= lo && r < hi {
            1.0
        } else {
            0.0
        }
    }))
}

fn block_bounds(q: i32) -> (f64, f64) {
    if q == -1 {
        (0.0, 1.0)
    } else {
        (2f64.powi(q - 1), 2f64.powi(q))
    }
}

/// Highest block index that can hold a mode of `grid`.
pub fn max_block(grid: &Arc<Grid>) -> i32 {
    let half = (grid.n_per_dim() / 2) as f64;
    let rmax = half * (grid.d() as f64).sqrt();
    (rmax.log2().floor() as i32) + 1
}

/// ||f||_{B^s_{2,r}} = || (2^{qs} ||Delta_q f||_{L^2})_q ||_{l^r}, with the L^2 norm
/// in the coefficient-sum convention. `r = f64::INFINITY` gives the sup.
pub fn besov_norm(f: &SpectralField, s: f64, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::param(format!("Besov index r must be >= 1, got {r}")));
    }
    let mut shells = vec![0.0f64; (max_block(f.grid()) + 2) as usize];
    for (i, a) in f.coeffs().iter().enumerate() {
        let m = f.grid().wavevector(i);
        let rad = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        let q = if rad < 1.0 { -1 } else { rad.log2().floor() as i32 + 1 };
        shells[(q + 1) as usize] += a.norm_sqr();
    }
    let terms = shells
        .iter()
        .enumerate()
        .map(|(k, e)| 2f64.powf((k as f64 - 1.0) * s) * e.sqrt());
    Ok(if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    })
}

/// Values of `f` on a grid refined by `factor` per axis (d = 1), via
/// zero-padded inverse transform.
pub fn oversampled_values(f: &SpectralField, factor: usize) -> Result<Vec<f64>> {
    let g = f.grid();
    if g.d() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: g.d(),
        });
    }
    let fine = Grid::new(1, g.n_per_dim() * factor)?;
    let mut padded = SpectralField::zeros(&fine);
    for (i, a) in f.coeffs().iter().enumerate() {
        let m = g.wavevector(i);
        if m[0].unsigned_abs() as usize == g.n_per_dim() / 2 {
            continue;
        }
        let j = fine.index_of(m).expect("fine grid holds every coarse mode");
        padded.coeffs_mut()[j] = *a;
    }
    Ok(padded.to_physical())
}
