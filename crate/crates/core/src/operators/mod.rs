//! Convection, the nonlocal terms L1, L2, L3 and the full deterministic drift.
//!
//! Index convention: J_ij = d_j u_i is the Jacobian of the velocity and the
//! divergence of a matrix field acts along rows, (div M)_i = sum_j d_j M_ij.
//! With it the operator reads
//!
//! ```text
//! L1(u) = L^{-2} div(1/2 |J|^2 I + J J + J J^T - J^T J - (div u) J)
//!       + L^{-2} ((div u) u + J^T u)
//! L2(g) = L^{-2} div(1/2 (g^2 + |grad g|^2) I - grad g (x) grad g)
//! L3(u, g) = L^{-2} div(J^T grad g + J grad g - (div u) grad g) + L^{-2} ((div u) g)
//! ```
//!
//! where L^{-2} = (1 - Laplacian)^{-1}. In one dimension this collapses to the
//! Green's function form used by [`rhs_1d`].
//!
//! All products are formed pointwise from band-limited inputs and truncated by
//! the 2/3 rule, so sums of products are exact on the retained modes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::{self, cutoff_profile, Grid, SpectralField, State};

/// Time derivative of a [`State`]: `u` holds du, `gamma` holds dgamma.
pub type Tendency = State;

/// Collocation values of a scalar field and of its gradient.
struct Jet {
    val: Vec<f64>,
    grad: Vec<Vec<f64>>,
}

impl Jet {
    fn of(f: &SpectralField) -> Jet {
        Jet {
            val: f.to_physical(),
            grad: (0..f.grid().d()).map(|j| f.partial(j).to_physical()).collect(),
        }
    }
}

fn truncated(grid: &Arc<Grid>, values: &[f64]) -> SpectralField {
    SpectralField::from_physical(grid, values)
        .expect("pointwise buffer has grid length")
        .dealias()
}

/// sum_j d_j M_ij + v_i, then L^{-2}.
fn smoothed_divergence(grid: &Arc<Grid>, rows: &[Vec<f64>], extra: Option<&[f64]>) -> SpectralField {
    let mut acc = match extra {
        Some(v) => truncated(grid, v),
        None => SpectralField::zeros(grid),
    };
    for (j, m) in rows.iter().enumerate() {
        acc.axpy(1.0, &truncated(grid, m).partial(j));
    }
    acc.inv_helmholtz()
}

fn check_velocity(u: &[SpectralField]) -> Result<&Arc<Grid>> {
    let first = u.first().ok_or_else(|| Error::param("empty velocity"))?;
    let grid = first.grid();
    if u.len() != grid.d() {
        return Err(Error::Dimension {
            expected: grid.d(),
            got: u.len(),
        });
    }
    for c in u {
        c.same_grid(first)?;
    }
    Ok(grid)
}

fn convection_jets(u: &[Jet], f: &Jet, grid: &Arc<Grid>) -> SpectralField {
    let mut out = vec![0.0; grid.len()];
    for (j, uj) in u.iter().enumerate() {
        for (o, (a, b)) in out.iter_mut().zip(uj.val.iter().zip(&f.grad[j])) {
            *o += a * b;
        }
    }
    truncated(grid, &out)
}

#[allow(clippy::needless_range_loop)]
fn l1_jets(u: &[Jet], grid: &Arc<Grid>) -> Vec<SpectralField> {
    let d = u.len();
    let len = grid.len();
    let jac = |i: usize, j: usize, p: usize| u[i].grad[j][p];
    let mut rows = vec![vec![vec![0.0; len]; d]; d];
    let mut vecs = vec![vec![0.0; len]; d];
    for p in 0..len {
        let div: f64 = (0..d).map(|i| jac(i, i, p)).sum();
        let mut frob = 0.0;
        for i in 0..d {
            for j in 0..d {
                frob += jac(i, j, p).powi(2);
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut jj = 0.0;
                let mut jjt = 0.0;
                let mut jtj = 0.0;
                for k in 0..d {
                    jj += jac(i, k, p) * jac(k, j, p);
                    jjt += jac(i, k, p) * jac(j, k, p);
                    jtj += jac(k, i, p) * jac(k, j, p);
                }
                let diag = if i == j { 0.5 * frob } else { 0.0 };
                rows[i][j][p] = diag + jj + jjt - jtj - div * jac(i, j, p);
            }
            let jtu: f64 = (0..d).map(|j| u[j].val[p] * jac(j, i, p)).sum();
            vecs[i][p] = div * u[i].val[p] + jtu;
        }
    }
    rows.iter()
        .zip(&vecs)
        .map(|(r, v)| smoothed_divergence(grid, r, Some(v)))
        .collect()
}

#[allow(clippy::needless_range_loop)]
fn l2_jet(g: &Jet, grid: &Arc<Grid>) -> Vec<SpectralField> {
    let d = g.grad.len();
    let len = grid.len();
    let mut rows = vec![vec![vec![0.0; len]; d]; d];
    for p in 0..len {
        let grad_sq: f64 = g.grad.iter().map(|c| c[p] * c[p]).sum();
        let iso = 0.5 * (g.val[p] * g.val[p] + grad_sq);
        for i in 0..d {
            for j in 0..d {
                let diag = if i == j { iso } else { 0.0 };
                rows[i][j][p] = diag - g.grad[i][p] * g.grad[j][p];
            }
        }
    }
    rows.iter().map(|r| smoothed_divergence(grid, r, None)).collect()
}

fn l3_jets(u: &[Jet], g: &Jet, grid: &Arc<Grid>) -> SpectralField {
    let d = u.len();
    let len = grid.len();
    let mut flux = vec![vec![0.0; len]; d];
    let mut source = vec![0.0; len];
    for p in 0..len {
        let div: f64 = (0..d).map(|i| u[i].grad[i][p]).sum();
        for j in 0..d {
            let mut w = -div * g.grad[j][p];
            for i in 0..d {
                w += g.grad[i][p] * (u[j].grad[i][p] + u[i].grad[j][p]);
            }
            flux[j][p] = w;
        }
        source[p] = div * g.val[p];
    }
    smoothed_divergence(grid, &flux, Some(&source))
}

/// u . grad f, dealiased.
pub fn convection(u: &[SpectralField], f: &SpectralField) -> Result<SpectralField> {
    let grid = check_velocity(u)?;
    f.same_grid(&u[0])?;
    let jets: Vec<Jet> = u.iter().map(Jet::of).collect();
    Ok(convection_jets(&jets, &Jet::of(f), grid))
}

pub fn l1(u: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let grid = check_velocity(u)?;
    let jets: Vec<Jet> = u.iter().map(Jet::of).collect();
    Ok(l1_jets(&jets, grid))
}

pub fn l2(gamma: &SpectralField) -> Vec<SpectralField> {
    l2_jet(&Jet::of(gamma), gamma.grid())
}

pub fn l3(u: &[SpectralField], gamma: &SpectralField) -> Result<SpectralField> {
    let grid = check_velocity(u)?;
    gamma.same_grid(&u[0])?;
    let jets: Vec<Jet> = u.iter().map(Jet::of).collect();
    Ok(l3_jets(&jets, &Jet::of(gamma), grid))
}

/// The nonlocal part F(y) = (L1(u) + L2(gamma), L3(u, gamma)).
pub fn nonlocal(y: &State) -> Tendency {
    let grid = y.grid();
    let uj: Vec<Jet> = y.u.iter().map(Jet::of).collect();
    let gj = Jet::of(&y.gamma);
    let mut du = l1_jets(&uj, grid);
    for (a, b) in du.iter_mut().zip(l2_jet(&gj, grid)) {
        a.axpy(1.0, &b);
    }
    State {
        u: du,
        gamma: l3_jets(&uj, &gj, grid),
    }
}

/// Full deterministic tendency -(B(y, y) + F(y)):
/// du = -(u . grad u + L1(u) + L2(gamma)), dgamma = -(u . grad gamma + L3(u, gamma)).
pub fn drift(y: &State) -> Tendency {
    let grid = y.grid();
    let uj: Vec<Jet> = y.u.iter().map(Jet::of).collect();
    let gj = Jet::of(&y.gamma);
    let l1v = l1_jets(&uj, grid);
    let l2v = l2_jet(&gj, grid);
    let du = uj
        .iter()
        .zip(l1v.iter().zip(&l2v))
        .map(|(ui, (a, b))| {
            let mut t = convection_jets(&uj, ui, grid);
            t.axpy(1.0, a);
            t.axpy(1.0, b);
            t.scale(-1.0)
        })
        .collect();
    let mut dg = convection_jets(&uj, &gj, grid);
    dg.axpy(1.0, &l3_jets(&uj, &gj, grid));
    State {
        u: du,
        gamma: dg.scale(-1.0),
    }
}

fn require_1d(grid: &Arc<Grid>) -> Result<()> {
    if grid.d() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: grid.d(),
        });
    }
    Ok(())
}

/// One-dimensional system in Green's function form:
///
/// ```text
/// u_t = -u u_x - d_x G * (u^2 + 1/2 u_x^2 + 1/2 g^2 - 1/2 g_x^2)
/// g_t = -u g_x - G * ((u_x g_x)_x + u_x g)
/// ```
pub fn rhs_1d(u: &SpectralField, gamma: &SpectralField) -> Result<Tendency> {
    let grid = u.grid();
    require_1d(grid)?;
    u.same_grid(gamma)?;
    let uv = u.to_physical();
    let ux = u.partial(0).to_physical();
    let gv = gamma.to_physical();
    let gx = gamma.partial(0).to_physical();
    let len = grid.len();
    let mut adv_u = vec![0.0; len];
    let mut adv_g = vec![0.0; len];
    let mut pressure = vec![0.0; len];
    let mut flux = vec![0.0; len];
    let mut source = vec![0.0; len];
    for p in 0..len {
        adv_u[p] = uv[p] * ux[p];
        adv_g[p] = uv[p] * gx[p];
        pressure[p] = uv[p] * uv[p] + 0.5 * ux[p] * ux[p] + 0.5 * gv[p] * gv[p] - 0.5 * gx[p] * gx[p];
        flux[p] = ux[p] * gx[p];
        source[p] = ux[p] * gv[p];
    }
    let mut du = greens_convolve(&truncated(grid, &pressure))?.partial(0);
    du.axpy(1.0, &truncated(grid, &adv_u));
    let mut inner = truncated(grid, &flux).partial(0);
    inner.axpy(1.0, &truncated(grid, &source));
    let mut dg = greens_convolve(&inner)?;
    dg.axpy(1.0, &truncated(grid, &adv_g));
    State::new_1d(du.scale(-1.0), dg.scale(-1.0))
}

/// Periodic Green's function of 1 - d_xx on [0, 2pi):
/// G(x) = cosh(x - 2pi floor(x / 2pi) - pi) / (2 sinh pi).
pub fn greens_kernel(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = x - two_pi * (x / two_pi).floor();
    (r - std::f64::consts::PI).cosh() / (2.0 * std::f64::consts::PI.sinh())
}

/// G * f as the Fourier multiplier (1 + k^2)^{-1}.
pub fn greens_convolve(f: &SpectralField) -> Result<SpectralField> {
    require_1d(f.grid())?;
    Ok(f.inv_helmholtz())
}

/// G * f by quadrature of the closed-form kernel. Each Fourier coefficient of
/// G is integrated with composite Gauss-Legendre on (0, 2pi), where G is smooth,
/// and applied to the matching mode of f. Used as an independent check on
/// [`greens_convolve`].
pub fn greens_convolve_quadrature(f: &SpectralField, panels: usize) -> Result<SpectralField> {
    let grid = f.grid();
    require_1d(grid)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = SpectralField::zeros(grid);
    let half = (grid.n_per_dim() / 2) as i64;
    for m in 0..half {
        let a = f.mode([m, 0]);
        if a.norm() == 0.0 {
            continue;
        }
        // G is even about pi, so its coefficients are real
        let mf = m as f64;
        let g_hat = quadrature::integrate(|z| greens_kernel(z) * (mf * z).cos(), 0.0, two_pi, panels, 16);
        out.set_mode([m, 0], a * g_hat)?;
    }
    Ok(out)
}

/// Scalar truncation: 1 on [0, R], 0 beyond 2R, with the same smooth
/// blend as the mollifier symbol in between.
pub fn truncation(x: f64, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    cutoff_profile(x / r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationParams {
    pub epsilon: f64,
    pub r: f64,
}

impl RegularizationParams {
    pub fn new(epsilon: f64, r: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0,1], got {epsilon}")));
        }
        if !(r > 0.0) {
            return Err(Error::param(format!("truncation radius must be positive, got {r}")));
        }
        Ok(RegularizationParams { epsilon, r })
    }
}

/// Mollified and truncated drift
/// -w_R(||y||_{W^{1,inf}}) (J_eps B(J_eps y, J_eps y) + F(y)).
pub fn drift_regularized(y: &State, p: &RegularizationParams) -> Tendency {
    let w = truncation(spectral::winf_norm(y), p.r);
    if w == 0.0 {
        return State::zeros(y.grid());
    }
    let grid = y.grid();
    let moll = |f: &SpectralField| spectral::mollify_unchecked(f, p.epsilon);
    let smooth_u: Vec<Jet> = y.u.iter().map(|c| Jet::of(&moll(c))).collect();
    let smooth_g = Jet::of(&moll(&y.gamma));
    let mut out = nonlocal(y);
    for (o, ui) in out.u.iter_mut().zip(&smooth_u) {
        o.axpy(1.0, &moll(&convection_jets(&smooth_u, ui, grid)));
    }
    out.gamma.axpy(1.0, &moll(&convection_jets(&smooth_u, &smooth_g, grid)));
    out.scale(-w)
}

#[cfg(test)]
mod tests;
