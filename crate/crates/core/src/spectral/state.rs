use std::sync::Arc;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

/// The pair y = (u, gamma): d velocity components and the scalar averaged
/// density deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<SpectralField>,
    pub gamma: SpectralField,
}

impl State {
    pub fn new(u: Vec<SpectralField>, gamma: SpectralField) -> Result<Self> {
        let d = gamma.grid().d();
        if u.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: u.len(),
            });
        }
        for c in &u {
            c.same_grid(&gamma)?;
        }
        Ok(State { u, gamma })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        State {
            u: (0..grid.d()).map(|_| SpectralField::zeros(grid)).collect(),
            gamma: SpectralField::zeros(grid),
        }
    }

    /// One-dimensional convenience constructor.
    pub fn new_1d(u: SpectralField, gamma: SpectralField) -> Result<Self> {
        State::new(vec![u], gamma)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.gamma.grid()
    }

    pub fn d(&self) -> usize {
        self.grid().d()
    }

    /// m = Lambda^2 u, computed on demand.
    pub fn momentum(&self) -> Vec<SpectralField> {
        self.u.iter().map(|c| c.bessel(2.0)).collect()
    }

    /// rho = Lambda^2 gamma, computed on demand.
    pub fn density(&self) -> SpectralField {
        self.gamma.bessel(2.0)
    }

    pub fn dealias(self) -> Self {
        State {
            u: self.u.into_iter().map(SpectralField::dealias).collect(),
            gamma: self.gamma.dealias(),
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = &SpectralField> {
        self.u.iter().chain(std::iter::once(&self.gamma))
    }

    fn fields_mut(&mut self) -> impl Iterator<Item = &mut SpectralField> {
        self.u.iter_mut().chain(std::iter::once(&mut self.gamma))
    }

    pub fn scale(&self, alpha: f64) -> State {
        State {
            u: self.u.iter().map(|c| c.scale(alpha)).collect(),
            gamma: self.gamma.scale(alpha),
        }
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &State) {
        for (a, b) in self.fields_mut().zip(other.fields()) {
            a.axpy(alpha, b);
        }
    }

    pub fn sub(&self, other: &State) -> State {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// ||u||_{H^s} with the components combined in l^2.
    pub fn u_norm(&self, s: f64) -> f64 {
        self.u.iter().map(|c| c.sobolev_norm_sq(s)).sum::<f64>().sqrt()
    }

    pub fn gamma_norm(&self, s: f64) -> f64 {
        self.gamma.sobolev_norm(s)
    }

    /// Product-space norm ||y||_{H^s x H^s}.
    pub fn norm(&self, s: f64) -> f64 {
        self.fields().map(|c| c.sobolev_norm_sq(s)).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.fields().all(SpectralField::is_finite)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.fields().map(SpectralField::hermitian_defect).fold(0.0, f64::max)
    }

    pub fn is_dealiased(&self) -> bool {
        self.fields().all(SpectralField::is_dealiased)
    }

    pub fn max_abs_coeff_diff(&self, other: &State) -> f64 {
        self.fields()
            .zip(other.fields())
            .map(|(a, b)| a.max_abs_coeff_diff(b))
            .fold(0.0, f64::max)
    }
}
