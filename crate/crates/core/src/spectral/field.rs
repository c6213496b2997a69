use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A real scalar field on the torus stored as normalized Fourier coefficients
/// a_m = (2pi)^{-d} (f, e_m).
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Transform collocation values. The result is not truncated.
    pub fn from_physical(grid: &Arc<Grid>, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs: grid.forward(values),
        })
    }

    /// Sample `f` at the collocation points and transform. Not truncated.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SpectralField {
            grid: grid.clone(),
            coeffs: grid.forward(&values),
        }
    }

    /// Set a single mode and its Hermitian partner.
    pub fn set_mode(&mut self, m: [i64; 2], value: Complex64) -> Result<()> {
        let idx = self
            .grid
            .index_of(m)
            .ok_or_else(|| Error::param(format!("mode {m:?} not representable")))?;
        let conj_idx = self
            .grid
            .index_of([-m[0], -m[1]])
            .ok_or_else(|| Error::param(format!("mode {m:?} has no Hermitian partner")))?;
        if idx == conj_idx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[idx] = value;
            self.coeffs[conj_idx] = value.conj();
        }
        Ok(())
    }

    pub fn mode(&self, m: [i64; 2]) -> Complex64 {
        self.grid.index_of(m).map(|i| self.coeffs[i]).unwrap_or(ZERO)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.coeffs)
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Coefficient-wise multiplication by `symbol(m)`.
    pub fn apply_multiplier(&self, symbol: impl Fn([f64; 2]) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if a == ZERO {
                    return ZERO;
                }
                let m = self.grid.wavevector(i);
                a * symbol([m[0] as f64, m[1] as f64])
            })
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Real-symbol variant of [`apply_multiplier`](Self::apply_multiplier).
    pub fn apply_real_multiplier(&self, symbol: impl Fn([f64; 2]) -> f64) -> SpectralField {
        self.apply_multiplier(|m| Complex64::new(symbol(m), 0.0))
    }

    /// Bessel potential (1 - Laplacian)^{s/2}.
    pub fn bessel(&self, s: f64) -> SpectralField {
        if s == 0.0 {
            return self.clone();
        }
        self.apply_real_multiplier(|m| (1.0 + m[0] * m[0] + m[1] * m[1]).powf(0.5 * s))
    }

    /// Inverse Helmholtz operator (1 - Laplacian)^{-1}.
    pub fn inv_helmholtz(&self) -> SpectralField {
        self.apply_real_multiplier(|m| 1.0 / (1.0 + m[0] * m[0] + m[1] * m[1]))
    }

    /// Partial derivative along `axis`.
    pub fn partial(&self, axis: usize) -> SpectralField {
        assert!(axis < self.grid.d(), "axis {axis} out of range");
        self.apply_multiplier(|m| I * m[axis])
    }

    /// Zero every mode outside the retained box |m_i| <= K.
    pub fn dealias(mut self) -> SpectralField {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.is_retained(i) {
                *c = ZERO;
            }
        }
        self
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| self.grid.is_retained(i) || *c == ZERO)
    }

    /// max_m |a_{-m} - conj(a_m)|, zero for a real field.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for (i, &a) in self.coeffs.iter().enumerate() {
            let m = g.wavevector(i);
            if let Some(j) = g.index_of([-m[0], -m[1]]) {
                worst = worst.max((self.coeffs[j] - a.conj()).norm());
            }
        }
        worst
    }

    /// ||f||_{H^s}^2 = sum_m (1 + |m|^2)^s |a_m|^2.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(i, a)| {
                let m = self.grid.wavevector(i);
                let w = (1 + m[0] * m[0] + m[1] * m[1]) as f64;
                let w = if s == 0.0 { 1.0 } else { w.powf(s) };
                w * a.norm_sqr()
            })
            .sum()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// Coefficient-sum H^s inner product, real part.
    pub fn sobolev_inner(&self, other: &SpectralField, s: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| {
                let m = self.grid.wavevector(i);
                let w = ((1 + m[0] * m[0] + m[1] * m[1]) as f64).powf(s);
                w * (a * b.conj()).re
            })
            .sum()
    }

    /// Physical integral over the torus, exact for trigonometric polynomials.
    pub fn integral(&self) -> f64 {
        self.coeffs[0].re * (2.0 * std::f64::consts::PI).powi(self.grid.d() as i32)
    }

    /// Physical L^2 pairing (f, g)_{L^2} = (2pi)^d sum a_m conj(b_m).
    pub fn l2_pairing(&self, other: &SpectralField) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        sum * (2.0 * std::f64::consts::PI).powi(self.grid.d() as i32)
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        debug_assert!(self.same_grid(other).is_ok());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
    }

    pub fn max_abs_coeff_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Evaluate at an arbitrary point by direct Fourier summation (d = 1).
    pub fn eval_at(&self, x: f64) -> f64 {
        debug_assert_eq!(self.grid.d(), 1);
        let n = self.grid.n_per_dim();
        let step = Complex64::new(x.cos(), x.sin());
        // positive modes 0..n/2 by recurrence, negative modes are conjugates
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = self.coeffs[0].re;
        for k in 1..n / 2 {
            phase *= step;
            acc += 2.0 * (self.coeffs[k] * phase).re;
        }
        acc
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}
