use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Collocation grid on the torus (R / 2piZ)^d with a 2/3-rule spectral cutoff.
///
/// Coefficients and physical samples are stored row-major with the last axis
/// contiguous: index `k1 * n + k2` in two dimensions.
pub struct Grid {
    d: usize,
    n: usize,
    dealias_fraction: f64,
    cutoff: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<i64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.d)
            .field("n", &self.n)
            .field("dealias_fraction", &self.dealias_fraction)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.cutoff == other.cutoff
    }
}

impl Grid {
    pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

    pub fn new(d: usize, n: usize) -> Result<Arc<Grid>> {
        Self::with_dealias(d, n, Self::DEFAULT_DEALIAS)
    }

    pub fn with_dealias(d: usize, n: usize, dealias_fraction: f64) -> Result<Arc<Grid>> {
        if d != 1 && d != 2 {
            return Err(Error::InvalidGrid(format!("d must be 1 or 2, got {d}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per dimension must be a power of two >= 8, got {n}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        let cutoff = (dealias_fraction * (n / 2) as f64).floor() as usize;
        if cutoff < 2 {
            return Err(Error::InvalidGrid(format!("retained-mode cutoff {cutoff} < 2")));
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let half = (n / 2) as i64;
        let wavenumbers = (0..n as i64).map(|k| if k < half { k } else { k - n as i64 }).collect();
        Ok(Arc::new(Grid {
            d,
            n,
            dealias_fraction,
            cutoff,
            fwd,
            inv,
            wavenumbers,
        }))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_per_dim(&self) -> usize {
        self.n
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Largest retained |m_i|.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Total number of collocation points, n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Signed wavenumber for FFT index `k` along one axis.
    pub fn wavenumber(&self, k: usize) -> i64 {
        self.wavenumbers[k]
    }

    /// Wave vector of flat index `idx` (unused axes are zero).
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        match self.d {
            1 => [self.wavenumbers[idx], 0],
            _ => [self.wavenumbers[idx / self.n], self.wavenumbers[idx % self.n]],
        }
    }

    /// Flat index of wave vector `m`, if representable.
    pub fn index_of(&self, m: [i64; 2]) -> Option<usize> {
        let n = self.n as i64;
        let wrap = |k: i64| -> Option<usize> {
            if k >= -(n / 2) && k < n / 2 {
                Some(k.rem_euclid(n) as usize)
            } else {
                None
            }
        };
        match self.d {
            1 => {
                if m[1] != 0 {
                    return None;
                }
                wrap(m[0])
            }
            _ => Some(wrap(m[0])? * self.n + wrap(m[1])?),
        }
    }

    /// Collocation coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.d {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// True when every |m_i| is within the dealiasing cutoff.
    pub fn is_retained(&self, idx: usize) -> bool {
        let m = self.wavevector(idx);
        let k = self.cutoff as i64;
        m[0].abs() <= k && m[1].abs() <= k
    }

    /// Forward transform of real samples to normalized coefficients
    /// a_m = (1/n^d) sum_x f(x) e^{-i m x}.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform: real part of sum_m a_m e^{i m x}.
    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, false);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        match self.d {
            1 => plan.process_with_scratch(buf, &mut scratch),
            _ => {
                // rows (contiguous last axis) in one batched call
                plan.process_with_scratch(buf, &mut scratch);
                let mut col = vec![Complex64::new(0.0, 0.0); n * n];
                for k1 in 0..n {
                    for k2 in 0..n {
                        col[k2 * n + k1] = buf[k1 * n + k2];
                    }
                }
                plan.process_with_scratch(&mut col, &mut scratch);
                for k2 in 0..n {
                    for k1 in 0..n {
                        buf[k1 * n + k2] = col[k2 * n + k1];
                    }
                }
            }
        }
    }
}
