use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Relative tolerance under which a zero-mode coefficient counts as zero mean.
pub const MEAN_TOL: f64 = 1e-12;

/// A real periodic field stored as Fourier coefficients on a torus grid.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for {grid}, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    pub fn from_physical(grid: &TorusGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples for {grid}, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self { grid: grid.clone(), coeffs: grid.forward(samples) })
    }

    /// Samples `f(x)` at the grid points; `x[1]` is 0 in 1D.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid: grid.clone(), coeffs: grid.forward(&samples) }
    }

    /// Builds a field from per-mode coefficients; the caller is responsible
    /// for conjugate symmetry.
    pub fn from_modes(grid: &TorusGrid, f: impl Fn([i64; 2]) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.wavevector(i))).collect();
        Self { grid: grid.clone(), coeffs }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavevector `k`, or zero when not representable.
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.coeffs)
    }

    /// Spatial mean, i.e. the real part of the zero mode.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[0].norm() <= MEAN_TOL * self.norm_l2().max(1.0)
    }

    pub fn require_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero() {
            Ok(())
        } else {
            Err(Error::NotMeanZero(self.coeffs[0].norm()))
        }
    }

    /// Copy with the zero mode set to exactly zero.
    pub fn project_mean_zero(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid.to_string(), other.grid.to_string()))
        }
    }

    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if self.grid.dim() == dim {
            Ok(())
        } else {
            Err(Error::Dimension { expected: dim, got: self.grid.dim() })
        }
    }

    /// `L²` norm under the coefficient-sum convention `(Σ |f̂(k)|²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.to_physical().iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Real `L²` pairing `Σ f̂(k) conj(ĝ(k))`, equal to the normalized integral
    /// of `f g` for real fields.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|k_j|` over the nonzero coefficients (above `tol`).
    pub fn max_wavenumber(&self, tol: f64) -> i64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(i, _)| {
                let [k1, k2] = self.grid.wavevector(i);
                k1.abs().max(k2.abs())
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest deviation from `f̂(-k) = conj(f̂(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let j = self.grid.conjugate_index(i);
                (self.coeffs[i] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Maps each coefficient through `f(k, index, value)`.
    pub fn map_modes(&self, f: impl Fn([i64; 2], usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.wavevector(i), i, c))
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect(),
        }
    }

    /// L² distance between two fields on the same grid.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

// The arithmetic operators panic on grid mismatch; fallible entry points
// check with `check_same_grid` first.
impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Add for SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: SpectralField) -> SpectralField {
        &self + &rhs
    }
}

impl Sub for SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: SpectralField) -> SpectralField {
        &self - &rhs
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scale(a)
    }
}

impl Mul<f64> for SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scale(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Neg for SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}
