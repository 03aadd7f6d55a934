use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// FFT plans for one transform length.
#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(planner: &mut FftPlanner<f64>, len: usize) -> Self {
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

/// A uniform grid on the 1D or 2D torus of period 2π per dimension.
///
/// Coefficients are stored in FFT order: index `i` along a dimension carries
/// wavenumber `i` for `i < n/2` and `i - n` otherwise. In 2D the layout is
/// row-major with the first index running over `k₁` (the `x₁` direction).
///
/// The grid also owns the transform plans for its own size and for the 3/2
/// oversampled size used by dealiased products.
#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    base: Plans,
    padded: Plans,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "T^1[{}]", self.n),
            _ => write!(f, "T^2[{}x{}]", self.n, self.n),
        }
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "modes per dimension must be a power of two >= 8, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let base = Plans::new(&mut planner, n);
        let padded = Plans::new(&mut planner, Self::padded_len(n));
        Ok(Self { dim, n, base, padded })
    }

    pub fn one_d(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn two_d(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Modes per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of stored coefficients (`n` or `n²`).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest retained wavenumber under the 2/3 rule.
    pub fn cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    fn padded_len(n: usize) -> usize {
        3 * n / 2
    }

    /// Size per dimension of the oversampled grid used for products.
    pub fn padded_n(&self) -> usize {
        Self::padded_len(self.n)
    }

    pub(crate) fn index_to_k(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub(crate) fn k_to_index(k: i64, n: usize) -> Option<usize> {
        let half = (n / 2) as i64;
        if k >= half || k < -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + n as i64) as usize)
        }
    }

    /// Wavevector of a storage index; the second component is 0 in 1D.
    pub fn wavevector(&self, index: usize) -> [i64; 2] {
        match self.dim {
            1 => [Self::index_to_k(index, self.n), 0],
            _ => [
                Self::index_to_k(index / self.n, self.n),
                Self::index_to_k(index % self.n, self.n),
            ],
        }
    }

    /// Storage index of a wavevector, if it is representable on this grid.
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        match self.dim {
            1 => {
                if k[1] != 0 {
                    return None;
                }
                Self::k_to_index(k[0], self.n)
            }
            _ => {
                let i1 = Self::k_to_index(k[0], self.n)?;
                let i2 = Self::k_to_index(k[1], self.n)?;
                Some(i1 * self.n + i2)
            }
        }
    }

    pub fn abs_k(&self, index: usize) -> f64 {
        let [k1, k2] = self.wavevector(index);
        ((k1 * k1 + k2 * k2) as f64).sqrt()
    }

    /// True when the mode sits on the Nyquist line of some dimension, i.e. it
    /// is its own conjugate partner on the grid.
    pub fn is_nyquist(&self, index: usize) -> bool {
        let half = -((self.n / 2) as i64);
        let [k1, k2] = self.wavevector(index);
        k1 == half || (self.dim == 2 && k2 == half)
    }

    /// Index of the conjugate partner `-k`.
    pub fn conjugate_index(&self, index: usize) -> usize {
        let neg = |i: usize| (self.n - i) % self.n;
        match self.dim {
            1 => neg(index),
            _ => neg(index / self.n) * self.n + neg(index % self.n),
        }
    }

    /// Physical coordinates of a sample point.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let h = std::f64::consts::TAU / self.n as f64;
        match self.dim {
            1 => [h * index as f64, 0.0],
            _ => [h * (index / self.n) as f64, h * (index % self.n) as f64],
        }
    }

    /// Unnormalized transform along every dimension of a `size^dim` array.
    fn transform(&self, data: &mut [Complex64], size: usize, fft: &Arc<dyn Fft<f64>>) {
        match self.dim {
            1 => fft.process(data),
            _ => {
                fft.process(data);
                let mut col = vec![Complex64::new(0.0, 0.0); size];
                for j in 0..size {
                    for (i, c) in col.iter_mut().enumerate() {
                        *c = data[i * size + j];
                    }
                    fft.process(&mut col);
                    for (i, c) in col.iter().enumerate() {
                        data[i * size + j] = *c;
                    }
                }
            }
        }
    }

    fn normalization(&self, size: usize) -> f64 {
        1.0 / (size.pow(self.dim as u32) as f64)
    }

    /// Fourier coefficients of real samples, normalized so that
    /// `f(x) = Σ f̂(k) e^{ik·x}`.
    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.len(), "sample count does not match grid");
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, self.n, &self.base.forward);
        let scale = self.normalization(self.n);
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Real samples of a coefficient array (imaginary round-off is dropped).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "coefficient count does not match grid");
        let mut data = coeffs.to_vec();
        self.transform(&mut data, self.n, &self.base.inverse);
        data.iter().map(|c| c.re).collect()
    }

    /// Per-dimension map from a base index to its slots on the padded grid.
    /// The Nyquist mode is split evenly between `±n/2` so real fields stay real.
    fn pad_targets(&self, i: usize) -> ([(usize, f64); 2], usize) {
        let n = self.n;
        let m = self.padded_n();
        if i == n / 2 {
            ([(m - n / 2, 0.5), (n / 2, 0.5)], 2)
        } else if i < n / 2 {
            ([(i, 1.0), (0, 0.0)], 1)
        } else {
            ([(m - (n - i), 1.0), (0, 0.0)], 1)
        }
    }

    /// Samples on the 3/2 oversampled grid of a field given by its coefficients.
    pub fn inverse_padded(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len());
        let n = self.n;
        let m = self.padded_n();
        let mut data = vec![Complex64::new(0.0, 0.0); m.pow(self.dim as u32)];
        match self.dim {
            1 => {
                for (i, c) in coeffs.iter().enumerate() {
                    let (targets, count) = self.pad_targets(i);
                    for &(t, w) in &targets[..count] {
                        data[t] += *c * w;
                    }
                }
            }
            _ => {
                for i1 in 0..n {
                    let (t1, c1) = self.pad_targets(i1);
                    for i2 in 0..n {
                        let c = coeffs[i1 * n + i2];
                        if c == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let (t2, c2) = self.pad_targets(i2);
                        for &(a, wa) in &t1[..c1] {
                            for &(b, wb) in &t2[..c2] {
                                data[a * m + b] += c * (wa * wb);
                            }
                        }
                    }
                }
            }
        }
        self.transform(&mut data, m, &self.padded.inverse);
        data.iter().map(|c| c.re).collect()
    }

    /// Coefficients on this grid of real samples given on the padded grid,
    /// truncated to the modes representable here. Both `±n/2` padded modes fold
    /// onto the stored Nyquist slot.
    pub fn forward_padded(&self, samples: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let m = self.padded_n();
        assert_eq!(samples.len(), m.pow(self.dim as u32));
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, m, &self.padded.forward);
        let scale = self.normalization(m);
        let fold = |j: usize| -> Option<usize> {
            let k = Self::index_to_k(j, m);
            let half = (n / 2) as i64;
            if k.abs() > half {
                None
            } else if k == half {
                Some(n / 2)
            } else {
                Self::k_to_index(k, n)
            }
        };
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        match self.dim {
            1 => {
                for (j, c) in data.iter().enumerate() {
                    if let Some(i) = fold(j) {
                        out[i] += *c * scale;
                    }
                }
            }
            _ => {
                for j1 in 0..m {
                    let Some(i1) = fold(j1) else { continue };
                    for j2 in 0..m {
                        if let Some(i2) = fold(j2) {
                            out[i1 * n + i2] += data[j1 * m + j2] * scale;
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::one_d(4).is_err());
        assert!(TorusGrid::one_d(12).is_err());
        assert!(TorusGrid::new(3, 16).is_err());
        assert!(TorusGrid::two_d(16).is_ok());
    }

    #[test]
    fn index_wavevector_roundtrip() {
        for grid in [TorusGrid::one_d(16).unwrap(), TorusGrid::two_d(8).unwrap()] {
            for i in 0..grid.len() {
                let k = grid.wavevector(i);
                assert_eq!(grid.index_of(k), Some(i));
                let conj = grid.conjugate_index(i);
                let kc = grid.wavevector(conj);
                if !grid.is_nyquist(i) {
                    assert_eq!(kc, [-k[0], -k[1]]);
                }
            }
        }
    }

    #[test]
    fn single_mode_transform() {
        let grid = TorusGrid::one_d(16).unwrap();
        let samples: Vec<f64> = (0..16).map(|i| (3.0 * grid.point(i)[0]).cos()).collect();
        let c = grid.forward(&samples);
        for (i, v) in c.iter().enumerate() {
            let k = grid.wavevector(i)[0];
            let expect = if k.abs() == 3 { 0.5 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn padded_roundtrip_2d() {
        let grid = TorusGrid::two_d(16).unwrap();
        let samples: Vec<f64> = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.point(i);
                (2.0 * x).sin() * (y).cos() + 0.3 * (5.0 * y - x).cos()
            })
            .collect();
        let c = grid.forward(&samples);
        let back = grid.forward_padded(&grid.inverse_padded(&c));
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
