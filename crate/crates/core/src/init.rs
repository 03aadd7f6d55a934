//! Reproducible initial data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SpectralField, TorusGrid};

/// Random real mean-zero field supported on `1 ≤ max_j |k_j| ≤ band`, scaled so
/// that `‖f‖_{H^s}` (or the homogeneous seminorm) equals `norm`.
pub fn random_field(
    grid: &TorusGrid,
    seed: u64,
    band: usize,
    s: f64,
    norm: f64,
    homogeneous: bool,
) -> Result<SpectralField> {
    if band == 0 || band as i64 >= grid.n() as i64 / 2 {
        return Err(Error::InvalidParameter(format!(
            "band must lie in 1..{} for {grid}, got {band}",
            grid.n() / 2
        )));
    }
    if !(norm >= 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(format!("target norm must be >= 0, got {norm}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(grid);
    let band = band as i64;
    for i in 0..grid.len() {
        let j = grid.conjugate_index(i);
        let k = grid.wavevector(i);
        let reach = k[0].abs().max(k[1].abs());
        if j <= i || reach == 0 || reach > band {
            continue;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        field.coeffs_mut()[i] = c;
        field.coeffs_mut()[j] = c.conj();
    }
    let current = sobolev_norm(&field, s, homogeneous);
    if current == 0.0 {
        return Ok(field);
    }
    Ok(field.scale(norm / current))
}

/// Single Fourier mode `amplitude · cos(k·x)`.
pub fn cosine_mode(grid: &TorusGrid, k: [i64; 2], amplitude: f64) -> SpectralField {
    SpectralField::from_modes(grid, |m| {
        if m == k || m == [-k[0], -k[1]] {
            Complex64::new(0.5 * amplitude, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
