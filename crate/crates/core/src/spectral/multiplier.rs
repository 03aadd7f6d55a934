//! Diagonal Fourier multipliers and the named operators built from them.
//!
//! Zero-mode policy: homogeneous multipliers (`Λ^s` with `s > 0`, `ℋ`, `ℛ_j`,
//! `𝒯`, derivatives) vanish on `k = 0`, `Λ^s` with `s < 0` is only applied to
//! mean-zero fields and maps the zero mode to 0, and the resolvent leaves the
//! zero mode unchanged.
//!
//! Modes on a Nyquist line are their own conjugate partner on the grid, so a
//! symbol is replaced by its real part there to keep real fields real.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-mode multiplier values with an explicit zero-mode entry (`values[0]`).
#[derive(Clone, Debug)]
pub struct MultiplierSymbol {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl MultiplierSymbol {
    /// Builds a symbol from `f(k, |k|)`. Nyquist entries keep only their real part.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn([i64; 2], f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let v = f(grid.wavevector(i), grid.abs_k(i));
                if grid.is_nyquist(i) {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn real(grid: &TorusGrid, f: impl Fn([i64; 2], f64) -> f64) -> Self {
        Self::from_fn(grid, |k, a| Complex64::new(f(k, a), 0.0))
    }

    pub fn identity(grid: &TorusGrid) -> Self {
        Self::real(grid, |_, _| 1.0)
    }

    /// `Λ^s`, symbol `|k|^s` on `k ≠ 0`; the zero mode is 1 for `s = 0` and 0 otherwise.
    pub fn lambda_pow(grid: &TorusGrid, s: f64) -> Self {
        Self::real(grid, |_, a| {
            if a == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                a.powf(s)
            }
        })
    }

    /// Hilbert transform, symbol `-i sgn(k)` (1D).
    pub fn hilbert(grid: &TorusGrid) -> Self {
        Self::from_fn(grid, |[k, _], _| Complex64::new(0.0, -(k.signum() as f64)))
    }

    /// Riesz transform `ℛ_j`, symbol `-i k_j/|k|` (`j` is 0 or 1).
    pub fn riesz(grid: &TorusGrid, j: usize) -> Self {
        Self::from_fn(grid, |k, a| {
            if a == 0.0 {
                ZERO
            } else {
                Complex64::new(0.0, -(k[j] as f64) / a)
            }
        })
    }

    /// Gradient potential `∂_j Λ^{-1}`, symbol `i k_j/|k|`; equals `-ℛ_j`.
    pub fn grad_inv_lambda(grid: &TorusGrid, j: usize) -> Self {
        Self::from_fn(grid, |k, a| {
            if a == 0.0 {
                ZERO
            } else {
                Complex64::new(0.0, k[j] as f64 / a)
            }
        })
    }

    /// `(I + ΥΛ)^{-1}`, symbol `1/(1+Υ|k|)`.
    pub fn resolvent(grid: &TorusGrid, upsilon: f64) -> Self {
        Self::real(grid, |_, a| 1.0 / (1.0 + upsilon * a))
    }

    /// `𝒯 = (I + ΥΛ)^{-1} Λ`, symbol `|k|/(1+Υ|k|)`.
    pub fn t_op(grid: &TorusGrid, upsilon: f64) -> Self {
        Self::real(grid, |_, a| a / (1.0 + upsilon * a))
    }

    /// Heat-kernel mollifier `J_ν`, symbol `exp(-ν|k|²)`.
    pub fn mollifier(grid: &TorusGrid, nu: f64) -> Self {
        Self::real(grid, |_, a| (-nu * a * a).exp())
    }

    /// `∂_j^order`, symbol `(i k_j)^order`.
    pub fn derivative(grid: &TorusGrid, j: usize, order: u32) -> Self {
        Self::from_fn(grid, |k, _| Complex64::new(0.0, k[j] as f64).powu(order))
    }

    /// Horizontal Laplacian, symbol `-|k|²`.
    pub fn laplacian(grid: &TorusGrid) -> Self {
        Self::real(grid, |_, a| -a * a)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.values[0]
    }

    /// Pointwise product of two symbols (operator composition).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// Applies the multiplier; panics on grid mismatch (see [`apply_symbol`]).
    pub fn apply(&self, field: &SpectralField) -> SpectralField {
        assert_eq!(&self.grid, field.grid(), "grid mismatch");
        let mut out = field.clone();
        out.coeffs_mut()
            .iter_mut()
            .zip(&self.values)
            .for_each(|(c, s)| *c *= s);
        out
    }
}

/// Diagonal multiplication `coeffs_out(k) = sym(k) · coeffs_in(k)`.
pub fn apply_symbol(field: &SpectralField, sym: &MultiplierSymbol) -> Result<SpectralField> {
    if field.grid() != sym.grid() {
        return Err(Error::GridMismatch(field.grid().to_string(), sym.grid().to_string()));
    }
    Ok(sym.apply(field))
}

/// `Λ^s f`. Negative exponents require a mean-zero field.
pub fn lambda_pow(field: &SpectralField, s: f64) -> Result<SpectralField> {
    if s < 0.0 {
        field.require_mean_zero()?;
    }
    Ok(MultiplierSymbol::lambda_pow(field.grid(), s).apply(field))
}

/// Hilbert transform of a 1D field.
pub fn hilbert(field: &SpectralField) -> Result<SpectralField> {
    field.require_dim(1)?;
    Ok(MultiplierSymbol::hilbert(field.grid()).apply(field))
}

/// Riesz transform `ℛ_j` of a 2D field, `j ∈ {0, 1}` for `x₁, x₂`.
pub fn riesz(field: &SpectralField, j: usize) -> Result<SpectralField> {
    field.require_dim(2)?;
    if j > 1 {
        return Err(Error::InvalidParameter(format!("Riesz index must be 0 or 1, got {j}")));
    }
    Ok(MultiplierSymbol::riesz(field.grid(), j).apply(field))
}

fn check_upsilon(upsilon: f64) -> Result<()> {
    if upsilon > 0.0 && upsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mass ratio must be positive, got {upsilon}")))
    }
}

pub fn resolvent(field: &SpectralField, upsilon: f64) -> Result<SpectralField> {
    check_upsilon(upsilon)?;
    Ok(MultiplierSymbol::resolvent(field.grid(), upsilon).apply(field))
}

pub fn t_op(field: &SpectralField, upsilon: f64) -> Result<SpectralField> {
    check_upsilon(upsilon)?;
    Ok(MultiplierSymbol::t_op(field.grid(), upsilon).apply(field))
}

pub fn mollify(field: &SpectralField, nu: f64) -> Result<SpectralField> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mollifier scale must be >= 0, got {nu}")));
    }
    Ok(MultiplierSymbol::mollifier(field.grid(), nu).apply(field))
}

/// `∂_j f`.
pub fn derivative(field: &SpectralField, j: usize) -> SpectralField {
    MultiplierSymbol::derivative(field.grid(), j, 1).apply(field)
}

/// Sobolev norm under the coefficient-sum convention (no `2π` volume factor):
/// `(Σ (1+|k|²)^s |f̂|²)^{1/2}`, or the homogeneous `(Σ_{k≠0} |k|^{2s} |f̂|²)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: f64, homogeneous: bool) -> f64 {
    let grid = field.grid();
    field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let a = grid.abs_k(i);
            let w = if homogeneous {
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(2.0 * s)
                }
            } else {
                (1.0 + a * a).powf(s)
            };
            w * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Homogeneous seminorm squared, `Σ_{k≠0} |k|^{2s} |f̂|²`.
pub fn hdot_sq(field: &SpectralField, s: f64) -> f64 {
    sobolev_norm(field, s, true).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> TorusGrid {
        TorusGrid::one_d(32).unwrap()
    }

    fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
        a.distance(b) < tol
    }

    #[test]
    fn identity_symbol() {
        let g = grid1();
        let f = SpectralField::from_fn(&g, |[x, _]| x.sin() + (3.0 * x).cos());
        let out = apply_symbol(&f, &MultiplierSymbol::identity(&g)).unwrap();
        assert!(close(&out, &f, 1e-15));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let f = SpectralField::zeros(&grid1());
        let sym = MultiplierSymbol::identity(&TorusGrid::one_d(16).unwrap());
        assert!(matches!(apply_symbol(&f, &sym), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn lambda_on_sine() {
        let g = grid1();
        let f = SpectralField::from_fn(&g, |[x, _]| x.sin());
        assert!(close(&lambda_pow(&f, 1.0).unwrap(), &f, 1e-14));
    }

    #[test]
    fn heat_kernel_on_cos2() {
        let g = grid1();
        let f = SpectralField::from_fn(&g, |[x, _]| (2.0 * x).cos());
        let expect = f.scale((-4.0f64).exp());
        assert!(close(&mollify(&f, 1.0).unwrap(), &expect, 1e-15));
    }

    #[test]
    fn lambda_powers() {
        let g = grid1();
        let c1 = SpectralField::from_fn(&g, |[x, _]| x.cos());
        assert!(close(&lambda_pow(&c1, 2.0).unwrap(), &c1, 1e-12));

        let s2 = SpectralField::from_fn(&g, |[x, _]| (2.0 * x).sin());
        assert!(close(&lambda_pow(&s2, -1.0).unwrap(), &s2.scale(0.5), 1e-14));

        // |k|^{1/2}: 1 at k=1, 2 at k=4
        let f = SpectralField::from_fn(&g, |[x, _]| x.cos() + (4.0 * x).cos());
        let expect = SpectralField::from_fn(&g, |[x, _]| x.cos() + 2.0 * (4.0 * x).cos());
        assert!(close(&lambda_pow(&f, 0.5).unwrap(), &expect, 1e-14));
    }

    #[test]
    fn negative_power_needs_mean_zero() {
        let g = grid1();
        let f = SpectralField::from_fn(&g, |[x, _]| 1.0 + x.cos());
        assert!(matches!(lambda_pow(&f, -1.0), Err(Error::NotMeanZero(_))));
        let z = lambda_pow(&f, 1.0).unwrap();
        assert_eq!(z.coeffs()[0], ZERO);
        let same = lambda_pow(&f, 0.0).unwrap();
        assert!(close(&same, &f, 1e-15));
    }

    #[test]
    fn hilbert_of_cosines() {
        let g = grid1();
        for k in 1..10 {
            let c = SpectralField::from_fn(&g, |[x, _]| (k as f64 * x).cos());
            let s = SpectralField::from_fn(&g, |[x, _]| (k as f64 * x).sin());
            assert!(close(&hilbert(&c).unwrap(), &s, 1e-14));
            assert!(close(&hilbert(&hilbert(&c).unwrap()).unwrap(), &-&c, 1e-14));
        }
    }

    #[test]
    fn riesz_on_x1_cosine() {
        let g = TorusGrid::two_d(16).unwrap();
        let c = SpectralField::from_fn(&g, |[x, _]| x.cos());
        let s = SpectralField::from_fn(&g, |[x, _]| x.sin());
        // -i k1/|k| on modes (±1, 0): ±1/2 -> ∓i/2, i.e. sin x1
        assert!(close(&riesz(&c, 0).unwrap(), &s, 1e-14));
        assert!(riesz(&c, 1).unwrap().norm_l2() < 1e-15);
        assert!(riesz(&c, 2).is_err());
        assert!(matches!(hilbert(&c), Err(Error::Dimension { .. })));
    }

    #[test]
    fn resolvent_and_t() {
        let g = grid1();
        let f = SpectralField::from_fn(&g, |[x, _]| (2.0 * x).sin());
        assert!(close(&resolvent(&f, 1.0).unwrap(), &f.scale(1.0 / 3.0), 1e-15));
        assert!(close(&t_op(&f, 1.0).unwrap(), &f.scale(2.0 / 3.0), 1e-15));
        assert!(resolvent(&f, 0.0).is_err());
        assert!(t_op(&f, -1.0).is_err());
        let with_mean = SpectralField::from_fn(&g, |[x, _]| 2.0 + x.sin());
        assert!((resolvent(&with_mean, 1.0).unwrap().mean() - 2.0).abs() < 1e-15);
        assert_eq!(t_op(&with_mean, 1.0).unwrap().coeffs()[0], ZERO);
    }

    #[test]
    fn sobolev_norms_of_cos() {
        let g = grid1();
        let c = SpectralField::from_fn(&g, |[x, _]| x.cos());
        assert!((sobolev_norm(&c, 0.0, false).powi(2) - 0.5).abs() < 1e-15);
        let base = sobolev_norm(&c, 0.0, true);
        for s in [-1.0, 0.5, 1.0, 2.5, 3.0] {
            assert!((sobolev_norm(&c, s, true) - base).abs() < 1e-15);
        }
    }

    #[test]
    fn nyquist_keeps_realness() {
        let g = TorusGrid::one_d(16).unwrap();
        let f = SpectralField::from_fn(&g, |[x, _]| (8.0 * x).cos() + x.sin());
        let h = hilbert(&f).unwrap();
        assert!(h.conjugate_symmetry_defect() < 1e-15);
        let d = derivative(&f, 0);
        assert!(d.conjugate_symmetry_defect() < 1e-15);
    }
}
