//! Torus grids, spectral fields, Fourier multipliers, dealiased products and
//! the half-space Dirichlet–Neumann map.

mod field;
mod grid;
mod multiplier;
mod snapshot;

use num_complex::Complex64;

pub use field::{SpectralField, MEAN_TOL};
pub use grid::TorusGrid;
pub use multiplier::{
    apply_symbol, derivative, hdot_sq, hilbert, lambda_pow, mollify, resolvent, riesz,
    sobolev_norm, t_op, MultiplierSymbol,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC};

use crate::error::{Error, Result};

/// 2/3-rule truncation: zeroes every mode with some `|k_j| > n/3`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let cut = field.grid().cutoff();
    field.map_modes(|k, _, c| {
        if k[0].abs() > cut || k[1].abs() > cut {
            Complex64::new(0.0, 0.0)
        } else {
            c
        }
    })
}

/// Physical samples on the 3/2-oversampled grid, used to accumulate
/// pointwise products before a single transform back.
#[derive(Clone, Debug)]
pub struct Padded {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl Padded {
    pub fn of(field: &SpectralField) -> Self {
        Self {
            grid: field.grid().clone(),
            values: field.grid().inverse_padded(field.coeffs()),
        }
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        let m = grid.padded_n().pow(grid.dim() as u32);
        Self { grid: grid.clone(), values: vec![0.0; m] }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    /// `self += a * x * y` pointwise.
    pub fn add_product(&mut self, a: f64, x: &Self, y: &Self) {
        for ((s, p), q) in self.values.iter_mut().zip(&x.values).zip(&y.values) {
            *s += a * p * q;
        }
    }

    /// Back to coefficients on the base grid with 2/3 truncation.
    pub fn to_field(&self) -> SpectralField {
        let coeffs = self.grid.forward_padded(&self.values);
        let f = SpectralField::from_coeffs(&self.grid, coeffs).expect("padded length");
        dealias(&f)
    }
}

/// Dealiased product `f g`.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    Ok(Padded::of(f).mul(&Padded::of(g)).to_field())
}

/// One exponential term `amplitude · e^{rate · y₃}` of a vertical source profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub rate: f64,
    pub amplitude: Complex64,
}

/// Per-mode source profile `b̂(k, y₃) = Σ amplitude · e^{rate · y₃}`, indexed
/// like the grid coefficients.
#[derive(Clone, Debug)]
pub struct SourceProfile {
    grid: TorusGrid,
    terms: Vec<Vec<ExpTerm>>,
}

impl SourceProfile {
    pub fn empty(grid: &TorusGrid) -> Self {
        Self { grid: grid.clone(), terms: vec![Vec::new(); grid.len()] }
    }

    pub fn push(&mut self, k: [i64; 2], term: ExpTerm) -> Result<()> {
        let i = self
            .grid
            .index_of(k)
            .ok_or_else(|| Error::InvalidParameter(format!("mode {k:?} not on {}", self.grid)))?;
        self.terms[i].push(term);
        Ok(())
    }

    pub fn terms(&self, index: usize) -> &[ExpTerm] {
        &self.terms[index]
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
}

/// Normal derivative at `y₃ = 0` of the decaying solution of `Δu = b` in the
/// lower half-space with `u = g` on the boundary:
/// `Λĝ(k) + Σ amplitude/(|k| + rate)`, the source integral done analytically.
pub fn dn_map_with_source(g: &SpectralField, source: &SourceProfile) -> Result<SpectralField> {
    if g.grid() != source.grid() {
        return Err(Error::GridMismatch(g.grid().to_string(), source.grid().to_string()));
    }
    g.require_mean_zero()?;
    let grid = g.grid();
    let mut out = lambda_pow(g, 1.0)?;
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let a = grid.abs_k(i);
        for t in source.terms(i) {
            if !(t.rate > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "source decay rate must be positive, got {}",
                    t.rate
                )));
            }
            *c += t.amplitude / (a + t.rate);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dealias_behaviour() {
        let g = TorusGrid::one_d(32).unwrap();
        let low = SpectralField::from_fn(&g, |[x, _]| (3.0 * x).cos() + (10.0 * x).sin());
        assert!(dealias(&low).distance(&low) < 1e-15);
        let top = SpectralField::from_modes(&g, |k| Complex64::new(if k[0].abs() == 15 { 0.5 } else { 0.0 }, 0.0));
        assert_eq!(dealias(&top).norm_l2(), 0.0);
    }

    #[test]
    fn aliased_square_keeps_constant_only() {
        for n in [8, 16, 32, 64] {
            let g = TorusGrid::one_d(n).unwrap();
            let m = (n / 2 - 1) as f64;
            let c = SpectralField::from_fn(&g, |[x, _]| (m * x).cos());
            let p = dealiased_product(&c, &c).unwrap();
            assert!((p.mean() - 0.5).abs() < 1e-14);
            assert!(p.project_mean_zero().norm_l2() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn resolved_product_is_exact() {
        let g = TorusGrid::two_d(32).unwrap();
        let f = SpectralField::from_fn(&g, |[x, y]| x.cos() + (2.0 * y).sin());
        let h = SpectralField::from_fn(&g, |[x, y]| (x + y).sin());
        let expect = SpectralField::from_fn(&g, |[x, y]| (x.cos() + (2.0 * y).sin()) * (x + y).sin());
        assert!(dealiased_product(&f, &h).unwrap().distance(&expect) < 1e-14);
    }

    #[test]
    fn dn_map_cases() {
        let g = TorusGrid::one_d(16).unwrap();
        let psi = SpectralField::from_fn(&g, |[x, _]| (2.0 * x).sin());
        let plain = dn_map_with_source(&psi, &SourceProfile::empty(&g)).unwrap();
        assert!(plain.distance(&lambda_pow(&psi, 1.0).unwrap()) < 1e-15);

        let zero = SpectralField::zeros(&g);
        let mut src = SourceProfile::empty(&g);
        src.push([1, 0], ExpTerm { rate: 1.0, amplitude: Complex64::new(1.0, 0.0) }).unwrap();
        let out = dn_map_with_source(&zero, &src).unwrap();
        assert!((out.coeff([1, 0]) - Complex64::new(0.5, 0.0)).norm() < 1e-16);

        let mut src = SourceProfile::empty(&g);
        src.push([3, 0], ExpTerm { rate: 2.0, amplitude: Complex64::new(0.7, 0.1) }).unwrap();
        let out = dn_map_with_source(&zero, &src).unwrap();
        assert!((out.coeff([3, 0]) - Complex64::new(0.7, 0.1) / 5.0).norm() < 1e-16);

        let mut bad = SourceProfile::empty(&g);
        bad.push([1, 0], ExpTerm { rate: 0.0, amplitude: Complex64::new(1.0, 0.0) }).unwrap();
        assert!(dn_map_with_source(&zero, &bad).is_err());
    }
}
