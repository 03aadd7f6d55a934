//! Per-mode linear theory: dispersion roots, the exact damped-oscillator
//! propagator and the multiplier symbols of the unidirectional inversions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dimensionless constants: mass ratio `Υ`, damping `δ`, bending `β`, steepness `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub upsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub eps: f64,
}

impl ModelParams {
    pub fn new(upsilon: f64, delta: f64, beta: f64, eps: f64) -> Result<Self> {
        let p = Self { upsilon, delta, beta, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64, rule: &str| {
            Err(Error::InvalidParameter(format!("{name} = {v} (must be {rule})")))
        };
        if !(self.upsilon > 0.0 && self.upsilon.is_finite()) {
            return bad("upsilon", self.upsilon, "> 0");
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta", self.delta, ">= 0");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", self.beta, ">= 0");
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad("eps", self.eps, ">= 0");
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// `1 + Υ|k|`.
    pub fn inertia(&self, abs_k: f64) -> f64 {
        1.0 + self.upsilon * abs_k
    }

    /// Restoring symbol `|k| + β/4 |k|⁵`.
    pub fn stiffness(&self, abs_k: f64) -> f64 {
        abs_k + 0.25 * self.beta * abs_k.powi(5)
    }

    /// Damping symbol `δ|k|³`.
    pub fn damping(&self, abs_k: f64) -> f64 {
        self.delta * abs_k.powi(3)
    }
}

/// Roots of `(1+Υ|k|) r² + δ|k|³ r + (|k| + β/4 |k|⁵) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionRoots {
    pub k: f64,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
}

pub fn dispersion_roots(k: f64, params: &ModelParams) -> Result<DispersionRoots> {
    let kk = k.abs();
    if kk == 0.0 {
        return Err(Error::ZeroMode);
    }
    let (r_plus, r_minus) = quadratic_roots(
        params.inertia(kk),
        params.damping(kk),
        params.stiffness(kk),
    );
    Ok(DispersionRoots { k: kk, r_plus, r_minus })
}

// Roots of a r² + b r + c with a > 0, b ≥ 0, c ≥ 0; the real branch avoids
// cancellation by pairing the large root with c/q.
fn quadratic_roots(a: f64, b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + disc.sqrt());
        if q == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let (r1, r2) = (c / q, q / a);
        (Complex64::new(r1.max(r2), 0.0), Complex64::new(r1.min(r2), 0.0))
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a);
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

/// Exact flow map of `A ÿ + B ẏ + C y = 0` over time `t`, as a 2×2 matrix
/// acting on `(y, ẏ)`.
pub fn oscillator_matrix(abs_k: f64, t: f64, params: &ModelParams) -> [[f64; 2]; 2] {
    let (r1, r2) = quadratic_roots(
        params.inertia(abs_k),
        params.damping(abs_k),
        params.stiffness(abs_k),
    );
    let m = (r1 + r2) * 0.5;
    let d = (r1 - r2) * 0.5;
    let dt = d * t;
    let phi = if d.norm() <= 1e-9 * m.norm() || dt.norm() < 0.5 {
        // cosh and sinh(z)/z by series; also covers the double root.
        let z2 = dt * dt;
        let c = 1.0 + z2 / 2.0 * (1.0 + z2 / 12.0 * (1.0 + z2 / 30.0 * (1.0 + z2 / 56.0 * (1.0 + z2 / 90.0))));
        let s = 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0 * (1.0 + z2 / 72.0 * (1.0 + z2 / 110.0))));
        let e = (m * t).exp();
        let prod = r1 * r2;
        [
            [e * (c - m * t * s), e * t * s],
            [-e * prod * t * s, e * (c + m * t * s)],
        ]
    } else {
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        let w = 1.0 / (r1 - r2);
        [
            [(r1 * e2 - r2 * e1) * w, (e1 - e2) * w],
            [r1 * r2 * (e2 - e1) * w, (r1 * e1 - r2 * e2) * w],
        ]
    };
    [[phi[0][0].re, phi[0][1].re], [phi[1][0].re, phi[1][1].re]]
}

/// Precomputed per-mode propagators for a fixed grid, time and parameters.
#[derive(Clone, Debug)]
pub struct BiPropagator {
    grid: TorusGrid,
    mats: Vec<[[f64; 2]; 2]>,
}

impl BiPropagator {
    pub fn new(grid: &TorusGrid, t: f64, params: &ModelParams) -> Self {
        let mats = (0..grid.len())
            .map(|i| oscillator_matrix(grid.abs_k(i), t, params))
            .collect();
        Self { grid: grid.clone(), mats }
    }

    pub fn apply(&self, f: &SpectralField, v: &SpectralField) -> (SpectralField, SpectralField) {
        assert_eq!(&self.grid, f.grid(), "grid mismatch");
        assert_eq!(&self.grid, v.grid(), "grid mismatch");
        let mut fo = f.clone();
        let mut vo = v.clone();
        for (i, m) in self.mats.iter().enumerate() {
            let (a, b) = (f.coeffs()[i], v.coeffs()[i]);
            fo.coeffs_mut()[i] = a * m[0][0] + b * m[0][1];
            vo.coeffs_mut()[i] = a * m[1][0] + b * m[1][1];
        }
        (fo, vo)
    }
}

/// Exact linear evolution `(f̂, f̂_t)(k) ↦` value at time `t`, mode by mode.
pub fn linear_propagate_bi(
    f: &SpectralField,
    v: &SpectralField,
    t: f64,
    params: &ModelParams,
) -> Result<(SpectralField, SpectralField)> {
    f.check_same_grid(v)?;
    f.require_mean_zero()?;
    v.require_mean_zero()?;
    Ok(BiPropagator::new(f.grid(), t, params).apply(f, v))
}

/// `(a_k, b_k)` of the first inversion; `a(0) = 1/2`, `b(0) = 0`.
pub fn symbol_ab(k: f64, params: &ModelParams) -> (f64, f64) {
    let kk = k.abs();
    if kk == 0.0 {
        return (0.5, 0.0);
    }
    let a = params.inertia(kk);
    let den = 4.0 * a * a + params.delta.powi(2) * kk.powi(4);
    (2.0 * a / den, params.delta * kk * kk / den)
}

/// `(α_k, γ_k)` of the second inversion; defined for `k ≠ 0` only.
pub fn symbol_alphagamma(k: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let kk = k.abs();
    if kk == 0.0 {
        return Err(Error::ZeroMode);
    }
    let a = params.inertia(kk);
    let den = params.delta.powi(2) * kk.powi(4) + 4.0 * a * a;
    Ok((-params.delta * kk / den, 2.0 * a / (kk * den)))
}

/// `(α_k, γ_k)` with the zero-mode convention `α(0) = γ(0) = 0`.
pub fn symbol_alphagamma_or_zero(k: f64, params: &ModelParams) -> (f64, f64) {
    symbol_alphagamma(k, params).unwrap_or((0.0, 0.0))
}

/// Which unidirectional model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UniModel {
    #[serde(rename = "uni1")]
    One,
    #[serde(rename = "uni2")]
    Two,
}

impl UniModel {
    pub fn number(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

/// Inversion symbol applied to both the linear bracket and the nonlinearity:
/// `a − i b sgn k` (model 1) or `α − i γ sgn k` (model 2).
pub fn inversion_symbol(k: i64, params: &ModelParams, model: UniModel) -> Complex64 {
    let s = k.signum() as f64;
    let kk = k.unsigned_abs() as f64;
    let (re, im) = match model {
        UniModel::One => symbol_ab(kk, params),
        UniModel::Two => symbol_alphagamma_or_zero(kk, params),
    };
    Complex64::new(re, -im * s)
}

/// Symbol of the linear bracket (before inversion and the `1/ε` factor).
pub fn linear_bracket_symbol(k: i64, params: &ModelParams, model: UniModel) -> Complex64 {
    let s = k.signum() as f64;
    let kk = k.unsigned_abs() as f64;
    let a = params.inertia(kk);
    let (beta, delta) = (params.beta, params.delta);
    match model {
        UniModel::One => {
            I * s * (a * kk - 0.25 * beta * kk.powi(4) - 1.0) - delta * kk.powi(3)
        }
        UniModel::Two => Complex64::new(
            -a * kk * kk + 0.25 * beta * kk.powi(5) + kk,
            -delta * s * kk.powi(4),
        ),
    }
}

/// Growth rate `L(k)` of the linear truncation, `F̂_τ = L(k) F̂`.
pub fn uni_linear_symbol(k: i64, params: &ModelParams, model: UniModel) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::ZeroMode);
    }
    if !(params.eps > 0.0) {
        return Err(Error::InvalidParameter("unidirectional models need eps > 0".into()));
    }
    Ok(inversion_symbol(k, params, model) * linear_bracket_symbol(k, params, model) / params.eps)
}

/// One row of the dispersion table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionRow {
    pub k: f64,
    pub re_r_plus: f64,
    pub im_r_plus: f64,
    pub re_r_minus: f64,
    pub im_r_minus: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// Roots and inversion symbols for `k = 1..=k_max`.
pub fn dispersion_table(k_max: usize, params: &ModelParams) -> Vec<DispersionRow> {
    (1..=k_max)
        .map(|k| {
            let k = k as f64;
            let r = dispersion_roots(k, params).expect("k > 0");
            let (a, b) = symbol_ab(k, params);
            let (alpha, gamma) = symbol_alphagamma_or_zero(k, params);
            DispersionRow {
                k,
                re_r_plus: r.r_plus.re,
                im_r_plus: r.r_plus.im,
                re_r_minus: r.r_minus.re,
                im_r_minus: r.r_minus.im,
                a,
                b,
                alpha,
                gamma,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: f64, d: f64, b: f64, e: f64) -> ModelParams {
        ModelParams::new(u, d, b, e).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn roots_reference_values() {
        let r = dispersion_roots(1.0, &p(1e-12, 0.0, 0.0, 1.0)).unwrap();
        assert!((r.r_plus - I).norm() < 1e-11);
        assert!((r.r_minus + I).norm() < 1e-11);

        let r = dispersion_roots(1.0, &p(1.0, 1.0, 4.0, 1.0)).unwrap();
        let s = 15f64.sqrt();
        assert!((r.r_plus - Complex64::new(-0.25, s / 4.0)).norm() < 1e-15);
        assert!((r.r_minus - Complex64::new(-0.25, -s / 4.0)).norm() < 1e-15);
        assert!(matches!(dispersion_roots(0.0, &p(1.0, 1.0, 1.0, 1.0)), Err(Error::ZeroMode)));
    }

    #[test]
    fn overdamped_roots_are_accurate() {
        // strongly overdamped: tiny root would lose digits without the stable form
        let pp = p(0.5, 10.0, 0.0, 1.0);
        let r = dispersion_roots(20.0, &pp).unwrap();
        for root in [r.r_plus, r.r_minus] {
            let terms = [
                pp.inertia(20.0) * root * root,
                pp.damping(20.0) * root,
                Complex64::new(pp.stiffness(20.0), 0.0),
            ];
            let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
            assert!((terms[0] + terms[1] + terms[2]).norm() / scale < 1e-12);
        }
        assert!(r.r_plus.im == 0.0 && r.r_plus.re < 0.0);
    }

    #[test]
    fn symbols_reference_values() {
        let pp = p(1.0, 1.0, 0.0, 1.0);
        let (a, b) = symbol_ab(1.0, &pp);
        assert!((a - 4.0 / 17.0).abs() < 1e-16 && (b - 1.0 / 17.0).abs() < 1e-16);
        let (al, ga) = symbol_alphagamma(1.0, &pp).unwrap();
        assert!((al + 1.0 / 17.0).abs() < 1e-16 && (ga - 4.0 / 17.0).abs() < 1e-16);
        assert!(symbol_alphagamma(0.0, &pp).is_err());
        assert_eq!(symbol_alphagamma_or_zero(0.0, &pp), (0.0, 0.0));
        assert_eq!(symbol_ab(0.0, &pp), (0.5, 0.0));
        let undamped = p(0.7, 0.0, 2.0, 1.0);
        for k in 1..20 {
            let (a, b) = symbol_ab(k as f64, &undamped);
            assert_eq!(b, 0.0);
            assert!((a - 1.0 / (2.0 * (1.0 + 0.7 * k as f64))).abs() < 1e-16);
        }
    }

    #[test]
    fn free_wave_rides_the_characteristic() {
        let pp = p(1e-14, 0.0, 0.0, 0.3);
        for model in [UniModel::One, UniModel::Two] {
            assert!(uni_linear_symbol(1, &pp, model).unwrap().norm() < 1e-12);
            assert!(uni_linear_symbol(-1, &pp, model).unwrap().norm() < 1e-12);
        }
        let l = uni_linear_symbol(3, &pp, UniModel::One).unwrap();
        let expect = Complex64::new(0.0, 0.5 * (3.0 - 1.0) / 0.3);
        assert!((l - expect).norm() < 1e-12);
    }

    #[test]
    fn both_unidirectional_rates_agree_and_dissipate() {
        for pp in [p(1.0, 1.0, 1.0, 0.1), p(0.3, 0.2, 4.0, 1.0), p(2.0, 0.05, 0.5, 0.5)] {
            for k in (-40..=40).filter(|&k| k != 0) {
                let l1 = uni_linear_symbol(k, &pp, UniModel::One).unwrap();
                let l2 = uni_linear_symbol(k, &pp, UniModel::Two).unwrap();
                assert!((l1 - l2).norm() <= 1e-12 * l1.norm().max(1.0));
                assert!(l1.re < 0.0);
                let lm = uni_linear_symbol(-k, &pp, UniModel::One).unwrap();
                assert!((lm - l1.conj()).norm() <= 1e-14 * l1.norm());
            }
        }
    }

    #[test]
    fn propagator_is_the_harmonic_oscillator_when_undamped() {
        let pp = p(0.5, 0.0, 1.0, 1.0);
        for k in [1.0f64, 2.0, 5.0] {
            let w = (pp.stiffness(k) / pp.inertia(k)).sqrt();
            for t in [0.0, 0.1, 1.3, 17.0] {
                let m = oscillator_matrix(k, t, &pp);
                assert!((m[0][0] - (w * t).cos()).abs() < 1e-12);
                assert!((m[1][0] + w * (w * t).sin()).abs() < 1e-12 * w.max(1.0));
                assert!((m[0][1] - (w * t).sin() / w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn propagator_composes_and_handles_double_roots() {
        let pp = p(1.0, 1.0, 4.0, 1.0);
        // δ|k|³ = 2√(AC) gives a double root at k = 1 for (Υ, β) = (1, 0), δ = 2√2
        let double = p(1.0, 2.0 * 2f64.sqrt(), 0.0, 1.0);
        for (params, k) in [(pp, 1.0), (pp, 3.0), (double, 1.0), (p(0.2, 3.0, 1.0, 1.0), 6.0)] {
            let a = oscillator_matrix(k, 0.3, &params);
            let b = oscillator_matrix(k, 0.7, &params);
            let c = oscillator_matrix(k, 1.0, &params);
            for i in 0..2 {
                for j in 0..2 {
                    let ab = b[i][0] * a[0][j] + b[i][1] * a[1][j];
                    assert!((ab - c[i][j]).abs() < 1e-12 * (1.0 + c[i][j].abs()), "{params:?} {k}");
                }
            }
        }
        let m = oscillator_matrix(1.0, 2.0, &double);
        let r = -2f64.sqrt() / 2.0;
        let e = (r * 2.0).exp();
        assert!((m[0][0] - (1.0 - r * 2.0) * e).abs() < 1e-12);
        assert!((m[0][1] - 2.0 * e).abs() < 1e-12);
    }
}
