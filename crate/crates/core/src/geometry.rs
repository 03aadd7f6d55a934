//! Graph-surface geometry of `x₃ = εη(x)` in the rescaled variables: induced
//! metric, mean and Gauss curvature, Laplace–Beltrami operator and the elastic
//! operator `𝓔(η; ε) = ½𝓛_Γ𝓗 + ε²(𝓗³ − 𝓗𝓚)`.
//!
//! Derivatives are spectral; all rational algebra is pointwise on the 3/2
//! oversampled grid and transformed back once per stage.

use std::f64::consts::TAU;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{loglog_slope, write_table};
use crate::error::{Error, Result};
use crate::spectral::{MultiplierSymbol, Padded, SpectralField, TorusGrid};

/// A surface `εη` over the 2D torus.
#[derive(Clone, Debug)]
pub struct SurfaceField {
    pub eta: SpectralField,
    pub eps: f64,
}

impl SurfaceField {
    pub fn new(eta: SpectralField, eps: f64) -> Result<Self> {
        eta.require_dim(2)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("steepness must be >= 0, got {eps}")));
        }
        let defect = eta.conjugate_symmetry_defect();
        if defect > 1e-12 * eta.max_coeff().max(1.0) {
            return Err(Error::InvalidParameter(format!("surface is not real (conjugate defect {defect:e})")));
        }
        Ok(Self { eta, eps })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.eta.grid()
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.eta.clone(), eps)
    }
}

/// Metric samples on the oversampled grid.
#[derive(Clone, Debug)]
pub struct Metric {
    /// `det g = 1 + ε²|∇η|²`.
    pub alpha: Padded,
    pub a11: Padded,
    pub a12: Padded,
    pub a22: Padded,
}

impl Metric {
    pub fn sqrt_alpha(&self) -> Padded {
        self.alpha.map(f64::sqrt)
    }
}

fn d(grid: &TorusGrid, j: usize) -> MultiplierSymbol {
    MultiplierSymbol::derivative(grid, j, 1)
}

fn zip_with(a: &Padded, b: &Padded, f: impl Fn(f64, f64) -> f64) -> Padded {
    let mut out = a.clone();
    for (o, &y) in out.values_mut().iter_mut().zip(b.values()) {
        *o = f(*o, y);
    }
    out
}

// first and second derivatives of η on the padded grid
struct Jet {
    e1: Padded,
    e2: Padded,
    e11: Padded,
    e12: Padded,
    e22: Padded,
}

impl Jet {
    fn of(eta: &SpectralField) -> Self {
        let g = eta.grid();
        let (d1, d2) = (d(g, 0), d(g, 1));
        let e1 = d1.apply(eta);
        let e2 = d2.apply(eta);
        Self {
            e11: Padded::of(&d1.apply(&e1)),
            e12: Padded::of(&d2.apply(&e1)),
            e22: Padded::of(&d2.apply(&e2)),
            e1: Padded::of(&e1),
            e2: Padded::of(&e2),
        }
    }
}

fn metric_from(jet: &Jet, eps: f64) -> Metric {
    let e2 = eps * eps;
    let alpha = zip_with(&jet.e1, &jet.e2, |p, q| 1.0 + e2 * (p * p + q * q));
    let a11 = zip_with(&alpha, &jet.e2, |a, q| (1.0 + e2 * q * q) / a);
    let a22 = zip_with(&alpha, &jet.e1, |a, p| (1.0 + e2 * p * p) / a);
    let mut a12 = zip_with(&jet.e1, &jet.e2, |p, q| -e2 * p * q);
    a12 = zip_with(&a12, &alpha, |x, a| x / a);
    Metric { alpha, a11, a12, a22 }
}

/// `α` and the inverse metric `α^{ij}` sampled pointwise.
pub fn metric_quantities(s: &SurfaceField) -> Metric {
    metric_from(&Jet::of(&s.eta), s.eps)
}

fn mean_curvature_padded(jet: &Jet, m: &Metric) -> Padded {
    let mut num = Padded::zeros(jet.e1.grid());
    num.add_product(1.0, &m.a11, &jet.e11);
    num.add_product(2.0, &m.a12, &jet.e12);
    num.add_product(1.0, &m.a22, &jet.e22);
    zip_with(&num, &m.alpha, |h, a| 0.5 * h / a.sqrt())
}

fn gauss_curvature_padded(jet: &Jet, m: &Metric) -> Padded {
    let mut det = jet.e11.mul(&jet.e22);
    det.add_product(-1.0, &jet.e12, &jet.e12);
    zip_with(&det, &m.alpha, |k, a| k / (a * a))
}

/// `𝓗 = (α¹¹η₁₁ + 2α¹²η₁₂ + α²²η₂₂) / (2√α)`.
pub fn mean_curvature(s: &SurfaceField) -> SpectralField {
    let jet = Jet::of(&s.eta);
    let m = metric_from(&jet, s.eps);
    mean_curvature_padded(&jet, &m).to_field()
}

/// `𝓚 = (η₁₁η₂₂ − η₁₂²) / α²`.
pub fn gauss_curvature(s: &SurfaceField) -> SpectralField {
    let jet = Jet::of(&s.eta);
    let m = metric_from(&jet, s.eps);
    gauss_curvature_padded(&jet, &m).to_field()
}

fn beltrami_with(m: &Metric, sqrt_alpha: &Padded, f: &SpectralField) -> SpectralField {
    let g = f.grid();
    let (d1, d2) = (d(g, 0), d(g, 1));
    let f1 = Padded::of(&d1.apply(f));
    let f2 = Padded::of(&d2.apply(f));
    let mut q1 = m.a11.mul(&f1);
    q1.add_product(1.0, &m.a12, &f2);
    let mut q2 = m.a12.mul(&f1);
    q2.add_product(1.0, &m.a22, &f2);
    let q1 = q1.mul(sqrt_alpha).to_field();
    let q2 = q2.mul(sqrt_alpha).to_field();
    let div = Padded::of(&(&d1.apply(&q1) + &d2.apply(&q2)));
    zip_with(&div, sqrt_alpha, |v, r| v / r).to_field()
}

/// `𝓛_Γ f = (1/√α) ∂ᵢ(√α α^{ij} ∂ⱼ f)`.
pub fn laplace_beltrami(s: &SurfaceField, f: &SpectralField) -> Result<SpectralField> {
    s.eta.check_same_grid(f)?;
    let m = metric_quantities(s);
    Ok(beltrami_with(&m, &m.sqrt_alpha(), f))
}

/// `𝓔(η; ε) = ½𝓛_Γ𝓗 + ε²(𝓗³ − 𝓗𝓚)`.
pub fn elastic_operator(s: &SurfaceField) -> SpectralField {
    let jet = Jet::of(&s.eta);
    let m = metric_from(&jet, s.eps);
    let h = mean_curvature_padded(&jet, &m);
    let k = gauss_curvature_padded(&jet, &m);
    let bending = beltrami_with(&m, &m.sqrt_alpha(), &h.to_field()).scale(0.5);
    if s.eps == 0.0 {
        return bending;
    }
    let e2 = s.eps * s.eps;
    let cubic = zip_with(&h, &k, |h, k| e2 * (h * h * h - h * k)).to_field();
    &bending + &cubic
}

/// `∫_{𝕋²} 𝓚 √α dx`, zero for every graph over the torus.
pub fn gauss_bonnet_integral(s: &SurfaceField) -> f64 {
    let jet = Jet::of(&s.eta);
    let m = metric_from(&jet, s.eps);
    let w = gauss_curvature_padded(&jet, &m).mul(&m.sqrt_alpha());
    let v = w.values();
    TAU * TAU * v.iter().sum::<f64>() / v.len() as f64
}

/// `‖𝓔(η; ε) − ¼Δ²η‖_{L²}` per ε and the fitted log-log slope over ε > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BiharmonicFit {
    pub eps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
}

pub fn biharmonic_residual(eta: &SpectralField, eps: f64) -> Result<f64> {
    let s = SurfaceField::new(eta.clone(), eps)?;
    let lap = MultiplierSymbol::laplacian(eta.grid());
    let bilap = lap.compose(&lap).scaled(0.25).apply(eta);
    Ok(elastic_operator(&s).distance(&bilap))
}

pub fn biharmonic_reduction_slope(eta: &SpectralField, eps_list: &[f64]) -> Result<BiharmonicFit> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 steepness values, got {}", eps_list.len())));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("steepness values must be strictly decreasing".into()));
    }
    let residuals = eps_list.iter().map(|&e| biharmonic_residual(eta, e)).collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        eps_list.iter().zip(&residuals).filter(|(&e, _)| e > 0.0).map(|(&e, &r)| (e, r)).unzip();
    if xs.len() < 2 || ys.contains(&0.0) {
        return Err(Error::DegenerateFit("residuals vanish; the slope is undefined".into()));
    }
    Ok(BiharmonicFit { eps: eps_list.to_vec(), residuals, slope: loglog_slope(&xs, &ys)? })
}

#[derive(Serialize)]
struct CurvatureRow {
    x1: f64,
    x2: f64,
    eta: f64,
    mean_curvature: f64,
    gauss_curvature: f64,
}

/// Surface height, `𝓗` and `𝓚` sampled on the physical grid.
pub fn write_curvature_csv(s: &SurfaceField, path: &Path) -> Result<()> {
    let grid = s.grid();
    let eta = s.eta.to_physical();
    let h = mean_curvature(s).to_physical();
    let k = gauss_curvature(s).to_physical();
    let rows: Vec<CurvatureRow> = (0..grid.len())
        .map(|i| {
            let [x1, x2] = grid.point(i);
            CurvatureRow { x1, x2, eta: eta[i], mean_curvature: h[i], gauss_curvature: k[i] }
        })
        .collect();
    write_table(&rows, "curvature", path)
}
