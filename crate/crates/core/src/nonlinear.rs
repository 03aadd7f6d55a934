//! Commutators, bilinear couplings and the quadratic forcings of the four
//! models. Products are formed on the 3/2 grid and truncated by the 2/3 rule.
//!
//! Inside the models the vector multiplier is `G = ∇Λ^{-1}` (symbol
//! `i k_j/|k|`); in one dimension `G = ∂_ξΛ^{-1} = -ℋ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linear::ModelParams;
use crate::spectral::{
    dealias, dn_map_with_source, ExpTerm, MultiplierSymbol, Padded, SourceProfile,
    SpectralField, TorusGrid,
};

/// The quadratic terms of the four models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NonlinearityKind {
    Uni1,
    Uni2,
    Bi1Forcing,
    Bi2Forcing,
    CouplingN,
    QuadraticQ,
}

impl NonlinearityKind {
    pub const ALL: [Self; 6] = [
        Self::Uni1,
        Self::Uni2,
        Self::Bi1Forcing,
        Self::Bi2Forcing,
        Self::CouplingN,
        Self::QuadraticQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uni1 => "uni1",
            Self::Uni2 => "uni2",
            Self::Bi1Forcing => "bi1-forcing",
            Self::Bi2Forcing => "bi2-forcing",
            Self::CouplingN => "coupling-n",
            Self::QuadraticQ => "quadratic-q",
        }
    }

    /// Spatial dimension the term is defined in.
    pub fn dim(self) -> usize {
        match self {
            Self::Uni1 | Self::Uni2 => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NonlinearityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown nonlinearity '{s}'")))
    }
}

fn lam(f: &SpectralField) -> SpectralField {
    MultiplierSymbol::lambda_pow(f.grid(), 1.0).apply(f)
}

fn dx(f: &SpectralField, j: usize, order: u32) -> SpectralField {
    MultiplierSymbol::derivative(f.grid(), j, order).apply(f)
}

fn grad_inv_lambda(f: &SpectralField, j: usize) -> SpectralField {
    MultiplierSymbol::grad_inv_lambda(f.grid(), j).apply(f)
}

/// `[Λ, f] g = Λ(fg) − f Λg`, raw difference (no mean projection).
pub fn commutator_lambda(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let (pf, pg, plg) = (Padded::of(f), Padded::of(g), Padded::of(&lam(g)));
    Ok(&lam(&pf.mul(&pg).to_field()) - &pf.mul(&plg).to_field())
}

/// `ℕ(f, ·)` with `f` fixed: the padded samples of `f` and `∇f` are computed
/// once so repeated applications (fixed-point iterations) only transform `g`.
#[derive(Clone, Debug)]
pub struct Coupling {
    grid: TorusGrid,
    f: Padded,
    df: [Padded; 2],
    lambda: MultiplierSymbol,
    g_sym: [MultiplierSymbol; 2],
}

impl Coupling {
    pub fn new(f: &SpectralField) -> Result<Self> {
        f.require_dim(2)?;
        let grid = f.grid().clone();
        Ok(Self {
            f: Padded::of(f),
            df: [Padded::of(&dx(f, 0, 1)), Padded::of(&dx(f, 1, 1))],
            lambda: MultiplierSymbol::lambda_pow(&grid, 1.0),
            g_sym: [
                MultiplierSymbol::grad_inv_lambda(&grid, 0),
                MultiplierSymbol::grad_inv_lambda(&grid, 1),
            ],
            grid,
        })
    }

    /// `ℕ(f, g) = [Λ, f] g + ∇f · G g`.
    pub fn apply(&self, g: &SpectralField) -> Result<SpectralField> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch(self.grid.to_string(), g.grid().to_string()));
        }
        let pg = Padded::of(g);
        let mut rest = Padded::zeros(&self.grid);
        rest.add_product(-1.0, &self.f, &Padded::of(&self.lambda.apply(g)));
        for j in 0..2 {
            rest.add_product(1.0, &self.df[j], &Padded::of(&self.g_sym[j].apply(g)));
        }
        Ok(&self.lambda.apply(&self.f.mul(&pg).to_field()) + &rest.to_field())
    }
}

/// `ℕ(f, g) = [Λ, f] g + ∇f · G g` on 2D fields; `g` must be mean-zero.
pub fn coupling_n(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    g.require_mean_zero()?;
    Coupling::new(f)?.apply(g)
}

/// `𝒬(v) = ½Λ(v² − |Gv|²) − [Λ, v] v − ∇v · Gv`.
pub fn quadratic_q(v: &SpectralField) -> Result<SpectralField> {
    v.require_dim(2)?;
    let grid = v.grid();
    let pv = Padded::of(v);
    let gv = [Padded::of(&grad_inv_lambda(v, 0)), Padded::of(&grad_inv_lambda(v, 1))];
    let dv = [Padded::of(&dx(v, 0, 1)), Padded::of(&dx(v, 1, 1))];
    // Λ-argument: ½v² − ½|Gv|² − v²
    let mut under = Padded::zeros(grid);
    under.add_product(-0.5, &pv, &pv);
    let mut rest = Padded::zeros(grid);
    rest.add_product(1.0, &pv, &Padded::of(&lam(v)));
    for j in 0..2 {
        under.add_product(-0.5, &gv[j], &gv[j]);
        rest.add_product(-1.0, &dv[j], &gv[j]);
    }
    Ok(&lam(&under.to_field()) + &rest.to_field())
}

/// Model 1 bidirectional forcing: the algebraic part `𝒬(v)` of the right-hand
/// side. The `∂_t`-terms are carried by the implicit coupling `ℕ(f, ∂_t v)`.
pub fn bi1_forcing(v: &SpectralField) -> Result<SpectralField> {
    quadratic_q(v)
}

/// `𝒯(f + β/4 Δ²f − δ Δv)`, the field paired against `[Λ, f]` and `∇f·G` in
/// the model 2 forcing.
pub fn bi2_weight(f: &SpectralField, v: &SpectralField, params: &ModelParams) -> SpectralField {
    let grid = f.grid();
    let t = MultiplierSymbol::t_op(grid, params.upsilon);
    let bend = MultiplierSymbol::real(grid, |_, a| 1.0 + 0.25 * params.beta * a.powi(4));
    let damp = MultiplierSymbol::real(grid, |_, a| params.delta * a * a);
    t.apply(&(&bend.apply(f) + &damp.apply(v)))
}

/// Model 2 bidirectional forcing `𝔑[f] = 𝒬(v) + ℕ(f, 𝒯(f + β/4Δ²f − δΔv))`, `v = f_t`.
pub fn bi2_forcing(f: &SpectralField, v: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    f.check_same_grid(v)?;
    let w = bi2_weight(f, v, params);
    Ok(&quadratic_q(v)? + &Coupling::new(f)?.apply(&w)?)
}

/// `2F_ξ ΛF − [Λ, F] F_ξ`.
pub fn uni1_nonlinearity(f: &SpectralField) -> Result<SpectralField> {
    f.require_dim(1)?;
    let fx = dx(f, 0, 1);
    let (pf, pfx) = (Padded::of(f), Padded::of(&fx));
    let mut rest = Padded::zeros(f.grid());
    rest.add_product(2.0, &pfx, &Padded::of(&lam(f)));
    rest.add_product(1.0, &pf, &Padded::of(&lam(&fx)));
    Ok(&rest.to_field() - &lam(&pf.mul(&pfx).to_field()))
}

/// Cached multipliers for the model 2 nonlinearity on one grid.
#[derive(Clone, Debug)]
pub struct Uni2Nonlinearity {
    lambda: MultiplierSymbol,
    hilbert: MultiplierSymbol,
    d1: MultiplierSymbol,
    d2: MultiplierSymbol,
    // 𝒯(1 + β/4 ∂⁴ + δ ∂³)
    weight: MultiplierSymbol,
}

impl Uni2Nonlinearity {
    pub fn new(grid: &TorusGrid, params: &ModelParams) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: grid.dim() });
        }
        params.validate()?;
        let t = MultiplierSymbol::t_op(grid, params.upsilon);
        let inner = MultiplierSymbol::from_fn(grid, |[k, _], _| {
            let ik = Complex64::new(0.0, k as f64);
            1.0 + 0.25 * params.beta * ik.powu(4) + params.delta * ik.powu(3)
        });
        Ok(Self {
            lambda: MultiplierSymbol::lambda_pow(grid, 1.0),
            hilbert: MultiplierSymbol::hilbert(grid),
            d1: MultiplierSymbol::derivative(grid, 0, 1),
            d2: MultiplierSymbol::derivative(grid, 0, 2),
            weight: t.compose(&inner),
        })
    }

    /// `𝒩₁(F)`. The commutator groups share `W = 𝒯(F + β/4 F_ξξξξ + δF_ξξξ)`
    /// and the `F_ξ` groups reduce to `F_ξ ℋW` since `Λ = ℋ∂_ξ`.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.grid() != self.lambda.grid() {
            return Err(Error::GridMismatch(self.lambda.grid().to_string(), f.grid().to_string()));
        }
        let fx = self.d1.apply(f);
        let w = self.weight.apply(f);
        let p = |g: &SpectralField| Padded::of(g);
        let (pf, pfx, plf, pw) = (p(f), p(&fx), p(&self.lambda.apply(f)), p(&w));
        let mut under = Padded::zeros(f.grid());
        under.add_product(-0.5, &pfx, &pfx);
        under.add_product(-0.5, &plf, &plf);
        under.add_product(1.0, &pf, &pw);
        let mut rest = Padded::zeros(f.grid());
        rest.add_product(1.0, &pfx, &p(&self.lambda.apply(&fx)));
        rest.add_product(1.0, &p(&self.d2.apply(f)), &plf);
        rest.add_product(-1.0, &pf, &p(&self.lambda.apply(&w)));
        rest.add_product(-1.0, &pfx, &p(&self.hilbert.apply(&w)));
        Ok(&self.lambda.apply(&under.to_field()) + &rest.to_field())
    }
}

/// `𝒩₁(F)` assembled term by term in the grouping
/// `½Λ(F_ξ² − (ΛF)²)`, `−[Λ,F_ξ]F_ξ`, `F_ξξΛF`, `[Λ,F]𝒯F`, `−F_ξℋ𝒯F`,
/// `β/4([Λ,F]𝒯F_ξξξξ − F_ξΛ𝒯F_ξξξ)`, `δ([Λ,F]𝒯F_ξξξ − F_ξΛ𝒯F_ξξ)`.
pub fn uni2_terms(f: &SpectralField, params: &ModelParams) -> Result<[SpectralField; 7]> {
    f.require_dim(1)?;
    let grid = f.grid();
    let t = MultiplierSymbol::t_op(grid, params.upsilon);
    let prod = |a: &SpectralField, b: &SpectralField| Padded::of(a).mul(&Padded::of(b)).to_field();
    let hil = |g: &SpectralField| MultiplierSymbol::hilbert(grid).apply(g);
    let (fx, fxx, fxxx, fxxxx) = (dx(f, 0, 1), dx(f, 0, 2), dx(f, 0, 3), dx(f, 0, 4));
    let lf = lam(f);
    let t1 = lam(&(&prod(&fx, &fx) - &prod(&lf, &lf))).scale(0.5);
    let t2 = -commutator_lambda(&fx, &fx)?;
    let t3 = prod(&fxx, &lf);
    let t4 = commutator_lambda(f, &t.apply(f))?;
    let t5 = -prod(&fx, &hil(&t.apply(f)));
    let t6 = (&commutator_lambda(f, &t.apply(&fxxxx))? - &prod(&fx, &lam(&t.apply(&fxxx))))
        .scale(0.25 * params.beta);
    let t7 = (&commutator_lambda(f, &t.apply(&fxxx))? - &prod(&fx, &lam(&t.apply(&fxx))))
        .scale(params.delta);
    Ok([t1, t2, t3, t4, t5, t6, t7])
}

/// `𝒩₁(F)` for model 2.
pub fn uni2_nonlinearity(f: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    Uni2Nonlinearity::new(f.grid(), params)?.apply(f)
}

/// `‖ℋ(fℋf) − ½((ℋf)² − f²)‖_{L²}` for a 1D field.
pub fn tricomi_residual(f: &SpectralField) -> Result<f64> {
    f.require_dim(1)?;
    let h = MultiplierSymbol::hilbert(f.grid());
    let (pf, phf) = (Padded::of(f), Padded::of(&h.apply(f)));
    let lhs = h.apply(&pf.mul(&phf).to_field());
    let mut rhs = Padded::zeros(f.grid());
    rhs.add_product(0.5, &phf, &phf);
    rhs.add_product(-0.5, &pf, &pf);
    Ok(lhs.distance(&rhs.to_field()))
}

/// Source of the first-order Poisson problem,
/// `b̂(k, y₃) = −Σ_m |m|(|k|² − |m|²) η̂(k−m) ψ̂(m) e^{|m|y₃}`, built by direct
/// convolution over the supports of the two fields.
pub fn first_order_source(eta: &SpectralField, psi: &SpectralField) -> Result<SourceProfile> {
    eta.check_same_grid(psi)?;
    eta.require_dim(2)?;
    let grid = eta.grid();
    // coefficients below this relative level are transform roundoff
    let floor = |f: &SpectralField| 1e-14 * f.max_coeff();
    let reach = eta.max_wavenumber(floor(eta)) + psi.max_wavenumber(floor(psi));
    if 2 * reach >= grid.n() as i64 {
        return Err(Error::Aliasing(format!(
            "combined band {reach} reaches the Nyquist mode of {grid}"
        )));
    }
    let support = |f: &SpectralField| -> Vec<([i64; 2], Complex64)> {
        (0..grid.len())
            .filter(|&i| f.coeffs()[i].norm() > floor(f))
            .map(|i| (grid.wavevector(i), f.coeffs()[i]))
            .collect()
    };
    let (se, sp) = (support(eta), support(psi));
    let mut src = SourceProfile::empty(grid);
    for &(m, pm) in &sp {
        let am = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        if am == 0.0 {
            continue;
        }
        for &(p, ep) in &se {
            let k = [p[0] + m[0], p[1] + m[1]];
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            let amp = ep * pm * (-am * (k2 - am * am));
            src.push(k, ExpTerm { rate: am, amplitude: amp })?;
        }
    }
    Ok(src)
}

/// Distance between the Poisson-oracle normal derivative of the first-order
/// potential (with `ψ⁽¹⁾ = 0`) and the closed form `−[Λ, η⁰] Λψ⁰`.
pub fn first_order_expansion_residual(eta: &SpectralField, psi: &SpectralField) -> Result<f64> {
    let src = first_order_source(eta, psi)?;
    let zero = SpectralField::zeros(eta.grid());
    let oracle = dealias(&dn_map_with_source(&zero, &src)?);
    let closed = -commutator_lambda(eta, &lam(psi))?;
    Ok(oracle.distance(&closed))
}
