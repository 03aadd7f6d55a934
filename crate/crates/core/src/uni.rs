//! The two unidirectional models `F_τ = L F + N(F)` on the 1D torus, integrated
//! with ETDRK4 (exact linear propagator, fourth-order treatment of `N`).

use num_complex::Complex64;

use crate::diagnostics::{decay_fit, EnergyReport, ExpFit, ReportSeries, SeriesKind};
use crate::error::{Error, Result};
pub use crate::linear::UniModel;
use crate::linear::{inversion_symbol, uni_linear_symbol, ModelParams};
use crate::nonlinear::{uni1_nonlinearity, Uni2Nonlinearity};
use crate::spectral::{hdot_sq, MultiplierSymbol, SpectralField, TorusGrid};

/// Blow-up threshold on `‖F‖_{L∞}`.
pub const BLOWUP_LINF: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct UniConfig {
    pub model: UniModel,
    pub params: ModelParams,
    pub grid: TorusGrid,
    /// Slow-time step.
    pub dt: f64,
    pub t_end: f64,
    /// Record a state every this many steps (the final state is always kept).
    pub output_every: usize,
    /// When false the nonlinearity is dropped and steps are exact.
    pub nonlinear: bool,
}

impl UniConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: self.grid.dim() });
        }
        if !(self.params.eps > 0.0) {
            return Err(Error::InvalidParameter("unidirectional models need eps > 0".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidParameter("output_every must be >= 1".into()));
        }
        steps_for(self.t_end, self.dt).map(|_| ())
    }

    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_end, self.dt)
    }
}

pub(crate) fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n as usize)
}

/// Per-mode `L(k)` and inversion symbol for one grid, parameter set and model.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub linear: MultiplierSymbol,
    pub inversion: MultiplierSymbol,
}

impl SymbolTable {
    pub fn new(grid: &TorusGrid, params: &ModelParams, model: UniModel) -> Result<Self> {
        uni_linear_symbol(1, params, model)?;
        Ok(Self {
            linear: MultiplierSymbol::from_fn(grid, |[k, _], _| {
                uni_linear_symbol(k, params, model).unwrap_or_default()
            }),
            inversion: MultiplierSymbol::from_fn(grid, |[k, _], _| inversion_symbol(k, params, model)),
        })
    }
}

// Contour radius and point count for the φ-functions near zero.
const CONTOUR_POINTS: usize = 32;
const CONTOUR_SWITCH: f64 = 0.5;

/// ETDRK4 coefficients for one `z = L h`, scaled by `h`.
fn etd_coefficients(z: Complex64, h: f64) -> [Complex64; 4] {
    let direct = |z: Complex64| {
        let ez = z.exp();
        let z3 = z * z * z;
        [
            ((z / 2.0).exp() - 1.0) / z,
            (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
            (2.0 + z + ez * (z - 2.0)) / z3,
            (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3,
        ]
    };
    let vals = if z.norm() < CONTOUR_SWITCH {
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        for j in 0..CONTOUR_POINTS {
            let theta = std::f64::consts::PI * (2.0 * j as f64 + 1.0) / CONTOUR_POINTS as f64;
            let d = direct(z + Complex64::from_polar(1.0, theta));
            for (a, v) in acc.iter_mut().zip(d) {
                *a += v;
            }
        }
        acc.map(|a| a / CONTOUR_POINTS as f64)
    } else {
        direct(z)
    };
    vals.map(|v| v * h)
}

/// Precomputed integrator for a fixed configuration.
#[derive(Clone, Debug)]
pub struct UniStepper {
    config: UniConfig,
    table: SymbolTable,
    uni2: Option<Uni2Nonlinearity>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl UniStepper {
    pub fn new(config: &UniConfig) -> Result<Self> {
        config.validate()?;
        let table = SymbolTable::new(&config.grid, &config.params, config.model)?;
        let h = config.dt;
        let n = config.grid.len();
        let mut s = Self {
            uni2: match config.model {
                UniModel::One => None,
                UniModel::Two => Some(Uni2Nonlinearity::new(&config.grid, &config.params)?),
            },
            config: config.clone(),
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
            table,
        };
        for &l in s.table.linear.values() {
            let z = l * h;
            let [q, f1, f2, f3] = etd_coefficients(z, h);
            s.e.push(z.exp());
            s.e2.push((z / 2.0).exp());
            s.q.push(q);
            s.f1.push(f1);
            s.f2.push(f2);
            s.f3.push(f3);
        }
        Ok(s)
    }

    pub fn config(&self) -> &UniConfig {
        &self.config
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.table
    }

    /// The model's quadratic bracket before inversion.
    pub fn bracket(&self, f: &SpectralField) -> Result<SpectralField> {
        match &self.uni2 {
            None => uni1_nonlinearity(f),
            Some(op) => op.apply(f),
        }
    }

    /// Nonlinear part of the right-hand side, `−S 𝒩(F)`; zero when disabled.
    pub fn nonlinear_term(&self, f: &SpectralField) -> Result<SpectralField> {
        if !self.config.nonlinear {
            return Ok(SpectralField::zeros(f.grid()));
        }
        Ok(-self.table.inversion.apply(&self.bracket(f)?))
    }

    pub fn linear_term(&self, f: &SpectralField) -> SpectralField {
        self.table.linear.apply(f)
    }

    fn check_input(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != &self.config.grid {
            return Err(Error::GridMismatch(self.config.grid.to_string(), f.grid().to_string()));
        }
        f.require_mean_zero()
    }

    pub fn rhs(&self, f: &SpectralField) -> Result<SpectralField> {
        self.check_input(f)?;
        Ok(&self.linear_term(f) + &self.nonlinear_term(f)?)
    }

    /// One ETDRK4 step.
    pub fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_input(u)?;
        let combine = |terms: &[(&[Complex64], &SpectralField)]| {
            let mut out = SpectralField::zeros(u.grid());
            for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                *c = terms.iter().map(|(w, f)| w[i] * f.coeffs()[i]).sum();
            }
            out
        };
        let out = if !self.config.nonlinear {
            combine(&[(&self.e, u)])
        } else {
            let nu = self.nonlinear_term(u)?;
            let a = combine(&[(&self.e2, u), (&self.q, &nu)]);
            let na = self.nonlinear_term(&a)?;
            let b = combine(&[(&self.e2, u), (&self.q, &na)]);
            let nb = self.nonlinear_term(&b)?;
            let two_nb_minus_nu = &nb.scale(2.0) - &nu;
            let c = combine(&[(&self.e2, &a), (&self.q, &two_nb_minus_nu)]);
            let nc = self.nonlinear_term(&c)?;
            let nab = &na + &nb;
            let mut out = combine(&[(&self.e, u), (&self.f1, &nu), (&self.f3, &nc)]);
            let mid = combine(&[(&self.f2, &nab)]);
            out = out.axpy(2.0, &mid);
            out
        };
        if !out.is_finite() {
            return Err(Error::BlowUp { last_good_time: f64::NAN, reason: "nonfinite coefficient".into() });
        }
        Ok(out)
    }

    pub fn report(&self, time: f64, f: &SpectralField) -> EnergyReport {
        let p = &self.config.params;
        EnergyReport::of_field(time, f, energy_e(f, p), energy_cal_e(f, p))
    }
}

/// Right-hand side `L F + N(F)`.
pub fn rhs_uni(f: &SpectralField, config: &UniConfig) -> Result<SpectralField> {
    UniStepper::new(config)?.rhs(f)
}

/// One ETDRK4 step of size `config.dt`.
pub fn step(f: &SpectralField, config: &UniConfig) -> Result<SpectralField> {
    UniStepper::new(config)?.step(f)
}

/// `E = ‖F‖²_{L²} + 2Υ‖F‖²_{Ḣ^{1/2}} + Υ²‖F‖²_{Ḣ¹} + δ²/4 ‖F‖²_{Ḣ²}`.
pub fn energy_e(f: &SpectralField, params: &ModelParams) -> f64 {
    let u = params.upsilon;
    hdot_sq(f, 0.0) + 2.0 * u * hdot_sq(f, 0.5) + u * u * hdot_sq(f, 1.0)
        + 0.25 * params.delta.powi(2) * hdot_sq(f, 2.0)
}

/// `𝓔 = ‖F‖²_{Ḣ¹} + 2Υ‖F‖²_{Ḣ^{3/2}} + Υ²‖F‖²_{Ḣ²} + δ²/4 ‖F‖²_{Ḣ³}`.
pub fn energy_cal_e(f: &SpectralField, params: &ModelParams) -> f64 {
    let u = params.upsilon;
    hdot_sq(f, 1.0) + 2.0 * u * hdot_sq(f, 1.5) + u * u * hdot_sq(f, 2.0)
        + 0.25 * params.delta.powi(2) * hdot_sq(f, 3.0)
}

/// Recorded states and diagnostics of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub series: ReportSeries,
}

impl Trajectory {
    pub fn new(kind: SeriesKind) -> Self {
        Self { times: Vec::new(), states: Vec::new(), series: ReportSeries::new(kind) }
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn final_state(&self) -> Option<&SpectralField> {
        self.states.last()
    }
}

pub(crate) fn blow_up_check(f: &SpectralField, last_good_time: f64) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::BlowUp { last_good_time, reason: "nonfinite coefficient".into() });
    }
    let linf = f.linf();
    if linf > BLOWUP_LINF {
        return Err(Error::BlowUp { last_good_time, reason: format!("sup norm {linf:e} exceeds {BLOWUP_LINF:e}") });
    }
    Ok(())
}

/// Runs to `t_end`, returning whatever was recorded plus the error that
/// stopped the run early, if any.
pub fn run_partial(config: &UniConfig, f0: &SpectralField) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::new(SeriesKind::Uni);
    let result = (|| {
        let stepper = UniStepper::new(config)?;
        stepper.check_input(f0)?;
        let steps = config.steps()?;
        let mut f = f0.clone();
        traj.times.push(0.0);
        traj.series.reports.push(stepper.report(0.0, &f));
        traj.states.push(f.clone());
        let mut last_good = 0.0;
        for n in 1..=steps {
            f = stepper.step(&f).map_err(|e| match e {
                Error::BlowUp { reason, .. } => Error::BlowUp { last_good_time: last_good, reason },
                other => other,
            })?;
            blow_up_check(&f, last_good)?;
            let t = n as f64 * config.dt;
            last_good = t;
            if n % config.output_every == 0 || n == steps {
                traj.times.push(t);
                traj.series.reports.push(stepper.report(t, &f));
                traj.states.push(f.clone());
            }
        }
        Ok(())
    })();
    (traj, result.err())
}

/// Runs to `t_end`; blow-up and invalid input are errors.
pub fn run(config: &UniConfig, f0: &SpectralField) -> Result<Trajectory> {
    match run_partial(config, f0) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Least-squares decay fit `E(τ) ≈ C e^{−cτ}` over the tail half.
pub fn decay_rate_fit(traj: &Trajectory) -> Result<ExpFit> {
    decay_fit(&traj.series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(model: UniModel, nonlinear: bool) -> UniConfig {
        UniConfig {
            model,
            params: ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap(),
            grid: TorusGrid::one_d(64).unwrap(),
            dt: 0.01,
            t_end: 0.1,
            output_every: 1,
            nonlinear,
        }
    }

    #[test]
    fn phi_functions_match_limits_and_direct_values() {
        let h = 1.0;
        let zero = etd_coefficients(Complex64::new(0.0, 0.0), h);
        let expect = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for (c, e) in zero.iter().zip(expect) {
            assert!((c - e).norm() < 1e-14);
        }
        // continuity across the switch radius
        let a = etd_coefficients(Complex64::new(-0.4999, 0.0), h);
        let b = etd_coefficients(Complex64::new(-0.5001, 0.0), h);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() < 1e-4);
        }
    }

    #[test]
    fn energy_of_cosine() {
        let g = TorusGrid::one_d(32).unwrap();
        let f = SpectralField::from_fn(&g, |[x, _]| x.cos());
        let p = ModelParams::new(1.0, 2.0, 0.0, 1.0).unwrap();
        assert!((energy_e(&f, &p) - 2.5).abs() < 1e-14);
        assert_eq!(energy_e(&SpectralField::zeros(&g), &p), 0.0);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        for model in [UniModel::One, UniModel::Two] {
            let c = config(model, true);
            let z = SpectralField::zeros(&c.grid);
            assert_eq!(rhs_uni(&z, &c).unwrap().norm_l2(), 0.0);
            assert_eq!(step(&z, &c).unwrap().norm_l2(), 0.0);
        }
    }

    #[test]
    fn rejects_nonzero_mean() {
        let c = config(UniModel::One, true);
        let f = SpectralField::from_fn(&c.grid, |[x, _]| 1.0 + x.cos());
        assert!(matches!(rhs_uni(&f, &c), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn config_validation() {
        let mut c = config(UniModel::One, true);
        c.dt = 0.03;
        assert!(c.validate().is_err());
        c.dt = 0.01;
        c.params.eps = 0.0;
        assert!(c.validate().is_err());
        let mut c = config(UniModel::Two, true);
        c.grid = TorusGrid::two_d(16).unwrap();
        assert!(c.validate().is_err());
    }
}
