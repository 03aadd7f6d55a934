//! The two bidirectional models as first-order systems in `(f, v = f_t)` on
//! the 2D torus.
//!
//! Model 1 keeps the acceleration inside the coupling:
//! `(I+ΥΛ)U + ℕ(εf, U) = −δΛ³v − (Λ + β/4Λ⁵)f + ε𝒬(v)`, `v_t = U`, solved by
//! fixed-point iteration at every evaluation. Model 2 is explicit:
//! `v_t = (I+ΥΛ)^{-1}(−δΛ³v − (Λ + β/4Λ⁵)f + ε𝔑[f, v])`.
//!
//! Time stepping is Strang splitting: exact per-mode linear half steps around
//! an explicit midpoint step of the nonlinear remainder with `f` frozen.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{loglog_slope, EnergyReport, ReportSeries, SeriesKind};
use crate::error::{Error, Result};
use crate::linear::{BiPropagator, ModelParams, UniModel};
use crate::nonlinear::{bi2_weight, quadratic_q, Coupling};
use crate::spectral::{hdot_sq, MultiplierSymbol, SpectralField, TorusGrid};
use crate::uni::{blow_up_check, steps_for, UniConfig, UniStepper};

/// Which bidirectional model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiModel {
    #[serde(rename = "bi1")]
    One,
    #[serde(rename = "bi2")]
    Two,
}

impl BiModel {
    /// The unidirectional model derived from this one.
    pub fn reduction(self) -> UniModel {
        match self {
            Self::One => UniModel::One,
            Self::Two => UniModel::Two,
        }
    }
}

/// Displacement and velocity, both mean-zero on the same 2D grid.
#[derive(Clone, Debug)]
pub struct BiState {
    pub f: SpectralField,
    pub v: SpectralField,
}

impl BiState {
    pub fn new(f: SpectralField, v: SpectralField) -> Result<Self> {
        let s = Self { f, v };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self { f: SpectralField::zeros(grid), v: SpectralField::zeros(grid) }
    }

    pub fn validate(&self) -> Result<()> {
        self.f.require_dim(2)?;
        self.f.check_same_grid(&self.v)?;
        self.f.require_mean_zero()?;
        self.v.require_mean_zero()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.f.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && self.v.is_finite()
    }

    /// `√(‖f − g‖² + ‖v − w‖²)`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.f.distance(&other.f).powi(2) + self.v.distance(&other.v).powi(2)).sqrt()
    }
}

/// Outcome of the fixed-point solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticSolveReport {
    pub iterations: usize,
    /// `‖(I+ΥΛ)U + ℕ(f, U) − rhs‖_{L²}` of the returned `U`.
    pub final_residual: f64,
    /// Last reliable ratio `‖U_{n+1} − U_n‖ / ‖U_n − U_{n−1}‖` (0 when the
    /// iteration converged before a ratio could be measured).
    pub contraction_estimate: f64,
}

/// Fixed-point settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Apply `J_ν` around the coupling, `U ↦ R(rhs − J_ν ℕ(f, J_ν U))`.
    pub mollifier: Option<f64>,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 100, mollifier: None }
    }
}

/// Iteration count after which a factor ≥ 1 is treated as divergence.
const NONCONTRACTION_RUN: usize = 3;

/// Solves `(I+ΥΛ)U + ℕ(f, U) = rhs` with `U₀ = 0`, `U_{n+1} = (I+ΥΛ)^{-1}(rhs − ℕ(f, U_n))`.
pub fn elliptic_solve_u(
    f: &SpectralField,
    rhs: &SpectralField,
    params: &ModelParams,
    tol: f64,
    max_iter: usize,
) -> Result<(SpectralField, EllipticSolveReport)> {
    elliptic_solve_with(f, rhs, params, &EllipticOptions { tol, max_iter, ..Default::default() })
}

pub fn elliptic_solve_with(
    f: &SpectralField,
    rhs: &SpectralField,
    params: &ModelParams,
    opts: &EllipticOptions,
) -> Result<(SpectralField, EllipticSolveReport)> {
    f.check_same_grid(rhs)?;
    f.require_mean_zero()?;
    rhs.require_mean_zero()?;
    params.validate()?;
    EllipticSolver::new(f, params, opts)?.solve(rhs)
}

/// Fixed-point solver with `f` fixed; reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct EllipticSolver {
    coupling: Coupling,
    resolvent: MultiplierSymbol,
    inertia: MultiplierSymbol,
    mollifier: Option<MultiplierSymbol>,
    opts: EllipticOptions,
}

impl EllipticSolver {
    pub fn new(f: &SpectralField, params: &ModelParams, opts: &EllipticOptions) -> Result<Self> {
        if !(opts.tol > 0.0) || opts.max_iter == 0 {
            return Err(Error::InvalidParameter("elliptic solve needs tol > 0 and max_iter >= 1".into()));
        }
        let grid = f.grid();
        let mollifier = match opts.mollifier {
            Some(nu) if !(nu >= 0.0) => {
                return Err(Error::InvalidParameter(format!("mollifier scale must be >= 0, got {nu}")))
            }
            Some(nu) => Some(MultiplierSymbol::mollifier(grid, nu)),
            None => None,
        };
        Ok(Self {
            coupling: Coupling::new(f)?,
            resolvent: MultiplierSymbol::resolvent(grid, params.upsilon),
            inertia: MultiplierSymbol::real(grid, |_, a| params.inertia(a)),
            mollifier,
            opts: *opts,
        })
    }

    fn coupled(&self, u: &SpectralField) -> Result<SpectralField> {
        match &self.mollifier {
            None => self.coupling.apply(u),
            Some(j) => Ok(j.apply(&self.coupling.apply(&j.apply(u))?)),
        }
    }

    pub fn solve(&self, rhs: &SpectralField) -> Result<(SpectralField, EllipticSolveReport)> {
        let mut u = SpectralField::zeros(rhs.grid());
        let mut prev_diff: Option<f64> = None;
        let mut estimate = 0.0;
        let mut run = 0;
        for n in 0..=self.opts.max_iter {
            let next = self.resolvent.apply(&(rhs - &self.coupled(&u)?));
            let diff = &u - &next;
            let residual = self.inertia.apply(&diff).norm_l2();
            if !residual.is_finite() {
                return Err(Error::NonContraction { iteration: n, factor: f64::INFINITY });
            }
            if residual <= self.opts.tol {
                let report = EllipticSolveReport { iterations: n, final_residual: residual, contraction_estimate: estimate };
                return Ok((u, report));
            }
            if n == self.opts.max_iter {
                return Err(Error::MaxIterations { iterations: n, residual });
            }
            let d = diff.norm_l2();
            // differences at roundoff level carry no contraction information
            let floor = 1e3 * f64::EPSILON * next.norm_l2();
            if let Some(p) = prev_diff.filter(|&p| p > floor && d > floor) {
                let factor = d / p;
                estimate = factor;
                run = if factor >= 1.0 { run + 1 } else { 0 };
                if run >= NONCONTRACTION_RUN {
                    return Err(Error::NonContraction { iteration: n, factor });
                }
            }
            prev_diff = Some(d);
            u = next;
        }
        unreachable!("loop returns by max_iter")
    }
}

/// Time derivatives of a state plus the elliptic report (model 1 only).
#[derive(Clone, Debug)]
pub struct BiRhs {
    pub f_dot: SpectralField,
    pub v_dot: SpectralField,
    pub elliptic: Option<EllipticSolveReport>,
}

/// Precomputed symbols for one grid and parameter set.
#[derive(Clone, Debug)]
pub struct BiSystem {
    pub model: BiModel,
    pub params: ModelParams,
    pub elliptic: EllipticOptions,
    grid: TorusGrid,
    resolvent: MultiplierSymbol,
    // −δΛ³ and −(Λ + β/4 Λ⁵)
    damp: MultiplierSymbol,
    restore: MultiplierSymbol,
}

impl BiSystem {
    pub fn new(grid: &TorusGrid, params: &ModelParams, model: BiModel) -> Result<Self> {
        params.validate()?;
        if grid.dim() != 2 {
            return Err(Error::Dimension { expected: 2, got: grid.dim() });
        }
        Ok(Self {
            model,
            params: *params,
            elliptic: EllipticOptions::default(),
            grid: grid.clone(),
            resolvent: MultiplierSymbol::resolvent(grid, params.upsilon),
            damp: MultiplierSymbol::real(grid, |_, a| -params.damping(a)),
            restore: MultiplierSymbol::real(grid, |_, a| -params.stiffness(a)),
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn linear_force(&self, s: &BiState) -> SpectralField {
        &self.damp.apply(&s.v) + &self.restore.apply(&s.f)
    }

    /// `v_t` of the linear part, `(I+ΥΛ)^{-1}(−δΛ³v − (Λ + β/4Λ⁵)f)`.
    pub fn linear_accel(&self, s: &BiState) -> SpectralField {
        self.resolvent.apply(&self.linear_force(s))
    }

    pub fn rhs(&self, s: &BiState) -> Result<BiRhs> {
        if s.grid() != &self.grid {
            return Err(Error::GridMismatch(self.grid.to_string(), s.grid().to_string()));
        }
        let eps = self.params.eps;
        let force = self.linear_force(s);
        let (v_dot, elliptic) = match self.model {
            BiModel::One => {
                let rhs = if eps == 0.0 { force } else { force.axpy(eps, &quadratic_q(&s.v)?) };
                let solver = EllipticSolver::new(&s.f.scale(eps), &self.params, &self.elliptic)?;
                let (u, report) = solver.solve(&rhs)?;
                (u, Some(report))
            }
            BiModel::Two => {
                let total = if eps == 0.0 {
                    force
                } else {
                    let w = bi2_weight(&s.f, &s.v, &self.params);
                    let forcing = &quadratic_q(&s.v)? + &Coupling::new(&s.f)?.apply(&w)?;
                    force.axpy(eps, &forcing)
                };
                (self.resolvent.apply(&total), None)
            }
        };
        Ok(BiRhs { f_dot: s.v.clone(), v_dot, elliptic })
    }

    /// Nonlinear remainder of `v_t`: full minus linear acceleration.
    fn remainder(&self, s: &BiState) -> Result<(SpectralField, Option<EllipticSolveReport>)> {
        let r = self.rhs(s)?;
        Ok((&r.v_dot - &self.linear_accel(s), r.elliptic))
    }

    /// `½(‖v‖²_{Ḣ^{1/2}} + Υ‖v‖²_{Ḣ¹} + ‖f‖²_{Ḣ¹} + β/4‖f‖²_{Ḣ³})` without the ½:
    /// the quantity obtained by testing the equation against `Λv`.
    pub fn energy(&self, s: &BiState) -> f64 {
        hdot_sq(&s.v, 0.5) + self.params.upsilon * hdot_sq(&s.v, 1.0) + hdot_sq(&s.f, 1.0)
            + 0.25 * self.params.beta * hdot_sq(&s.f, 3.0)
    }

    /// The same energy obtained by testing against `v`.
    pub fn cal_energy(&self, s: &BiState) -> f64 {
        hdot_sq(&s.v, 0.0) + self.params.upsilon * hdot_sq(&s.v, 0.5) + hdot_sq(&s.f, 0.5)
            + 0.25 * self.params.beta * hdot_sq(&s.f, 2.5)
    }

    pub fn report(&self, time: f64, s: &BiState, elliptic: Option<EllipticSolveReport>) -> EnergyReport {
        let mut r = EnergyReport::of_field(time, &s.f, self.energy(s), self.cal_energy(s));
        let (it, c) = elliptic.map_or((0.0, 0.0), |e| (e.iterations as f64, e.contraction_estimate));
        r.extras = vec![it, c];
        r
    }
}

/// Strang-split stepper with a fixed step.
#[derive(Clone, Debug)]
pub struct BiStepper {
    system: BiSystem,
    half: BiPropagator,
    dt: f64,
    nonlinear: bool,
}

impl BiStepper {
    pub fn new(system: BiSystem, dt: f64, nonlinear: bool) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let half = BiPropagator::new(system.grid(), 0.5 * dt, &system.params);
        Ok(Self { system, half, dt, nonlinear })
    }

    pub fn system(&self) -> &BiSystem {
        &self.system
    }

    fn linear_half(&self, s: &BiState) -> BiState {
        let (f, v) = self.half.apply(&s.f, &s.v);
        BiState { f, v }
    }

    /// One step; returns the last elliptic report of the step (model 1).
    pub fn step(&self, s: &BiState) -> Result<(BiState, Option<EllipticSolveReport>)> {
        let mut state = self.linear_half(s);
        let mut report = None;
        if self.nonlinear && self.system.params.eps != 0.0 {
            let (n0, _) = self.system.remainder(&state)?;
            let mid = BiState { f: state.f.clone(), v: state.v.axpy(0.5 * self.dt, &n0) };
            let (n1, r) = self.system.remainder(&mid)?;
            report = r;
            state.v = state.v.axpy(self.dt, &n1);
        }
        let out = self.linear_half(&state);
        if !out.is_finite() {
            return Err(Error::BlowUp { last_good_time: f64::NAN, reason: "nonfinite coefficient".into() });
        }
        Ok((out, report))
    }
}

/// Time derivatives `(f_t, v_t)` of a state.
pub fn rhs_bi(state: &BiState, params: &ModelParams, model: BiModel) -> Result<BiRhs> {
    state.validate()?;
    BiSystem::new(state.grid(), params, model)?.rhs(state)
}

/// One Strang step of size `dt`.
pub fn step_bi(state: &BiState, params: &ModelParams, dt: f64, model: BiModel) -> Result<BiState> {
    state.validate()?;
    let stepper = BiStepper::new(BiSystem::new(state.grid(), params, model)?, dt, true)?;
    Ok(stepper.step(state)?.0)
}

#[derive(Clone, Debug)]
pub struct BiConfig {
    pub model: BiModel,
    pub params: ModelParams,
    pub grid: TorusGrid,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub nonlinear: bool,
    pub elliptic: EllipticOptions,
}

impl BiConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.dim() != 2 {
            return Err(Error::Dimension { expected: 2, got: self.grid.dim() });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidParameter("output_every must be >= 1".into()));
        }
        steps_for(self.t_end, self.dt).map(|_| ())
    }

    pub fn stepper(&self) -> Result<BiStepper> {
        self.validate()?;
        let mut system = BiSystem::new(&self.grid, &self.params, self.model)?;
        system.elliptic = self.elliptic;
        BiStepper::new(system, self.dt, self.nonlinear)
    }
}

#[derive(Clone, Debug)]
pub struct BiTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<BiState>,
    pub series: ReportSeries,
}

pub fn run_bi_partial(config: &BiConfig, s0: &BiState) -> (BiTrajectory, Option<Error>) {
    let mut traj = BiTrajectory { times: Vec::new(), states: Vec::new(), series: ReportSeries::new(SeriesKind::Bi) };
    let result = (|| {
        s0.validate()?;
        let stepper = config.stepper()?;
        let steps = steps_for(config.t_end, config.dt)?;
        let mut s = s0.clone();
        traj.times.push(0.0);
        traj.series.reports.push(stepper.system().report(0.0, &s, None));
        traj.states.push(s.clone());
        let mut last_good = 0.0;
        for n in 1..=steps {
            let (next, rep) = stepper.step(&s).map_err(|e| match e {
                Error::BlowUp { reason, .. } => Error::BlowUp { last_good_time: last_good, reason },
                other => other,
            })?;
            blow_up_check(&next.f, last_good)?;
            s = next;
            let t = n as f64 * config.dt;
            last_good = t;
            if n % config.output_every == 0 || n == steps {
                traj.times.push(t);
                traj.series.reports.push(stepper.system().report(t, &s, rep));
                traj.states.push(s.clone());
            }
        }
        Ok(())
    })();
    (traj, result.err())
}

pub fn run_bi(config: &BiConfig, s0: &BiState) -> Result<BiTrajectory> {
    match run_bi_partial(config, s0) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Copies a 1D field onto the `k₂ = 0` line of a 2D grid (constant in `x₂`).
pub fn embed_x1(field: &SpectralField, grid: &TorusGrid) -> Result<SpectralField> {
    field.require_dim(1)?;
    if grid.dim() != 2 || grid.n() != field.grid().n() {
        return Err(Error::InvalidParameter(format!("cannot embed {} into {grid}", field.grid())));
    }
    Ok(SpectralField::from_modes(grid, |[k1, k2]| if k2 == 0 { field.coeff([k1, 0]) } else { Complex64::new(0.0, 0.0) }))
}

/// The `k₂ = 0` line of a 2D field as a 1D field (its `x₂`-average).
pub fn restrict_x1(field: &SpectralField) -> Result<SpectralField> {
    field.require_dim(2)?;
    let g1 = TorusGrid::one_d(field.grid().n())?;
    Ok(SpectralField::from_modes(&g1, |[k1, _]| field.coeff([k1, 0])))
}

/// Settings of the model-hierarchy comparison.
#[derive(Clone, Debug)]
pub struct HierarchySettings {
    pub model: BiModel,
    pub params: ModelParams,
    /// Modes per dimension.
    pub n: usize,
    /// Slow-time horizon: the comparison runs over `t ≤ horizon / ε`.
    pub horizon: f64,
    /// Bidirectional step as a multiple of `ε`; the unidirectional slow step is `ε` times it.
    pub dt_over_eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub eps: f64,
    pub error: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyTable {
    pub rows: Vec<HierarchyRow>,
    /// Log-log slope of error vs ε.
    pub slope: Option<f64>,
}

/// For each ε, runs the bidirectional model from `(f₀, −∂_x f₀)` (constant in
/// `x₂`) and the reduced unidirectional model from `F₀ = f₀`, and records
/// `sup_{t ≤ T/ε} ‖f(·,t) − F(·−t, εt)‖_{L²}`.
pub fn compare_uni_bi(eps_list: &[f64], f0: &SpectralField, settings: &HierarchySettings) -> Result<HierarchyTable> {
    f0.require_dim(1)?;
    f0.require_mean_zero()?;
    if f0.grid().n() != settings.n {
        return Err(Error::InvalidParameter(format!("profile lives on {}, expected n = {}", f0.grid(), settings.n)));
    }
    let g2 = TorusGrid::two_d(settings.n)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
        }
        let params = settings.params.with_eps(eps);
        let dt = settings.dt_over_eps * eps;
        let t_end = settings.horizon / eps;
        let steps = steps_for(t_end, dt)?;

        let bi = BiConfig {
            model: settings.model,
            params,
            grid: g2.clone(),
            dt,
            t_end,
            output_every: 1,
            nonlinear: true,
            elliptic: EllipticOptions::default(),
        }
        .stepper()?;
        let uni = UniStepper::new(&UniConfig {
            model: settings.model.reduction(),
            params,
            grid: f0.grid().clone(),
            dt: eps * dt,
            t_end: settings.horizon,
            output_every: 1,
            nonlinear: true,
        })?;

        let f2 = embed_x1(f0, &g2)?;
        let v2 = -MultiplierSymbol::derivative(&g2, 0, 1).apply(&f2);
        let mut s = BiState::new(f2, v2)?;
        let mut big_f = f0.clone();
        let mut err: f64 = 0.0;
        for n in 1..=steps {
            s = bi.step(&s)?.0;
            big_f = uni.step(&big_f)?;
            let t = n as f64 * dt;
            let shifted = big_f.map_modes(|[k, _], _, c| c * Complex64::from_polar(1.0, -(k as f64) * t));
            err = err.max(restrict_x1(&s.f)?.distance(&shifted));
        }
        rows.push(HierarchyRow { eps, error: err, steps });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let slope = if rows.len() >= 2 { loglog_slope(&eps, &errs).ok() } else { None };
    Ok(HierarchyTable { rows, slope })
}
