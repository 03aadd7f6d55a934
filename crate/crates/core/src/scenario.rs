//! Configuration-driven runs: TOML configs, named presets, sweeps and the
//! artifacts each run leaves on disk.
//!
//! A run directory holds `config.toml` (the fully resolved config),
//! `diagnostics.csv`, `.hws` snapshots and `summary.txt` (`key = value` lines).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bi::{run_bi_partial, BiConfig, BiModel, BiState, BiTrajectory, EllipticOptions};
use crate::diagnostics::{decay_fit, write_csv, write_table, ReportSeries};
use crate::error::{Error, Result};
use crate::geometry::{biharmonic_reduction_slope, biharmonic_residual, gauss_bonnet_integral, write_curvature_csv, SurfaceField};
use crate::init::{cosine_mode, random_field};
use crate::linear::{dispersion_table, ModelParams, UniModel};
use crate::spectral::{write_snapshot, MultiplierSymbol, SpectralField, TorusGrid};
use crate::uni::{run_partial, steps_for, Trajectory, UniConfig};

/// Environment variable naming the directory under which run directories are created.
pub const OUTPUT_ROOT_ENV: &str = "HYDROWAVE_OUTPUT_ROOT";
const DEFAULT_OUTPUT_ROOT: &str = "hydrowave-output";

/// `explicit`, else `$HYDROWAVE_OUTPUT_ROOT`, else `./hydrowave-output`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUTPUT_ROOT),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "uni1")]
    Uni1,
    #[serde(rename = "uni2")]
    Uni2,
    #[serde(rename = "bi1")]
    Bi1,
    #[serde(rename = "bi2")]
    Bi2,
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "geometry-check")]
    GeometryCheck,
}

impl ModelKind {
    pub const ALL: [Self; 6] = [Self::Uni1, Self::Uni2, Self::Bi1, Self::Bi2, Self::Linear, Self::GeometryCheck];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uni1 => "uni1",
            Self::Uni2 => "uni2",
            Self::Bi1 => "bi1",
            Self::Bi2 => "bi2",
            Self::Linear => "linear",
            Self::GeometryCheck => "geometry-check",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Uni1 | Self::Uni2 => 1,
            _ => 2,
        }
    }

    fn uni(self) -> Option<UniModel> {
        match self {
            Self::Uni1 => Some(UniModel::One),
            Self::Uni2 => Some(UniModel::Two),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub model: ModelKind,
    /// Run directory below the output root; defaults to the model name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Modes per dimension; the dimension follows from the model.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub nonlinear: bool,
    /// Write a snapshot every this many recorded outputs; 0 keeps only the first and last.
    pub snapshot_every: usize,
    pub elliptic_tol: f64,
    pub elliptic_max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mollifier: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let e = EllipticOptions::default();
        Self {
            dt: 0.01,
            t_end: 1.0,
            output_every: 1,
            nonlinear: true,
            snapshot_every: 0,
            elliptic_tol: e.tol,
            elliptic_max_iter: e.max_iter,
            mollifier: None,
        }
    }
}

/// Initial velocity of the bidirectional models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Velocity {
    #[default]
    #[serde(rename = "zero")]
    Zero,
    /// `v = −∂₁f`, a right-moving wave to leading order.
    #[serde(rename = "one-way")]
    OneWay,
    /// Independent random field with the displacement's band and norm.
    #[serde(rename = "random")]
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", deny_unknown_fields)]
pub enum InitialSpec {
    #[serde(rename = "random")]
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_band")]
        band: usize,
        #[serde(default = "default_norm")]
        norm: f64,
        /// Sobolev index of the norm the field is scaled to.
        #[serde(default)]
        sobolev: f64,
        #[serde(default)]
        homogeneous: bool,
        #[serde(default)]
        velocity: Velocity,
    },
    /// `amplitude · cos(k₁x₁ + k₂x₂)`.
    #[serde(rename = "mode")]
    Mode {
        amplitude: f64,
        #[serde(default = "one")]
        k1: i64,
        #[serde(default)]
        k2: i64,
        #[serde(default)]
        velocity: Velocity,
    },
    /// `amplitude · (cos x₁ + ½cos(x₁ + x₂))`.
    #[serde(rename = "surface")]
    Surface {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        velocity: Velocity,
    },
}

fn default_band() -> usize {
    4
}
fn default_norm() -> f64 {
    0.01
}
fn one() -> i64 {
    1
}
fn unit() -> f64 {
    1.0
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Random { seed: 0, band: default_band(), norm: default_norm(), sobolev: 0.0, homogeneous: false, velocity: Velocity::Zero }
    }
}

impl InitialSpec {
    fn velocity(&self) -> Velocity {
        match self {
            Self::Random { velocity, .. } | Self::Mode { velocity, .. } | Self::Surface { velocity, .. } => *velocity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// Steepness values of the biharmonic-reduction fit, strictly decreasing.
    pub eps_list: Vec<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { eps_list: vec![0.1, 0.05, 0.025] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub params: ModelParams,
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub geometry: GeometrySection,
}

// a validation failure before it is anchored to a line of the source text
struct Issue {
    section: &'static str,
    key: &'static str,
    message: String,
}

fn issue(section: &'static str, key: &'static str, message: impl Into<String>) -> Issue {
    Issue { section, key, message: message.into() }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_matches(line: &str, key: &str) -> bool {
    line.trim_start().strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
}

// line of `key = …` inside `[section]`, else the section header, else 1
fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section && key_matches(t, key) {
            return i + 1;
        }
    }
    header.unwrap_or(1)
}

impl Issue {
    fn anchor(self, text: &str) -> Error {
        Error::Config {
            line: locate(text, self.section, self.key),
            message: format!("{}.{}: {}", self.section, self.key, self.message),
        }
    }
}

fn positive(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Issue> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(issue(section, key, format!("must be > 0, got {v}")))
    }
}

fn nonnegative(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Issue> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(issue(section, key, format!("must be >= 0, got {v}")))
    }
}

/// Parses and validates a config; errors carry the offending line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let mut line = e.span().map_or(1, |s| line_of(text, s.start));
        if let (Some(span), Some(name)) = (e.span(), e.message().strip_prefix("unknown field `").and_then(|r| r.split('`').next())) {
            let start = line_of(text, span.start);
            if let Some(off) = text.lines().skip(start - 1).take(line_of(text, span.end) - start + 1).position(|l| key_matches(l, name)) {
                line = start + off;
            }
        }
        Error::Config { line, message: e.message().trim().to_string() }
    })?;
    config.validate_inner().map_err(|i| i.anchor(text))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?)
}

impl RunConfig {
    /// Validates a config built in code; line numbers refer to [`RunConfig::to_toml`].
    pub fn validate(&self) -> Result<()> {
        self.validate_inner().map_err(|i| i.anchor(&self.to_toml()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn name(&self) -> String {
        self.run.name.clone().unwrap_or_else(|| self.run.model.name().to_string())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.run.model.dim(), self.grid.n)
    }

    fn validate_inner(&self) -> std::result::Result<(), Issue> {
        let model = self.run.model;
        if let Some(name) = &self.run.name {
            let p = Path::new(name);
            if name.is_empty() || p.is_absolute() || p.components().any(|c| !matches!(c, std::path::Component::Normal(_))) {
                return Err(issue("run", "name", format!("{name:?} must be a relative path without '..'")));
            }
        }
        let grid = TorusGrid::new(model.dim(), self.grid.n).map_err(|e| issue("grid", "n", e.to_string()))?;

        let p = &self.params;
        positive("params", "upsilon", p.upsilon)?;
        nonnegative("params", "delta", p.delta)?;
        nonnegative("params", "beta", p.beta)?;
        nonnegative("params", "eps", p.eps)?;
        if model.uni().is_some() && p.eps == 0.0 {
            return Err(issue("params", "eps", "unidirectional models need eps > 0"));
        }

        let it = &self.integrator;
        if model != ModelKind::GeometryCheck {
            positive("integrator", "dt", it.dt)?;
            nonnegative("integrator", "t_end", it.t_end)?;
            steps_for(it.t_end, it.dt).map_err(|e| issue("integrator", "t_end", e.to_string()))?;
            if it.output_every == 0 {
                return Err(issue("integrator", "output_every", "must be >= 1"));
            }
            positive("integrator", "elliptic_tol", it.elliptic_tol)?;
            if it.elliptic_max_iter == 0 {
                return Err(issue("integrator", "elliptic_max_iter", "must be >= 1"));
            }
            if let Some(nu) = it.mollifier {
                nonnegative("integrator", "mollifier", nu)?;
            }
        }

        let half = grid.n() / 2;
        match &self.initial {
            InitialSpec::Random { band, norm, sobolev, .. } => {
                if *band == 0 || *band >= half {
                    return Err(issue("initial", "band", format!("must lie in 1..{half}, got {band}")));
                }
                nonnegative("initial", "norm", *norm)?;
                if !sobolev.is_finite() {
                    return Err(issue("initial", "sobolev", "must be finite"));
                }
            }
            InitialSpec::Mode { amplitude, k1, k2, .. } => {
                if !amplitude.is_finite() {
                    return Err(issue("initial", "amplitude", "must be finite"));
                }
                if *k1 == 0 && *k2 == 0 {
                    return Err(issue("initial", "k1", "the mode must be nonzero (fields are mean-zero)"));
                }
                if k1.abs() > grid.cutoff() {
                    return Err(issue("initial", "k1", format!("|k1| must be <= {}", grid.cutoff())));
                }
                if k2.abs() > grid.cutoff() || (model.dim() == 1 && *k2 != 0) {
                    return Err(issue("initial", "k2", format!("|k2| must be <= {} (0 in 1D)", grid.cutoff())));
                }
            }
            InitialSpec::Surface { amplitude, .. } => {
                if model.dim() != 2 {
                    return Err(issue("initial", "profile", "the surface profile needs a 2D model"));
                }
                if !amplitude.is_finite() {
                    return Err(issue("initial", "amplitude", "must be finite"));
                }
            }
        }
        if self.initial.velocity() != Velocity::Zero && !matches!(model, ModelKind::Bi1 | ModelKind::Bi2 | ModelKind::Linear) {
            return Err(issue("initial", "velocity", format!("{model} has no velocity field")));
        }

        if model == ModelKind::GeometryCheck {
            let eps = &self.geometry.eps_list;
            if eps.len() < 3 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|&e| !(e >= 0.0)) {
                return Err(issue("geometry", "eps_list", "needs at least 3 strictly decreasing values >= 0"));
            }
        }
        Ok(())
    }

    fn initial_field(&self, grid: &TorusGrid) -> Result<SpectralField> {
        match self.initial {
            InitialSpec::Random { seed, band, norm, sobolev, homogeneous, .. } => {
                random_field(grid, seed, band, sobolev, norm, homogeneous)
            }
            InitialSpec::Mode { amplitude, k1, k2, .. } => Ok(cosine_mode(grid, [k1, k2], amplitude)),
            InitialSpec::Surface { amplitude, .. } => Ok(surface_profile(grid, amplitude)),
        }
    }

    fn initial_velocity(&self, f: &SpectralField) -> Result<SpectralField> {
        let grid = f.grid();
        Ok(match (self.initial.velocity(), &self.initial) {
            (Velocity::Zero, _) => SpectralField::zeros(grid),
            (Velocity::OneWay, _) => -MultiplierSymbol::derivative(grid, 0, 1).apply(f),
            (Velocity::Random, &InitialSpec::Random { seed, band, norm, sobolev, homogeneous, .. }) => {
                random_field(grid, seed.wrapping_add(1), band, sobolev, norm, homogeneous)?
            }
            (Velocity::Random, _) => random_field(grid, 1, 4.min(grid.n() / 2 - 1), 0.0, f.norm_l2(), false)?,
        })
    }
}

/// `amplitude · (cos x₁ + ½cos(x₁ + x₂))` on a 2D grid.
pub fn surface_profile(grid: &TorusGrid, amplitude: f64) -> SpectralField {
    &cosine_mode(grid, [1, 0], amplitude) + &cosine_mode(grid, [1, 1], 0.5 * amplitude)
}

/// Named scenarios shipped with the crate.
pub const PRESETS: [(&str, &str); 7] = [
    ("decay-small-uni1", include_str!("../presets/decay-small-uni1.toml")),
    ("bounded-small-uni2", include_str!("../presets/bounded-small-uni2.toml")),
    ("dispersion-table", include_str!("../presets/dispersion-table.toml")),
    ("oscillation-bi2", include_str!("../presets/oscillation-bi2.toml")),
    ("doubly-nonlinear-bi1", include_str!("../presets/doubly-nonlinear-bi1.toml")),
    ("hierarchy-bi1", include_str!("../presets/hierarchy-bi1.toml")),
    ("surface-geometry", include_str!("../presets/surface-geometry.toml")),
];

pub fn preset(name: &str) -> Result<RunConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        Error::InvalidParameter(format!("unknown preset {name:?} (available: {})", names.join(", ")))
    })?;
    parse_config(text)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The solution or the fixed-point solve failed mid-run; outputs up to the
    /// last good time were written.
    Failed { last_good_time: f64, reason: String },
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub summary: Vec<(String, String)>,
}

impl RunOutcome {
    /// 0 on success, 1 on blow-up or solver failure.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Completed => 0,
            RunStatus::Failed { .. } => 1,
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

struct Summary(Vec<(String, String)>);

impl Summary {
    fn put(&mut self, key: &str, value: impl fmt::Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn num(&mut self, key: &str, v: f64) {
        let a = v.abs();
        let text = if a == 0.0 || (1e-3..1e6).contains(&a) || !a.is_finite() { v.to_string() } else { format!("{v:e}") };
        self.0.push((key.to_string(), text));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let text: String = self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        fs::write(dir.join("summary.txt"), text)?;
        Ok(())
    }
}

fn snapshot_indices(count: usize, every: usize) -> Vec<usize> {
    (0..count).filter(|&i| i == 0 || i + 1 == count || (every > 0 && i % every == 0)).collect()
}

fn failure_status(err: Option<Error>, last: f64) -> Result<RunStatus> {
    match err {
        None => Ok(RunStatus::Completed),
        Some(Error::BlowUp { last_good_time, reason }) => Ok(RunStatus::Failed { last_good_time, reason }),
        Some(e @ (Error::NonContraction { .. } | Error::MaxIterations { .. })) => {
            Ok(RunStatus::Failed { last_good_time: last, reason: e.to_string() })
        }
        Some(e) => Err(e),
    }
}

fn series_summary(s: &mut Summary, series: &ReportSeries) {
    let e = series.energies();
    let cal: Vec<f64> = series.reports.iter().map(|r| r.cal_energy).collect();
    let ratio = |v: &[f64]| match v.first() {
        Some(&v0) if v0 > 0.0 => v.iter().fold(0.0f64, |m, &x| m.max(x / v0)),
        _ => f64::NAN,
    };
    s.put("recorded", series.reports.len());
    s.num("max_energy_ratio", ratio(&e));
    s.num("max_cal_energy_ratio", ratio(&cal));
    s.num("mean_drift", series.mean_drift());
}

/// Runs one scenario into `root/<name>`.
pub fn run_scenario(config: &RunConfig, root: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let dir = root.join(config.name());
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    let grid = config.grid()?;
    let mut s = Summary(Vec::new());
    s.put("model", config.run.model);
    let status = match config.run.model {
        ModelKind::Uni1 | ModelKind::Uni2 => run_uni_scenario(config, &grid, &dir, &mut s)?,
        ModelKind::Bi1 | ModelKind::Bi2 | ModelKind::Linear => run_bi_scenario(config, &grid, &dir, &mut s)?,
        ModelKind::GeometryCheck => run_geometry(config, &grid, &dir, &mut s)?,
    };
    match &status {
        RunStatus::Completed => s.put("status", "completed"),
        RunStatus::Failed { last_good_time, reason } => {
            s.put("status", "failed");
            s.num("last_good_time", *last_good_time);
            s.put("reason", reason);
        }
    }
    s.write(&dir)?;
    Ok(RunOutcome { status, dir, summary: s.0 })
}

fn run_uni_scenario(config: &RunConfig, grid: &TorusGrid, dir: &Path, s: &mut Summary) -> Result<RunStatus> {
    let it = &config.integrator;
    let uc = UniConfig {
        model: config.run.model.uni().expect("uni model"),
        params: config.params,
        grid: grid.clone(),
        dt: it.dt,
        t_end: it.t_end,
        output_every: it.output_every,
        nonlinear: it.nonlinear,
    };
    let f0 = config.initial_field(grid)?;
    let (traj, err): (Trajectory, _) = run_partial(&uc, &f0);
    let status = failure_status(err, traj.last_time())?;
    write_csv(&traj.series, &dir.join("diagnostics.csv"))?;
    for i in snapshot_indices(traj.states.len(), it.snapshot_every) {
        write_snapshot(&traj.states[i], &dir.join(format!("F_{i:06}.hws")))?;
    }
    s.num("final_time", traj.last_time());
    series_summary(s, &traj.series);
    if let Ok(fit) = decay_fit(&traj.series) {
        s.num("decay_rate", fit.rate);
        s.num("decay_fit_residual", fit.residual);
    }
    Ok(status)
}

fn run_bi_scenario(config: &RunConfig, grid: &TorusGrid, dir: &Path, s: &mut Summary) -> Result<RunStatus> {
    let it = &config.integrator;
    let linear = config.run.model == ModelKind::Linear;
    let bc = BiConfig {
        model: if config.run.model == ModelKind::Bi1 { BiModel::One } else { BiModel::Two },
        params: config.params,
        grid: grid.clone(),
        dt: it.dt,
        t_end: it.t_end,
        output_every: it.output_every,
        nonlinear: it.nonlinear && !linear,
        elliptic: EllipticOptions { tol: it.elliptic_tol, max_iter: it.elliptic_max_iter, mollifier: it.mollifier },
    };
    let f0 = config.initial_field(grid)?;
    let v0 = config.initial_velocity(&f0)?;
    let (traj, err): (BiTrajectory, _) = run_bi_partial(&bc, &BiState::new(f0, v0)?);
    let last = traj.times.last().copied().unwrap_or(0.0);
    let status = failure_status(err, last)?;
    write_csv(&traj.series, &dir.join("diagnostics.csv"))?;
    for i in snapshot_indices(traj.states.len(), it.snapshot_every) {
        write_snapshot(&traj.states[i].f, &dir.join(format!("f_{i:06}.hws")))?;
        write_snapshot(&traj.states[i].v, &dir.join(format!("v_{i:06}.hws")))?;
    }
    s.num("final_time", last);
    series_summary(s, &traj.series);
    if config.run.model == ModelKind::Bi1 {
        let iters = traj.series.reports.iter().filter_map(|r| r.extras.first()).fold(0.0f64, |m, &x| m.max(x));
        let factor = traj.series.reports.iter().filter_map(|r| r.extras.get(1)).fold(0.0f64, |m, &x| m.max(x));
        s.num("max_elliptic_iterations", iters);
        s.num("max_contraction_estimate", factor);
    }
    if linear {
        let rows = dispersion_table(grid.cutoff() as usize, &config.params);
        write_table(&rows, "dispersion", &dir.join("dispersion.csv"))?;
    }
    Ok(status)
}

#[derive(Serialize)]
struct ResidualRow {
    eps: f64,
    residual: f64,
}

fn run_geometry(config: &RunConfig, grid: &TorusGrid, dir: &Path, s: &mut Summary) -> Result<RunStatus> {
    let eta = config.initial_field(grid)?;
    let surface = SurfaceField::new(eta.clone(), config.params.eps)?;
    write_curvature_csv(&surface, &dir.join("curvature.csv"))?;
    s.num("gauss_bonnet", gauss_bonnet_integral(&surface));
    let eps = &config.geometry.eps_list;
    match biharmonic_reduction_slope(&eta, eps) {
        Ok(fit) => {
            let rows: Vec<ResidualRow> = fit.eps.iter().zip(&fit.residuals).map(|(&eps, &residual)| ResidualRow { eps, residual }).collect();
            write_table(&rows, "biharmonic", &dir.join("biharmonic.csv"))?;
            s.num("biharmonic_slope", fit.slope);
        }
        Err(Error::DegenerateFit(msg)) => {
            s.put("biharmonic_slope", "undefined");
            s.put("biharmonic_note", msg);
            s.num("biharmonic_residual_max", eps.iter().map(|&e| biharmonic_residual(&eta, e)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max));
        }
        Err(e) => return Err(e),
    }
    Ok(RunStatus::Completed)
}

/// Parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKey {
    Upsilon,
    Delta,
    Beta,
    Eps,
    Dt,
}

impl SweepKey {
    pub fn name(self) -> &'static str {
        match self {
            Self::Upsilon => "upsilon",
            Self::Delta => "delta",
            Self::Beta => "beta",
            Self::Eps => "eps",
            Self::Dt => "dt",
        }
    }

    fn apply(self, c: &mut RunConfig, v: f64) {
        match self {
            Self::Upsilon => c.params.upsilon = v,
            Self::Delta => c.params.delta = v,
            Self::Beta => c.params.beta = v,
            Self::Eps => c.params.eps = v,
            Self::Dt => c.integrator.dt = v,
        }
    }
}

impl FromStr for SweepKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Upsilon, Self::Delta, Self::Beta, Self::Eps, Self::Dt]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("cannot sweep {s:?} (upsilon | delta | beta | eps | dt)")))
    }
}

/// Runs `base` once per value, in parallel, each into `root/<name>/<key>=<value>`.
/// All variants are validated before any run starts.
pub fn sweep(base: &RunConfig, key: SweepKey, values: &[f64], root: &Path) -> Result<Vec<RunOutcome>> {
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            key.apply(&mut c, v);
            c.run.name = Some(format!("{}/{}={v}", base.name(), key.name()));
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run_scenario(c, root))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}
