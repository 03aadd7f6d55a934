//! Energy reports, versioned CSV output, least-squares fits and convergence
//! studies.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SpectralField};

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Orders `s` of the inhomogeneous norms stored in every report.
pub const SOBOLEV_ORDERS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

/// Scalar diagnostics of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub time: f64,
    pub mean: f64,
    pub energy: f64,
    pub cal_energy: f64,
    /// `‖·‖_{H^s}` for each entry of [`SOBOLEV_ORDERS`].
    pub sobolev: [f64; 6],
    pub linf: f64,
    /// Model-specific columns, see [`SeriesKind::extra_columns`].
    pub extras: Vec<f64>,
}

impl EnergyReport {
    /// Fills the field-derived entries; `energy` and `cal_energy` come from the model.
    pub fn of_field(time: f64, field: &SpectralField, energy: f64, cal_energy: f64) -> Self {
        let mut sobolev = [0.0; 6];
        for (out, s) in sobolev.iter_mut().zip(SOBOLEV_ORDERS) {
            *out = sobolev_norm(field, s, false);
        }
        Self {
            time,
            mean: field.mean(),
            energy,
            cal_energy,
            sobolev,
            linf: field.linf(),
            extras: Vec::new(),
        }
    }

    pub fn h(&self, s: f64) -> Option<f64> {
        SOBOLEV_ORDERS.iter().position(|&o| o == s).map(|i| self.sobolev[i])
    }
}

/// Column layout of a report series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Uni,
    Bi,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uni => "uni",
            Self::Bi => "bi",
        }
    }

    pub fn extra_columns(self) -> &'static [&'static str] {
        match self {
            Self::Uni => &[],
            Self::Bi => &["elliptic_iterations", "contraction_estimate"],
        }
    }

    pub fn columns(self) -> Vec<&'static str> {
        let time = match self {
            Self::Uni => "tau",
            Self::Bi => "t",
        };
        let mut cols = vec![time, "mean", "E", "calE", "h1", "h2", "h3", "linf"];
        cols.extend_from_slice(self.extra_columns());
        cols
    }
}

/// Time-ordered reports of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportSeries {
    pub kind: SeriesKind,
    pub reports: Vec<EnergyReport>,
}

impl ReportSeries {
    pub fn new(kind: SeriesKind) -> Self {
        Self { kind, reports: Vec::new() }
    }

    pub fn times(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.time).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.energy).collect()
    }

    /// `max |mean − mean₀|` over the series.
    pub fn mean_drift(&self) -> f64 {
        let Some(first) = self.reports.first() else { return 0.0 };
        self.reports.iter().map(|r| (r.mean - first.mean).abs()).fold(0.0, f64::max)
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the series as CSV behind a `# hydrowave-diagnostics v1 kind=...` line.
pub fn write_csv(series: &ReportSeries, path: &Path) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# hydrowave-diagnostics v{CSV_SCHEMA_VERSION} kind={}", series.kind.name())?;
    let mut w = csv::Writer::from_writer(file);
    let cols = series.kind.columns();
    w.write_record(&cols)?;
    for r in &series.reports {
        if r.extras.len() != series.kind.extra_columns().len() {
            return Err(Error::InvalidParameter(format!(
                "report at t = {} has {} extra values, expected {}",
                r.time,
                r.extras.len(),
                series.kind.extra_columns().len()
            )));
        }
        let mut row = vec![r.time, r.mean, r.energy, r.cal_energy, r.sobolev[2], r.sobolev[4], r.sobolev[5], r.linf];
        row.extend(&r.extras);
        w.write_record(row.into_iter().map(fmt_float))?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed diagnostics CSV: schema kind, column names and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a diagnostics CSV, refusing other schema versions.
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let prefix = format!("# hydrowave-diagnostics v{CSV_SCHEMA_VERSION} kind=");
    let kind = first
        .trim_end()
        .strip_prefix(&prefix)
        .ok_or_else(|| Error::Format(format!("unsupported diagnostics header '{}'", first.trim_end())))?
        .to_string();
    let mut r = csv::Reader::from_reader(reader);
    let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("bad number '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { kind, columns, rows })
}

/// Physical-space samples as CSV: `x,value` (1D) or `x1,x2,value` (2D).
pub fn write_physical_csv(field: &SpectralField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let grid = field.grid();
    if grid.dim() == 1 {
        w.write_record(["x", "value"])?;
    } else {
        w.write_record(["x1", "x2", "value"])?;
    }
    for (i, v) in field.to_physical().into_iter().enumerate() {
        let p = grid.point(i);
        if grid.dim() == 1 {
            w.write_record([fmt_float(p[0]), fmt_float(v)])?;
        } else {
            w.write_record([fmt_float(p[0]), fmt_float(p[1]), fmt_float(v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable rows as CSV with a versioned comment line.
pub fn write_table<T: serde::Serialize>(rows: &[T], schema: &str, path: &Path) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# hydrowave-{schema} v{CSV_SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("need >= 2 matching points, got {}/{}", xs.len(), ys.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) || !my.is_finite() {
        return Err(Error::DegenerateFit("abscissae have no spread".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LineFit { slope, intercept, residual })
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(fit_line(&lx, &ly)?.slope)
}

/// Fit of `y(t) = C e^{−c t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub prefactor: f64,
    /// RMS residual of `log y`.
    pub residual: f64,
}

pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<ExpFit> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::DegenerateFit(format!("nonpositive value {v} in exponential fit")));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = fit_line(times, &logs)?;
    Ok(ExpFit { rate: -line.slope, prefactor: line.intercept.exp(), residual: line.residual })
}

/// Minimum number of samples for a decay fit.
pub const MIN_DECAY_SAMPLES: usize = 20;

/// Fits `log E = log C − cτ` over the tail half of a series.
pub fn decay_fit(series: &ReportSeries) -> Result<ExpFit> {
    let n = series.reports.len();
    if n < MIN_DECAY_SAMPLES {
        return Err(Error::DegenerateFit(format!(
            "need at least {MIN_DECAY_SAMPLES} samples, got {n}"
        )));
    }
    let tail = &series.reports[n / 2..];
    let t: Vec<f64> = tail.iter().map(|r| r.time).collect();
    let e: Vec<f64> = tail.iter().map(|r| r.energy).collect();
    fit_exponential(&t, &e)
}

/// L² distance between fields on possibly different grids of the same
/// dimension, comparing all modes and treating missing ones as zero.
pub fn cross_grid_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    if a.grid().dim() != b.grid().dim() {
        return Err(Error::Dimension { expected: a.grid().dim(), got: b.grid().dim() });
    }
    let (small, big) = if a.grid().n() <= b.grid().n() { (a, b) } else { (b, a) };
    let mut sum = 0.0;
    for i in 0..big.grid().len() {
        let k = big.grid().wavevector(i);
        let c = small.coeff(k);
        // Nyquist coefficients of the small grid are not shared modes
        let c = if small.grid().index_of(k).is_some_and(|j| small.grid().is_nyquist(j)) {
            Complex64::new(0.0, 0.0)
        } else {
            c
        };
        sum += (big.coeffs()[i] - c).norm_sqr();
    }
    for j in 0..small.grid().len() {
        if small.grid().is_nyquist(j) {
            sum += small.coeffs()[j].norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// Errors of coarser runs against the finest one.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementTable {
    pub sizes: Vec<usize>,
    /// Error of each size against the finest (last entry is 0).
    pub errors: Vec<f64>,
    /// Log-log slope of error vs `n` over the nonzero errors, when defined.
    pub fitted_order: Option<f64>,
}

pub fn refinement_study(
    run: impl Fn(usize) -> Result<SpectralField>,
    grid_sizes: &[usize],
) -> Result<RefinementTable> {
    if grid_sizes.len() < 3 {
        return Err(Error::InvalidParameter("refinement study needs at least 3 grid sizes".into()));
    }
    let mut sizes = grid_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() != grid_sizes.len() {
        return Err(Error::InvalidParameter("grid sizes must be distinct".into()));
    }
    let fields = sizes.iter().map(|&n| run(n)).collect::<Result<Vec<_>>>()?;
    for (f, &n) in fields.iter().zip(&sizes) {
        if f.grid().n() != n || f.grid().dim() != fields[0].grid().dim() {
            return Err(Error::InvalidParameter(format!("run for n = {n} returned a field on {}", f.grid())));
        }
    }
    let finest = fields.last().expect("nonempty");
    let errors = fields.iter().map(|f| cross_grid_distance(f, finest)).collect::<Result<Vec<_>>>()?;
    let m = sizes.len() - 1;
    let pts: (Vec<f64>, Vec<f64>) = sizes[..m]
        .iter()
        .zip(&errors[..m])
        .filter(|(_, e)| **e > 0.0)
        .map(|(&n, &e)| (n as f64, e))
        .unzip();
    let fitted_order = loglog_slope(&pts.0, &pts.1).ok().map(|s| -s);
    Ok(RefinementTable { sizes, errors, fitted_order })
}

/// Self-convergence table: for step sizes sorted in decreasing order, the
/// error attributed to `dts[i]` is `‖u(dts[i]) − u(dts[i+1])‖`. For a
/// geometric sequence this scales like `dt^p` exactly, so no separate
/// reference run is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderTable {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_order: f64,
}

pub fn temporal_order_study(
    run: impl Fn(f64) -> Result<SpectralField>,
    dt_list: &[f64],
) -> Result<OrderTable> {
    if dt_list.len() < 3 {
        return Err(Error::InvalidParameter("order study needs at least 3 step sizes".into()));
    }
    if dt_list.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParameter("step sizes must be positive".into()));
    }
    let mut dts = dt_list.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let fields = dts.iter().map(|&dt| run(dt)).collect::<Result<Vec<_>>>()?;
    let mut errors = Vec::with_capacity(dts.len() - 1);
    for w in fields.windows(2) {
        w[0].check_same_grid(&w[1])?;
        errors.push(w[0].distance(&w[1]));
    }
    dts.pop();
    let fitted_order = loglog_slope(&dts, &errors)?;
    Ok(OrderTable { dts, errors, fitted_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    fn report(t: f64, e: f64) -> EnergyReport {
        EnergyReport { time: t, mean: 0.0, energy: e, cal_energy: e, sobolev: [1.0; 6], linf: 1.0, extras: vec![] }
    }

    #[test]
    fn exponential_fit_recovers_parameters() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let e: Vec<f64> = t.iter().map(|t| 3.5 * (-0.7 * t).exp()).collect();
        let fit = fit_exponential(&t, &e).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-8);
        assert!((fit.prefactor - 3.5).abs() < 1e-8);
        let series = ReportSeries { kind: SeriesKind::Uni, reports: t.iter().zip(&e).map(|(&t, &e)| report(t, e)).collect() };
        let tail = decay_fit(&series).unwrap();
        assert!((tail.rate - 0.7).abs() < 1e-8 && (tail.prefactor - 3.5).abs() < 1e-8);
    }

    #[test]
    fn fits_reject_degenerate_input() {
        assert!(fit_exponential(&[0.0, 1.0], &[1.0, 0.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        let short = ReportSeries { kind: SeriesKind::Uni, reports: vec![report(0.0, 1.0); 5] };
        assert!(decay_fit(&short).is_err());
    }

    #[test]
    fn csv_roundtrip_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut r = report(0.5, 2.0);
        r.extras = vec![3.0, 0.25];
        let series = ReportSeries { kind: SeriesKind::Bi, reports: vec![r.clone(), r] };
        write_csv(&series, &path).unwrap();
        let table = read_csv(&path).unwrap();
        assert_eq!(table.kind, "bi");
        assert_eq!(table.columns.len(), SeriesKind::Bi.columns().len());
        assert!(table.rows.iter().all(|row| row.len() == 10));
        assert_eq!(table.column("contraction_estimate").unwrap(), vec![0.25, 0.25]);

        let text = std::fs::read_to_string(&path).unwrap().replace("v1", "v9");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(read_csv(&path), Err(Error::Format(_))));

        let bad = ReportSeries { kind: SeriesKind::Bi, reports: vec![report(0.0, 1.0)] };
        assert!(write_csv(&bad, &path).is_err());
    }

    #[test]
    fn resolved_data_refines_to_roundoff() {
        let run = |n: usize| Ok(SpectralField::from_fn(&TorusGrid::one_d(n)?, |[x, _]| x.sin() + 0.5 * (2.0 * x).cos()));
        let t = refinement_study(run, &[16, 32, 64]).unwrap();
        assert!(t.errors.iter().all(|e| *e < 1e-14));
        assert!(refinement_study(run, &[16, 32]).is_err());
    }

    #[test]
    fn underresolved_profile_improves_monotonically() {
        let run = |n: usize| {
            let g = TorusGrid::one_d(n)?;
            Ok(SpectralField::from_fn(&g, |[x, _]| (-8.0 * (x - std::f64::consts::PI).powi(2)).exp()))
        };
        let t = refinement_study(run, &[8, 16, 32, 64]).unwrap();
        assert!(t.errors.windows(2).all(|w| w[1] < w[0]));
        let inconsistent = |n: usize| Ok(SpectralField::zeros(&TorusGrid::one_d(if n == 32 { 16 } else { n })?));
        assert!(refinement_study(inconsistent, &[8, 16, 32]).is_err());
    }

    #[test]
    fn order_study_of_euler_is_one() {
        // explicit Euler on y' = -y, y(0) = 1, to t = 1
        let g = TorusGrid::one_d(8).unwrap();
        let run = |dt: f64| {
            let steps = (1.0 / dt).round() as i32;
            let y = (1.0 - dt).powi(steps);
            SpectralField::from_coeffs(&g, vec![Complex64::new(y, 0.0); 8])
        };
        let t = temporal_order_study(run, &[0.0025, 0.01, 0.005, 0.00125]).unwrap();
        assert_eq!(t.dts, vec![0.01, 0.005, 0.0025]);
        assert!((t.fitted_order - 1.0).abs() < 0.02, "{}", t.fitted_order);
    }
}
