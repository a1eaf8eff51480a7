//! Parameter sweeps over the quantum, semiclassical and classical models.
//!
//! A [`SweepSpec`] names one or two swept parameters; every grid point is
//! evaluated independently on a rayon pool and rows come back in grid order,
//! so output does not depend on the thread count.

mod config;
mod csv;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{long_time_amplitude_with, LongTimeOptions, DEFAULT_STARTS};
use crate::error::{Error, Result};
use crate::fock::{ModeIndex, TruncationSpec};
use crate::langevin::{ensemble_average_with, EnsembleOptions};
use crate::liouvillian::{check_truncation, mean_phonon, steady_state_for, TRUNCATION_ERROR, TRUNCATION_WARN};
use crate::params::SystemParams;

pub use config::{parse_sweep_config, parse_wigner_config, WignerSpec};
pub use csv::{format_number, read_csv, write_csv, write_table, CsvTable};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "KERR_VDP_THREADS";
/// A sweep is abandoned when more than this fraction of points fail.
pub const MAX_FAILED_POINTS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Quantum,
    Semiclassical,
    Classical,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Quantum => "quantum",
            Model::Semiclassical => "semiclassical",
            Model::Classical => "classical",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "quantum" => Some(Model::Quantum),
            "semiclassical" => Some(Model::Semiclassical),
            "classical" => Some(Model::Classical),
            _ => None,
        }
    }

    fn allowed_observables(self) -> &'static [Observable] {
        match self {
            Model::Quantum => &[Observable::N1, Observable::N2, Observable::NDiff],
            Model::Semiclassical => &[Observable::AmpSq1, Observable::AmpSq2],
            Model::Classical => &[Observable::AmpSq1],
        }
    }

    /// Observables recorded when a config does not list any.
    pub fn default_observables(self) -> Vec<Observable> {
        self.allowed_observables().to_vec()
    }
}

/// Parameter that can be swept. `K` sets both Kerr coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisParam {
    Delta,
    V,
    K,
    K1,
    K2,
    Kappa,
}

impl AxisParam {
    pub const ALL: [AxisParam; 6] =
        [AxisParam::Delta, AxisParam::V, AxisParam::K, AxisParam::K1, AxisParam::K2, AxisParam::Kappa];

    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Delta => "delta",
            AxisParam::V => "v",
            AxisParam::K => "k",
            AxisParam::K1 => "k1",
            AxisParam::K2 => "k2",
            AxisParam::Kappa => "kappa",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Parameter fields this axis writes.
    fn touches(self) -> &'static [&'static str] {
        match self {
            AxisParam::K => &["k", "k1", "k2"],
            AxisParam::K1 => &["k", "k1"],
            AxisParam::K2 => &["k", "k2"],
            AxisParam::Delta => &["delta"],
            AxisParam::V => &["v"],
            AxisParam::Kappa => &["kappa"],
        }
    }

    fn apply(self, p: &mut SystemParams, x: f64) {
        match self {
            AxisParam::Delta => p.delta = x,
            AxisParam::V => p.v = x,
            AxisParam::K => {
                p.k1 = x;
                p.k2 = x;
            }
            AxisParam::K1 => p.k1 = x,
            AxisParam::K2 => p.k2 = x,
            AxisParam::Kappa => p.kappa = x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn new(param: AxisParam, min: f64, max: f64, n_points: usize) -> Result<Self> {
        let a = Self { param, min, max, n_points };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Spec(format!("axis {} bounds must be finite", self.param.name())));
        }
        if self.min >= self.max {
            return Err(Error::Spec(format!(
                "axis {} needs min < max (got {} and {})",
                self.param.name(),
                self.min,
                self.max
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Spec(format!("axis {} needs n_points >= 2", self.param.name())));
        }
        Ok(())
    }

    /// Grid value `i`; both endpoints are hit exactly.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n_points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n_points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    N1,
    N2,
    NDiff,
    AmpSq1,
    AmpSq2,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::N1, Observable::N2, Observable::NDiff, Observable::AmpSq1, Observable::AmpSq2];

    pub fn name(self) -> &'static str {
        match self {
            Observable::N1 => "n1",
            Observable::N2 => "n2",
            Observable::NDiff => "ndiff",
            Observable::AmpSq1 => "amp_sq_1",
            Observable::AmpSq2 => "amp_sq_2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

/// Quantum-only controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumOptions {
    pub trunc: TruncationSpec,
    /// Retry once with 1.5× the cutoff when the truncation check exceeds 1e-3.
    pub auto_escalate: bool,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        Self {
            trunc: TruncationSpec::symmetric(10).expect("valid default truncation"),
            auto_escalate: true,
        }
    }
}

/// Classical-only controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOptions {
    pub n_starts: usize,
    pub t_final: f64,
    pub average_fraction: f64,
    pub tol: f64,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        let lt = LongTimeOptions::default();
        Self {
            n_starts: DEFAULT_STARTS,
            t_final: lt.t_final,
            average_fraction: lt.average_fraction,
            tol: lt.tol,
        }
    }
}

/// Complete description of a sweep. Build one with [`SweepSpec::new`] and the
/// `with_*` helpers, or parse a config with [`parse_sweep_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// Values of the parameters that are not swept.
    pub fixed: SystemParams,
    pub quantum: QuantumOptions,
    /// Semiclassical ensemble controls; its `seed` field is ignored in favour of `seed`.
    pub ensemble: EnsembleOptions,
    pub classical: ClassicalOptions,
    pub seed: u64,
    pub observables: Vec<Observable>,
}

impl SweepSpec {
    pub fn new(model: Model, axis1: Axis, fixed: SystemParams) -> Self {
        Self {
            model,
            axis1,
            axis2: None,
            fixed,
            quantum: QuantumOptions::default(),
            ensemble: EnsembleOptions::default(),
            classical: ClassicalOptions::default(),
            seed: 1,
            observables: model.default_observables(),
        }
    }

    pub fn with_axis2(mut self, axis: Axis) -> Self {
        self.axis2 = Some(axis);
        self
    }

    pub fn with_trunc(mut self, trunc: TruncationSpec) -> Self {
        self.quantum.trunc = trunc;
        self
    }

    pub fn with_ensemble(mut self, ensemble: EnsembleOptions) -> Self {
        self.ensemble = ensemble;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_observables(mut self, observables: Vec<Observable>) -> Self {
        self.observables = observables;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            let overlap = self.axis1.param.touches().iter().any(|f| a2.param.touches().contains(f));
            if overlap {
                return Err(Error::Spec(format!(
                    "axes {} and {} set the same parameter",
                    self.axis1.param.name(),
                    a2.param.name()
                )));
            }
        }
        let allowed = self.model.allowed_observables();
        if let Some(o) = self.observables.iter().find(|o| !allowed.contains(o)) {
            return Err(Error::Spec(format!(
                "observable {} is not available for the {} model",
                o.name(),
                self.model.name()
            )));
        }
        for (i, o) in self.observables.iter().enumerate() {
            if self.observables[..i].contains(o) {
                return Err(Error::Spec(format!("observable {} listed twice", o.name())));
            }
        }
        // every grid corner must be a valid parameter set
        let corners2 = match &self.axis2 {
            Some(a) => vec![Some(a.min), Some(a.max)],
            None => vec![None],
        };
        for x1 in [self.axis1.min, self.axis1.max] {
            for &x2 in &corners2 {
                self.params_at(x1, x2).validate().map_err(|e| Error::Spec(e.to_string()))?;
            }
        }
        if self.model == Model::Classical && self.classical.n_starts == 0 {
            return Err(Error::Spec("n_starts must be >= 1".into()));
        }
        if self.model == Model::Semiclassical && self.ensemble.n_traj < 2 {
            return Err(Error::Spec("n_traj must be >= 2".into()));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.axis1.n_points * self.axis2.map_or(1, |a| a.n_points)
    }

    /// Axis values of grid point `index`; axis 2 runs fastest.
    pub fn point(&self, index: usize) -> (f64, Option<f64>) {
        match &self.axis2 {
            Some(a2) => (self.axis1.value(index / a2.n_points), Some(a2.value(index % a2.n_points))),
            None => (self.axis1.value(index), None),
        }
    }

    pub fn params_at(&self, x1: f64, x2: Option<f64>) -> SystemParams {
        let mut p = self.fixed;
        self.axis1.param.apply(&mut p, x1);
        if let (Some(a2), Some(x2)) = (&self.axis2, x2) {
            a2.param.apply(&mut p, x2);
        }
        p
    }

    /// Column names of the output table.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec![self.axis1.param.name().to_string()];
        if let Some(a2) = &self.axis2 {
            cols.push(a2.param.name().to_string());
        }
        cols.extend(self.observables.iter().map(|o| o.name().to_string()));
        match self.model {
            Model::Quantum => {
                cols.extend(["truncation", "residual", "n_max_1", "n_max_2"].map(String::from));
            }
            Model::Semiclassical => {
                cols.extend(self.observables.iter().map(|o| format!("{}_se", o.name())));
                cols.push("n_failed".into());
            }
            Model::Classical => {}
        }
        cols
    }
}

/// Row status: `ok`, `truncation` (kept but flagged), or an error tag.
pub const STATUS_OK: &str = "ok";
pub const STATUS_TRUNCATION: &str = "truncation";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// One entry per column of [`SweepSpec::columns`]; NaN where unavailable.
    pub values: Vec<f64>,
    pub status: String,
}

impl SweepRow {
    pub fn is_error(&self) -> bool {
        self.status != STATUS_OK && self.status != STATUS_TRUNCATION
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Seconds spent in [`run_sweep`]; reported on the console, not written to files.
    pub wall_time: f64,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of column `name`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }

    pub fn n_flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.status == STATUS_TRUNCATION).count()
    }
}

impl fmt::Display for SweepResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} sweep: {} points, {} failed, {} flagged, {:.2} s",
            self.spec.model.name(),
            self.rows.len(),
            self.n_failed(),
            self.n_flagged(),
            self.wall_time
        )
    }
}

/// Worker count: `requested`, else the environment variable, else rayon's default.
pub fn resolve_threads(requested: Option<usize>) -> Option<usize> {
    requested.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok())).filter(|&n| n > 0)
}

/// Evaluates `spec` at every grid point on `threads` workers (`None` picks the
/// default from [`resolve_threads`]).
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let start = Instant::now();
    let columns = spec.columns();
    if spec.observables.is_empty() {
        return Ok(SweepResult { spec: spec.clone(), columns, rows: Vec::new(), wall_time: 0.0 });
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolve_threads(threads) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Spec(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> =
        pool.install(|| (0..spec.n_points()).into_par_iter().map(|i| evaluate_point(spec, i)).collect());

    let failed = rows.iter().filter(|r| r.is_error()).count();
    if failed as f64 > MAX_FAILED_POINTS * rows.len() as f64 {
        return Err(Error::SweepFailed { failed, total: rows.len() });
    }
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", rows.len());
    }
    Ok(SweepResult { spec: spec.clone(), columns, rows, wall_time: start.elapsed().as_secs_f64() })
}

/// Evaluates one grid point; errors become a tagged row of NaNs.
pub fn evaluate_point(spec: &SweepSpec, index: usize) -> SweepRow {
    let (x1, x2) = spec.point(index);
    let params = spec.params_at(x1, x2);
    let mut values = vec![x1];
    values.extend(x2);
    let n_fields = spec.columns().len() - values.len();
    let outcome = match spec.model {
        Model::Quantum => quantum_point(spec, &params),
        Model::Semiclassical => semiclassical_point(spec, &params),
        Model::Classical => classical_point(spec, &params),
    };
    match outcome {
        Ok((fields, status)) => {
            debug_assert_eq!(fields.len(), n_fields);
            values.extend(fields);
            SweepRow { values, status: status.to_string() }
        }
        Err(e) => {
            log::debug!("point {index} ({x1}, {x2:?}) failed: {e}");
            values.extend(std::iter::repeat_n(f64::NAN, n_fields));
            SweepRow { values, status: e.tag().to_string() }
        }
    }
}

fn quantum_point(spec: &SweepSpec, params: &SystemParams) -> Result<(Vec<f64>, &'static str)> {
    let mut trunc = spec.quantum.trunc;
    let (mut rho, mut report) = steady_state_for(params, &trunc)?;
    let mut check = check_truncation(&rho, &trunc);
    if check > TRUNCATION_ERROR && spec.quantum.auto_escalate {
        let grow = |n: usize| n + n.div_ceil(2);
        if let Ok(bigger) =
            TruncationSpec::new(grow(trunc.n_max(ModeIndex::One)), grow(trunc.n_max(ModeIndex::Two)))
        {
            let (r, rep) = steady_state_for(params, &bigger)?;
            trunc = bigger;
            check = check_truncation(&r, &trunc);
            rho = r;
            report = rep;
        }
    }
    if check > TRUNCATION_WARN {
        log::warn!("truncation check {check:.3e} at {params:?}");
    }
    let (n1, n2) = (mean_phonon(&rho, ModeIndex::One), mean_phonon(&rho, ModeIndex::Two));
    let mut out: Vec<f64> = spec
        .observables
        .iter()
        .map(|o| match o {
            Observable::N1 => n1,
            Observable::N2 => n2,
            Observable::NDiff => n1 - n2,
            Observable::AmpSq1 | Observable::AmpSq2 => unreachable!("rejected by validate"),
        })
        .collect();
    out.extend([
        check,
        report.relative_residual(),
        trunc.n_max(ModeIndex::One) as f64,
        trunc.n_max(ModeIndex::Two) as f64,
    ]);
    let status = if check > TRUNCATION_ERROR { STATUS_TRUNCATION } else { STATUS_OK };
    Ok((out, status))
}

fn semiclassical_point(spec: &SweepSpec, params: &SystemParams) -> Result<(Vec<f64>, &'static str)> {
    // the same seed at every point: common random numbers across the grid
    let opts = EnsembleOptions { seed: spec.seed, ..spec.ensemble };
    let stats = ensemble_average_with(params, &opts)?;
    let pick = |o: &Observable| match o {
        Observable::AmpSq1 => (stats.mean_amp_sq_1, stats.standard_error_1),
        Observable::AmpSq2 => (stats.mean_amp_sq_2, stats.standard_error_2),
        _ => unreachable!("rejected by validate"),
    };
    let mut out: Vec<f64> = spec.observables.iter().map(|o| pick(o).0).collect();
    out.extend(spec.observables.iter().map(|o| pick(o).1));
    out.push(stats.n_failed as f64);
    Ok((out, STATUS_OK))
}

fn classical_point(spec: &SweepSpec, params: &SystemParams) -> Result<(Vec<f64>, &'static str)> {
    let c = &spec.classical;
    let opts = LongTimeOptions { t_final: c.t_final, average_fraction: c.average_fraction, tol: c.tol, seed: spec.seed };
    let amp = long_time_amplitude_with(params, c.n_starts, &opts)?;
    Ok((spec.observables.iter().map(|_| amp).collect(), STATUS_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantum_line() -> SweepSpec {
        let axis = Axis::new(AxisParam::Delta, -2.0, 2.0, 5).unwrap();
        let fixed = SystemParams { kappa: 0.5, v: 2.0, ..Default::default() };
        SweepSpec::new(Model::Quantum, axis, fixed).with_trunc(TruncationSpec::symmetric(6).unwrap())
    }

    #[test]
    fn axis_grid() {
        let a = Axis::new(AxisParam::Delta, 0.0, 200.0, 201).unwrap();
        assert_eq!(a.value(0), 0.0);
        assert_eq!(a.value(50), 50.0);
        assert_eq!(a.value(200), 200.0);
        assert!(Axis::new(AxisParam::V, 1.0, 1.0, 2).is_err());
        assert!(Axis::new(AxisParam::V, 0.0, 1.0, 1).is_err());
        assert!(Axis::new(AxisParam::V, 2.0, 1.0, 5).is_err());
    }

    #[test]
    fn overlapping_axes_rejected() {
        let spec = quantum_line().with_axis2(Axis::new(AxisParam::Delta, 0.0, 1.0, 2).unwrap());
        assert!(matches!(spec.validate(), Err(Error::Spec(_))));
        let mut spec = quantum_line();
        spec.axis1 = Axis::new(AxisParam::K, 0.0, 1.0, 2).unwrap();
        let spec = spec.with_axis2(Axis::new(AxisParam::K2, 0.0, 1.0, 2).unwrap());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn observables_checked_against_model() {
        let spec = quantum_line().with_observables(vec![Observable::AmpSq1]);
        assert!(spec.validate().is_err());
        let spec = quantum_line().with_observables(vec![Observable::N1, Observable::N1]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn grid_order_axis2_fastest() {
        let spec = quantum_line().with_axis2(Axis::new(AxisParam::V, 1.0, 3.0, 3).unwrap());
        assert_eq!(spec.n_points(), 15);
        assert_eq!(spec.point(0), (-2.0, Some(1.0)));
        assert_eq!(spec.point(1), (-2.0, Some(2.0)));
        assert_eq!(spec.point(3), (-1.0, Some(1.0)));
        assert_eq!(spec.params_at(-1.0, Some(2.0)).v, 2.0);
    }

    #[test]
    fn quantum_sweep_rows() {
        let res = run_sweep(&quantum_line(), Some(1)).unwrap();
        assert_eq!(res.rows.len(), 5);
        assert_eq!(res.columns, ["delta", "n1", "n2", "ndiff", "truncation", "residual", "n_max_1", "n_max_2"]);
        let n1 = res.column("n1").unwrap();
        // Δ → −Δ with K₁ = K₂ swaps the modes; here both Kerr terms vanish
        assert!((n1[0] - n1[4]).abs() < 1e-10);
        assert!(n1[2] > n1[1]);
        assert!(res.rows.iter().all(|r| r.status == STATUS_OK));
    }

    #[test]
    fn empty_observables_give_no_rows() {
        let res = run_sweep(&quantum_line().with_observables(vec![]), None).unwrap();
        assert!(res.rows.is_empty());
        assert_eq!(res.columns, ["delta", "truncation", "residual", "n_max_1", "n_max_2"]);
    }

    #[test]
    fn escalation_on_small_cutoff() {
        let axis = Axis::new(AxisParam::Delta, 0.0, 1.0, 2).unwrap();
        let fixed = SystemParams { kappa: 0.2, v: 0.5, ..Default::default() };
        let spec = SweepSpec::new(Model::Quantum, axis, fixed).with_trunc(TruncationSpec::symmetric(4).unwrap());
        let res = run_sweep(&spec, Some(1)).unwrap();
        let n = res.column("n_max_1").unwrap();
        assert!(n.iter().all(|&x| x == 6.0));
        let mut no = spec.clone();
        no.quantum.auto_escalate = false;
        let res = run_sweep(&no, Some(1)).unwrap();
        assert!(res.rows.iter().all(|r| r.status == STATUS_TRUNCATION));
    }
}
