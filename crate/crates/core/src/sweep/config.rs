//! TOML config files for sweeps and Wigner snapshots.
//!
//! Sweep configs are flat `key = value` pairs plus `[axis1]` and an optional
//! `[axis2]` table. Only `model` and `[axis1]` are required.

use toml::{Table, Value};

use super::{Axis, AxisParam, Model, Observable, SweepSpec};
use crate::error::{Error, Result};
use crate::fock::{ModeIndex, TruncationSpec};
use crate::langevin::Scheme;
use crate::params::SystemParams;
use crate::phase_space::WignerGrid;

const PARAM_KEYS: [&str; 7] = ["delta", "v", "k", "k1", "k2", "gain", "kappa"];
const COMMON_KEYS: [&str; 3] = ["model", "seed", "observables"];
const TRUNC_KEYS: [&str; 3] = ["n_max", "n_max_1", "n_max_2"];
const QUANTUM_KEYS: [&str; 1] = ["auto_escalate"];
const SEMICLASSICAL_KEYS: [&str; 5] = ["n_traj", "dt", "burn_in", "average_time", "scheme"];
const CLASSICAL_KEYS: [&str; 4] = ["n_starts", "t_final", "average_fraction", "tol"];
const AXIS_KEYS: [&str; 4] = ["param", "min", "max", "n_points"];
const WIGNER_KEYS: [&str; 3] = ["mode", "half_width", "n_points"];

/// Source text plus helpers that turn a key into a "line N" location.
struct Doc<'a> {
    text: &'a str,
}

impl Doc<'_> {
    /// 1-based line of `key` inside `section` (`None` for the top level).
    fn line_of(&self, section: Option<&str>, key: &str) -> Option<usize> {
        let mut current: Option<String> = None;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('[') {
                current = rest.split(']').next().map(|s| s.trim().to_string());
                if section.is_some() && current.as_deref() == section && key.is_empty() {
                    return Some(n + 1);
                }
                continue;
            }
            if current.as_deref() != section {
                continue;
            }
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(n + 1);
                }
            }
        }
        None
    }

    fn err(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> Error {
        let name = match section {
            Some(s) if key.is_empty() => format!("[{s}]"),
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        let location = match self.line_of(section, key) {
            Some(line) => format!("line {line}, key `{name}`"),
            None => format!("key `{name}`"),
        };
        Error::Config { location, message: message.into() }
    }
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Config {
            location: line.map_or_else(|| "input".to_string(), |l| format!("line {l}")),
            message: e.message().trim().to_string(),
        }
    })
}

/// Typed access to one table with located errors.
struct Block<'a, 'd> {
    doc: &'d Doc<'a>,
    section: Option<&'static str>,
    table: &'d Table,
}

impl Block<'_, '_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        self.doc.err(self.section, key, message)
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn reject_unknown(&self, allowed: &[&str], context: &str) -> Result<()> {
        for key in self.table.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(self.err(key, format!("unknown key `{key}`{context}")));
            }
        }
        Ok(())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.err(key, "expected a number")),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.err(key, "expected a non-negative integer")),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.usize(key).map(|v| v.map(|x| x as u64))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.err(key, "expected true or false")),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn params(&self, swept: &[&str]) -> Result<SystemParams> {
        if self.has("k") {
            for k in ["k1", "k2"] {
                if self.has(k) {
                    return Err(self.err(k, format!("`k` and `{k}` cannot both be set")));
                }
            }
        }
        for key in swept {
            if self.has(key) {
                return Err(self.err(key, format!("`{key}` is swept by an axis and cannot also be fixed")));
            }
        }
        let mut p = SystemParams::default();
        let get = |key: &str, slot: &mut f64| -> Result<()> {
            if let Some(x) = self.f64(key)? {
                *slot = x;
            }
            Ok(())
        };
        get("delta", &mut p.delta)?;
        get("v", &mut p.v)?;
        get("gain", &mut p.gain)?;
        get("kappa", &mut p.kappa)?;
        get("k1", &mut p.k1)?;
        get("k2", &mut p.k2)?;
        if let Some(k) = self.f64("k")? {
            p.k1 = k;
            p.k2 = k;
        }
        Ok(p)
    }

    fn trunc(&self, default: usize) -> Result<TruncationSpec> {
        let n = self.usize("n_max")?;
        if n.is_some() && (self.has("n_max_1") || self.has("n_max_2")) {
            let key = if self.has("n_max_1") { "n_max_1" } else { "n_max_2" };
            return Err(self.err(key, "`n_max` cannot be combined with per-mode cutoffs"));
        }
        let base = n.unwrap_or(default);
        let n1 = self.usize("n_max_1")?.unwrap_or(base);
        let n2 = self.usize("n_max_2")?.unwrap_or(base);
        let key = ["n_max", "n_max_1", "n_max_2"].into_iter().find(|k| self.has(k)).unwrap_or("n_max");
        TruncationSpec::new(n1, n2).map_err(|e| self.err(key, e.to_string()))
    }
}

fn parse_axis(doc: &Doc<'_>, table: &Table, name: &'static str) -> Result<Option<Axis>> {
    let raw = match table.get(name) {
        None => return Ok(None),
        Some(Value::Table(t)) => t,
        Some(_) => return Err(doc.err(None, name, format!("`{name}` must be a table ([{name}])"))),
    };
    let b = Block { doc, section: Some(name), table: raw };
    b.reject_unknown(&AXIS_KEYS, "")?;
    let require = |key: &str| b.err(if b.has(key) { key } else { "" }, format!("missing required key `{key}` in [{name}]"));
    let param_name = b.str("param")?.ok_or_else(|| require("param"))?;
    let param = AxisParam::from_name(param_name).ok_or_else(|| {
        b.err("param", format!("unknown axis parameter `{param_name}` (expected delta, v, k, k1, k2 or kappa)"))
    })?;
    let min = b.f64("min")?.ok_or_else(|| require("min"))?;
    let max = b.f64("max")?.ok_or_else(|| require("max"))?;
    let n_points = b.usize("n_points")?.ok_or_else(|| require("n_points"))?;
    Axis::new(param, min, max, n_points).map(Some).map_err(|e| {
        let key = if n_points < 2 { "n_points" } else { "max" };
        b.err(key, e.to_string())
    })
}

/// Parses a sweep config. Errors carry the offending key and line.
pub fn parse_sweep_config(text: &str) -> Result<SweepSpec> {
    let doc = Doc { text };
    let table = parse_table(text)?;
    let top_values: Table = table.iter().filter(|(_, v)| !v.is_table()).map(|(k, v)| (k.clone(), v.clone())).collect();
    let top = Block { doc: &doc, section: None, table: &top_values };

    let model_name = top.str("model")?.ok_or_else(|| doc.err(None, "model", "missing required key `model`"))?;
    let model = Model::from_name(model_name).ok_or_else(|| {
        doc.err(None, "model", format!("unknown model `{model_name}` (expected quantum, semiclassical or classical)"))
    })?;
    for (k, v) in &table {
        if v.is_table() && k != "axis1" && k != "axis2" {
            return Err(doc.err(Some(k.as_str()), "", format!("unknown table [{k}]")));
        }
    }
    let specific: &[&str] = match model {
        Model::Quantum => &[&TRUNC_KEYS[..], &QUANTUM_KEYS[..]].concat(),
        Model::Semiclassical => &SEMICLASSICAL_KEYS,
        Model::Classical => &CLASSICAL_KEYS,
    };
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(PARAM_KEYS.iter()).chain(specific.iter()).copied().collect();
    top.reject_unknown(&allowed, &format!(" for the {model_name} model"))?;

    let axis1 = parse_axis(&doc, &table, "axis1")?.ok_or_else(|| doc.err(None, "axis1", "missing required table [axis1]"))?;
    let axis2 = parse_axis(&doc, &table, "axis2")?;
    let swept: Vec<&str> = std::iter::once(&axis1)
        .chain(axis2.as_ref())
        .flat_map(|a| a.param.touches().iter().copied())
        .collect();
    let fixed = top.params(&swept)?;

    let mut spec = SweepSpec::new(model, axis1, fixed);
    spec.axis2 = axis2;
    if let Some(seed) = top.u64("seed")? {
        spec.seed = seed;
    }
    if let Some(v) = top.table.get("observables") {
        let arr = v.as_array().ok_or_else(|| top.err("observables", "expected an array of names"))?;
        spec.observables = arr
            .iter()
            .map(|x| {
                x.as_str().and_then(Observable::from_name).ok_or_else(|| {
                    top.err("observables", format!("unknown observable {x} (expected n1, n2, ndiff, amp_sq_1 or amp_sq_2)"))
                })
            })
            .collect::<Result<_>>()?;
    }
    match model {
        Model::Quantum => {
            spec.quantum.trunc = top.trunc(spec.quantum.trunc.n_max(ModeIndex::One))?;
            if let Some(b) = top.bool("auto_escalate")? {
                spec.quantum.auto_escalate = b;
            }
        }
        Model::Semiclassical => {
            let e = &mut spec.ensemble;
            if let Some(n) = top.usize("n_traj")? {
                e.n_traj = n;
            }
            for (key, slot) in [("dt", &mut e.dt), ("burn_in", &mut e.burn_in), ("average_time", &mut e.average_time)] {
                if let Some(x) = top.f64(key)? {
                    if !(x.is_finite() && x >= 0.0) {
                        return Err(top.err(key, "must be a finite non-negative number"));
                    }
                    *slot = x;
                }
            }
            if let Some(s) = top.str("scheme")? {
                e.scheme = scheme_from_name(s)
                    .ok_or_else(|| top.err("scheme", "expected euler_maruyama or rotating_euler_maruyama"))?;
            }
        }
        Model::Classical => {
            let c = &mut spec.classical;
            if let Some(n) = top.usize("n_starts")? {
                c.n_starts = n;
            }
            for (key, slot) in [("t_final", &mut c.t_final), ("average_fraction", &mut c.average_fraction), ("tol", &mut c.tol)] {
                if let Some(x) = top.f64(key)? {
                    *slot = x;
                }
            }
        }
    }
    spec.validate().map_err(|e| {
        let key = match &e {
            Error::Spec(m) if m.contains("observable") => "observables",
            Error::Spec(m) if m.contains("n_traj") => "n_traj",
            Error::Spec(m) if m.contains("n_starts") => "n_starts",
            _ => "",
        };
        if key.is_empty() {
            Error::Config { location: "spec".into(), message: e.to_string() }
        } else {
            doc.err(None, key, e.to_string())
        }
    })?;
    Ok(spec)
}

pub(crate) fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::EulerMaruyama => "euler_maruyama",
        Scheme::RotatingEulerMaruyama => "rotating_euler_maruyama",
    }
}

fn scheme_from_name(s: &str) -> Option<Scheme> {
    match s {
        "euler_maruyama" => Some(Scheme::EulerMaruyama),
        "rotating_euler_maruyama" => Some(Scheme::RotatingEulerMaruyama),
        _ => None,
    }
}

fn params_table(p: &SystemParams, swept: &[&str]) -> Table {
    let mut t = Table::new();
    for (key, x) in [("delta", p.delta), ("v", p.v), ("gain", p.gain), ("kappa", p.kappa), ("k1", p.k1), ("k2", p.k2)] {
        if !swept.contains(&key) {
            t.insert(key.into(), Value::Float(x));
        }
    }
    t
}

fn trunc_entries(t: &mut Table, trunc: &TruncationSpec) {
    let (n1, n2) = (trunc.n_max(ModeIndex::One), trunc.n_max(ModeIndex::Two));
    if n1 == n2 {
        t.insert("n_max".into(), Value::Integer(n1 as i64));
    } else {
        t.insert("n_max_1".into(), Value::Integer(n1 as i64));
        t.insert("n_max_2".into(), Value::Integer(n2 as i64));
    }
}

fn axis_table(a: &Axis) -> Value {
    let mut t = Table::new();
    t.insert("param".into(), Value::String(a.param.name().into()));
    t.insert("min".into(), Value::Float(a.min));
    t.insert("max".into(), Value::Float(a.max));
    t.insert("n_points".into(), Value::Integer(a.n_points as i64));
    Value::Table(t)
}

impl SweepSpec {
    /// Canonical config text; [`parse_sweep_config`] maps it back to `self`.
    pub fn to_toml(&self) -> String {
        let swept: Vec<&str> = std::iter::once(&self.axis1)
            .chain(self.axis2.as_ref())
            .flat_map(|a| a.param.touches().iter().copied())
            .collect();
        let mut t = params_table(&self.fixed, &swept);
        t.insert("model".into(), Value::String(self.model.name().into()));
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert(
            "observables".into(),
            Value::Array(self.observables.iter().map(|o| Value::String(o.name().into())).collect()),
        );
        match self.model {
            Model::Quantum => {
                trunc_entries(&mut t, &self.quantum.trunc);
                t.insert("auto_escalate".into(), Value::Boolean(self.quantum.auto_escalate));
            }
            Model::Semiclassical => {
                let e = &self.ensemble;
                t.insert("n_traj".into(), Value::Integer(e.n_traj as i64));
                t.insert("dt".into(), Value::Float(e.dt));
                t.insert("burn_in".into(), Value::Float(e.burn_in));
                t.insert("average_time".into(), Value::Float(e.average_time));
                t.insert("scheme".into(), Value::String(scheme_name(e.scheme).into()));
            }
            Model::Classical => {
                let c = &self.classical;
                t.insert("n_starts".into(), Value::Integer(c.n_starts as i64));
                t.insert("t_final".into(), Value::Float(c.t_final));
                t.insert("average_fraction".into(), Value::Float(c.average_fraction));
                t.insert("tol".into(), Value::Float(c.tol));
            }
        }
        t.insert("axis1".into(), axis_table(&self.axis1));
        if let Some(a2) = &self.axis2 {
            t.insert("axis2".into(), axis_table(a2));
        }
        toml::to_string(&t).expect("plain table serializes")
    }
}

/// Steady-state Wigner snapshot of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSpec {
    pub params: SystemParams,
    pub trunc: TruncationSpec,
    pub mode: ModeIndex,
    /// Half width of the square window; `None` uses [`WignerGrid::default_for`].
    pub half_width: Option<f64>,
    pub n_points: usize,
}

impl WignerSpec {
    pub fn new(params: SystemParams, trunc: TruncationSpec) -> Self {
        Self { params, trunc, mode: ModeIndex::One, half_width: None, n_points: WignerGrid::DEFAULT_POINTS }
    }

    /// Empty grid for this snapshot.
    pub fn grid(&self) -> Result<WignerGrid> {
        match self.half_width {
            Some(h) => WignerGrid::square(h, self.n_points),
            None => {
                let d = WignerGrid::default_for(&self.params);
                WignerGrid::square(d.re_max, self.n_points)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        let mut t = params_table(&self.params, &[]);
        trunc_entries(&mut t, &self.trunc);
        let mode = match self.mode {
            ModeIndex::One => 1,
            ModeIndex::Two => 2,
        };
        t.insert("mode".into(), Value::Integer(mode));
        if let Some(h) = self.half_width {
            t.insert("half_width".into(), Value::Float(h));
        }
        t.insert("n_points".into(), Value::Integer(self.n_points as i64));
        toml::to_string(&t).expect("plain table serializes")
    }
}

/// Parses a Wigner config: model parameters, cutoffs, `mode` (1 or 2),
/// `half_width` and `n_points`. Every key has a default.
pub fn parse_wigner_config(text: &str) -> Result<WignerSpec> {
    let doc = Doc { text };
    let table = parse_table(text)?;
    if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
        return Err(doc.err(Some(k.as_str()), "", format!("unexpected table [{k}]")));
    }
    let b = Block { doc: &doc, section: None, table: &table };
    let allowed: Vec<&str> = PARAM_KEYS.iter().chain(TRUNC_KEYS.iter()).chain(WIGNER_KEYS.iter()).copied().collect();
    b.reject_unknown(&allowed, " for a Wigner config")?;
    let params = b.params(&[])?;
    params.validate().map_err(|e| Error::Config { location: "parameters".into(), message: e.to_string() })?;
    let mut spec = WignerSpec::new(params, b.trunc(10)?);
    spec.mode = match b.usize("mode")? {
        None | Some(1) => ModeIndex::One,
        Some(2) => ModeIndex::Two,
        Some(_) => return Err(b.err("mode", "mode must be 1 or 2")),
    };
    if let Some(h) = b.f64("half_width")? {
        if !(h.is_finite() && h > 0.0) {
            return Err(b.err("half_width", "must be a positive number"));
        }
        spec.half_width = Some(h);
    }
    if let Some(n) = b.usize("n_points")? {
        spec.n_points = n;
    }
    spec.grid().map_err(|e| b.err("n_points", e.to_string()))?;
    Ok(spec)
}
