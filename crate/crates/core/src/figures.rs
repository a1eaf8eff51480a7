//! Canned desk-scale specs for each figure of the study, and the Wigner
//! snapshot writer.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fock::TruncationSpec;
use crate::langevin::EnsembleOptions;
use crate::liouvillian::steady_state_for;
use crate::params::SystemParams;
use crate::phase_space::{partial_trace, wigner, WignerGrid};
use crate::sweep::{
    format_number, run_sweep, write_csv, write_table, Axis, AxisParam, Model, Observable, SweepSpec, WignerSpec,
};

/// One output file of a canned figure.
#[derive(Debug, Clone)]
pub enum FigureJob {
    Sweep(SweepSpec),
    Wigner(WignerSpec),
}

/// Ensemble used by the semiclassical line scans.
pub fn line_scan_ensemble(v: f64) -> EnsembleOptions {
    EnsembleOptions {
        n_traj: 256,
        dt: 4e-3,
        burn_in: 50.0,
        average_time: if v < 4.0 { 1000.0 } else { 250.0 },
        seed: 7,
        ..Default::default()
    }
}

fn axis(p: AxisParam, min: f64, max: f64, n: usize) -> Axis {
    Axis::new(p, min, max, n).expect("canned axes are valid")
}

fn trunc(n: usize) -> TruncationSpec {
    TruncationSpec::symmetric(n).expect("canned truncations are valid")
}

fn amplitude_map(model: Model, k: f64) -> SweepSpec {
    let fixed = SystemParams { kappa: 0.2, ..Default::default() }.with_kerr(k);
    let mut spec = SweepSpec::new(model, axis(AxisParam::Delta, 0.0, 6.0, 61), fixed)
        .with_axis2(axis(AxisParam::V, 0.0, 10.0, 61))
        .with_trunc(trunc(12))
        .with_ensemble(EnsembleOptions { n_traj: 64, dt: 4e-3, burn_in: 50.0, average_time: 200.0, ..Default::default() });
    if model == Model::Quantum {
        spec.observables = vec![Observable::N1, Observable::N2];
    }
    spec
}

/// Output file names and jobs for figure `which` (2 to 5).
pub fn figure_jobs(which: u8) -> Result<Vec<(String, FigureJob)>> {
    let mut jobs = Vec::new();
    match which {
        2 => {
            for k in [0.0, 1.0] {
                for model in [Model::Classical, Model::Semiclassical, Model::Quantum] {
                    jobs.push((format!("fig2_{}_k{k}.csv", model.name()), FigureJob::Sweep(amplitude_map(model, k))));
                }
            }
        }
        3 => {
            for (tag, k, delta) in [("a", 0.0, 2.0), ("b", 0.0, 5.0), ("c", 1.0, 2.0), ("d", 1.0, 5.0)] {
                let params = SystemParams { kappa: 0.2, v: 6.0, delta, ..Default::default() }.with_kerr(k);
                jobs.push((format!("fig3{tag}_wigner.csv"), FigureJob::Wigner(WignerSpec::new(params, trunc(12)))));
            }
        }
        4 => {
            for v in [8.0, 2.0] {
                let fixed = SystemParams { k1: 50.0, v, ..Default::default() };
                let detuning = axis(AxisParam::Delta, -200.0, 200.0, 201);
                let k2 = axis(AxisParam::K2, 0.0, 50.0, 2);
                let q = SweepSpec::new(Model::Quantum, detuning, fixed)
                    .with_axis2(k2)
                    .with_trunc(trunc(if v > 4.0 { 6 } else { 10 }));
                let mut s = SweepSpec::new(Model::Semiclassical, detuning, fixed)
                    .with_axis2(k2)
                    .with_ensemble(line_scan_ensemble(v));
                s.seed = 7;
                jobs.push((format!("fig4_quantum_v{v}.csv"), FigureJob::Sweep(q)));
                jobs.push((format!("fig4_semiclassical_v{v}.csv"), FigureJob::Sweep(s)));
            }
        }
        5 => {
            let detuning = axis(AxisParam::Delta, -150.0, 150.0, 101);
            let a = SweepSpec::new(Model::Quantum, detuning, SystemParams { kappa: 0.25, v: 2.0, ..Default::default() })
                .with_axis2(axis(AxisParam::K, 0.0, 50.0, 61))
                .with_trunc(trunc(12));
            let c = SweepSpec::new(Model::Quantum, detuning, SystemParams { v: 2.0, ..Default::default() }.with_kerr(50.0))
                .with_axis2(axis(AxisParam::Kappa, 0.0, 0.5, 61))
                .with_trunc(trunc(12));
            let d = SweepSpec::new(
                Model::Quantum,
                axis(AxisParam::Delta, -6.0, 6.0, 101),
                SystemParams { kappa: 0.2, ..Default::default() }.with_kerr(1.0),
            )
            .with_axis2(axis(AxisParam::V, 0.0, 10.0, 61))
            .with_trunc(trunc(12));
            jobs.push(("fig5ab_delta_k.csv".into(), FigureJob::Sweep(a)));
            jobs.push(("fig5c_delta_kappa.csv".into(), FigureJob::Sweep(c)));
            jobs.push(("fig5d_delta_v.csv".into(), FigureJob::Sweep(d)));
        }
        other => return Err(Error::Spec(format!("no canned figure {other} (expected 2, 3, 4 or 5)"))),
    }
    Ok(jobs)
}

/// Runs every job of figure `which` and writes the files into `dir`.
pub fn run_figure(which: u8, dir: &Path, threads: Option<usize>) -> Result<Vec<PathBuf>> {
    let jobs = figure_jobs(which)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, job) in jobs {
        let path = dir.join(name);
        match job {
            FigureJob::Sweep(spec) => {
                let res = run_sweep(&spec, threads)?;
                log::info!("{}: {res}", path.display());
                write_csv(&res, &path)?;
            }
            FigureJob::Wigner(spec) => {
                let grid = run_wigner(&spec)?;
                write_wigner_csv(&spec, &grid, &path)?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

/// Steady state, reduced to `spec.mode`, sampled on the spec's grid.
pub fn run_wigner(spec: &WignerSpec) -> Result<WignerGrid> {
    let (rho, _) = steady_state_for(&spec.params, &spec.trunc)?;
    let reduced = partial_trace(&rho, spec.mode);
    wigner(&reduced, &spec.grid()?)
}

/// One row per grid point: `re, im, w`, header carrying the spec.
pub fn write_wigner_csv(spec: &WignerSpec, grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut comments = vec![
        format!("kerr-vdp {} wigner", env!("CARGO_PKG_VERSION")),
        format!("integral: {}; max: {}", format_number(grid.integral()), format_number(grid.max_value())),
        "spec begin".to_string(),
    ];
    comments.extend(spec.to_toml().lines().map(String::from));
    comments.push("spec end".into());
    let columns = ["re", "im", "w"].map(String::from);
    let mut rows = Vec::with_capacity(grid.n_re * grid.n_im);
    for j in 0..grid.n_im {
        for i in 0..grid.n_re {
            rows.push(vec![format_number(grid.re(i)), format_number(grid.im(j)), format_number(grid.value(i, j))]);
        }
    }
    write_table(path, &comments, &columns, &rows)
}
