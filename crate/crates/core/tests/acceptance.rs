//! Acceptance suite. Prints one PASS/FAIL line per criterion. Pass criterion
//! numbers as arguments to run a subset: `cargo test --test acceptance -- 3 8`.
//!
//! The exit status is non-zero on any unexpected outcome: a failure outside
//! `KNOWN_FAILURES`, or a pass inside it.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kerr_vdp::classical::{classical_rhs, long_time_amplitude, PhaseState, DEATH_THRESHOLD};
use kerr_vdp::langevin::{diffusion, drift, ensemble_average_with, noise_matrix, EnsembleOptions};
use kerr_vdp::liouvillian::{
    build_liouvillian, build_liouvillian_with_frame_shift, check_truncation, evolve_with_stats, mean_phonon,
    phonon_difference, steady_state, steady_state_for,
};
use kerr_vdp::oracles::{aronson_death_region, dense_steady_oracle, single_vdp_steady_diag};
use kerr_vdp::sweep::{read_csv, run_sweep, write_csv, Axis, AxisParam, Model, Observable, SweepSpec};
use kerr_vdp::{DensityMatrix, ModeIndex, SystemParams, TruncationSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget_secs: f64,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "analytic single-oscillator steady state", budget_secs: 10.0, run: analytic_oracle },
    Criterion { id: 2, name: "sparse vs dense steady state", budget_secs: 30.0, run: dense_oracle },
    Criterion { id: 3, name: "quantum revival peaks, one Kerr mode", budget_secs: 600.0, run: revival_one_kerr },
    Criterion { id: 4, name: "quantum revival peaks, two Kerr modes", budget_secs: 600.0, run: revival_two_kerr },
    Criterion { id: 5, name: "semiclassical single peak", budget_secs: 900.0, run: semiclassical_single_peak },
    Criterion { id: 6, name: "noise-induced Kerr suppression", budget_secs: 300.0, run: noise_suppression },
    Criterion { id: 7, name: "classical amplitude-death window", budget_secs: 300.0, run: death_window },
    Criterion { id: 8, name: "symmetry suite", budget_secs: 120.0, run: symmetries },
    Criterion { id: 9, name: "two-photon-loss asymmetry trend", budget_secs: 120.0, run: kappa_asymmetry },
    Criterion { id: 10, name: "numerical contracts", budget_secs: 120.0, run: numerical_contracts },
];

/// Criteria that fail for a documented reason. Criterion 1: at G/kappa = 5 the
/// n_max = 15 cutoff leaves a 1.6e-6 truncation error against the series.
const KNOWN_FAILURES: [u32; 1] = [1];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (mut passed, mut failed, mut unexpected) = (0, 0, Vec::new());
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        let secs = start.elapsed().as_secs_f64();
        let in_budget = secs < c.budget_secs;
        let pass = result.pass && in_budget;
        if pass {
            passed += 1;
        } else {
            failed += 1;
        }
        let known = KNOWN_FAILURES.contains(&c.id);
        if pass == known {
            unexpected.push(c.id);
        }
        let mut budget_note = if in_budget { String::new() } else { " [over runtime budget]".to_string() };
        if known && !pass {
            budget_note.push_str(" [known failure]");
        }
        println!(
            "criterion {:>2} {} {} ({secs:.1} s of {:.0} s){budget_note}: {}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.budget_secs,
            result.detail
        );
    }
    println!("acceptance: {passed} passed, {failed} failed");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------------------
// helpers

fn params(delta: f64, k1: f64, k2: f64, kappa: f64, v: f64) -> SystemParams {
    SystemParams::new(delta, k1, k2, 1.0, kappa, v).expect("valid parameters")
}

fn trunc(n: usize) -> TruncationSpec {
    TruncationSpec::symmetric(n).expect("valid truncation")
}

/// Marginal Fock populations of `mode`.
fn marginal(rho: &DensityMatrix, mode: ModeIndex) -> Vec<f64> {
    let t = *rho.trunc();
    let mut p = vec![0.0; t.dim_of(mode)];
    for i in 0..t.dim() {
        let (n1, n2) = t.occupations(i);
        p[if mode == ModeIndex::One { n1 } else { n2 }] += rho.get(i, i).re;
    }
    p
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Interior strict local maxima (a plateau counts once, at its left end).
fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).collect()
}

/// Index of the key col of peak `i`: the higher of the lowest points on each
/// side before the curve rises above `y[i]` (or reaches the scan edge).
fn key_col(y: &[f64], i: usize) -> usize {
    let side = |range: Box<dyn Iterator<Item = usize>>| {
        let mut lowest = i;
        for j in range {
            if y[j] > y[i] {
                break;
            }
            if y[j] < y[lowest] {
                lowest = j;
            }
        }
        lowest
    };
    let left = side(Box::new((0..i).rev()));
    let right = side(Box::new(i + 1..y.len()));
    if y[left] >= y[right] {
        left
    } else {
        right
    }
}

/// Local maxima whose prominence exceeds three combined standard errors.
fn significant_maxima(y: &[f64], se: &[f64]) -> Vec<usize> {
    local_maxima(y)
        .into_iter()
        .filter(|&i| {
            let c = key_col(y, i);
            y[i] - y[c] > 3.0 * se[i].hypot(se[c])
        })
        .collect()
}

/// Vertex of a least-squares parabola through the contiguous run of points
/// around the maximum that lie within three combined standard errors of it.
fn peak_location(x: &[f64], y: &[f64], se: &[f64]) -> f64 {
    let top = (0..y.len()).fold(0, |b, i| if y[i] > y[b] { i } else { b });
    let near = |j: usize| y[top] - y[j] <= 3.0 * se[top].hypot(se[j]);
    let (mut lo, mut hi) = (top, top);
    while lo > 0 && near(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < y.len() && near(hi + 1) {
        hi += 1;
    }
    if hi - lo < 2 {
        return x[top];
    }
    let xc = x[top];
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for j in lo..=hi {
        let u = x[j] - xc;
        let basis = [1.0, u, u * u];
        for a in 0..3 {
            r[a] += basis[a] * y[j];
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
        }
    }
    let c = solve3(m, r);
    if c[2] >= 0.0 {
        return x[top];
    }
    (xc - c[1] / (2.0 * c[2])).clamp(x[lo], x[hi])
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        x[k] = (r[k] - (k + 1..3).map(|j| m[k][j] * x[j]).sum::<f64>()) / m[k][k];
    }
    x
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// criteria

fn analytic_oracle() -> Outcome {
    let n_max = 15;
    let t = trunc(n_max);
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [0.5, 2.0, 5.0] {
        let oracle = single_vdp_steady_diag(r, n_max).unwrap().probabilities;
        let mut diags = Vec::new();
        let mut dev = 0.0f64;
        for k in [0.0, 1.0, 50.0] {
            let p = params(0.0, k, k, 1.0 / r, 0.0);
            let (rho, _) = steady_state_for(&p, &t).unwrap();
            for mode in [ModeIndex::One, ModeIndex::Two] {
                dev = dev.max(max_dev(&marginal(&rho, mode), &oracle));
            }
            diags.push((0..t.dim()).map(|i| rho.get(i, i).re).collect::<Vec<_>>());
        }
        let kerr_spread = diags[1..].iter().map(|d| max_dev(d, &diags[0])).fold(0.0, f64::max);
        ok &= dev < 1e-8 && kerr_spread < 1e-10;
        parts.push(format!("G/kappa {r}: |diag - oracle| {dev:.2e}, Kerr spread {kerr_spread:.1e}"));
    }
    // the cutoff error at G/kappa = 5 shrinks with n_max
    let oracle = |n| single_vdp_steady_diag(5.0, n).unwrap().probabilities;
    let study: Vec<String> = [18usize, 21, 25]
        .iter()
        .map(|&n| {
            let (rho, _) = steady_state_for(&params(0.0, 0.0, 0.0, 0.2, 0.0), &trunc(n)).unwrap();
            format!("{n}: {:.1e}", max_dev(&marginal(&rho, ModeIndex::One), &oracle(n)))
        })
        .collect();
    parts.push(format!("G/kappa 5 deviation vs n_max {{{}}}", study.join(", ")));
    outcome(ok, parts.join("; "))
}

fn dense_oracle() -> Outcome {
    let t = trunc(4);
    let mut sets = vec![params(0.0, 1.0, 1.0, 0.2, 6.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..4 {
        sets.push(params(
            rng.random_range(-3.0..3.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.0..8.0),
        ));
    }
    let mut worst = 0.0f64;
    for p in &sets {
        let sparse = steady_state(&build_liouvillian(p, &t).unwrap()).unwrap();
        let dense = dense_steady_oracle(p, &t).unwrap();
        worst = worst.max(sparse.max_abs_diff(&dense));
    }
    outcome(worst < 1e-8, format!("{} parameter sets at n_max 4, max |sparse - dense| {worst:.2e}", sets.len()))
}

/// Quantum Δ scan at fixed (K₁, K₂), κ = 0, V = 8 with n_max = 6.
fn quantum_scan(k1: f64, k2: f64, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let axis = Axis::new(AxisParam::Delta, lo, hi, 201).unwrap();
    let mut spec = SweepSpec::new(Model::Quantum, axis, params(0.0, k1, k2, 0.0, 8.0))
        .with_trunc(trunc(6))
        .with_observables(vec![Observable::N1]);
    spec.quantum.auto_escalate = false;
    let res = run_sweep(&spec, None).unwrap();
    (res.column("delta").unwrap(), res.column("n1").unwrap(), res.n_flagged())
}

fn has_max_near(x: &[f64], maxima: &[usize], target: f64, step: f64) -> Option<usize> {
    maxima.iter().copied().find(|&i| (x[i] - target).abs() <= step * (1.0 + 1e-9))
}

fn revival_one_kerr() -> Outcome {
    let (x, y, flagged) = quantum_scan(50.0, 0.0, 0.0, 200.0);
    let maxima = local_maxima(&y);
    let step = x[1] - x[0];
    let p50 = has_max_near(&x, &maxima, 50.0, step);
    let p150 = has_max_near(&x, &maxima, 150.0, step);
    let mid = y[x.iter().position(|&d| d == 100.0).unwrap()];
    let ok = match (p50, p150) {
        (Some(a), Some(b)) => mid < y[a] && mid < y[b],
        _ => false,
    };
    let at: Vec<f64> = maxima.iter().map(|&i| x[i]).collect();
    outcome(
        ok && flagged == 0,
        format!("local maxima at delta {{{}}}, <n1>(100) = {mid:.4}, truncation-flagged points {flagged}", fmt_list(&at)),
    )
}

fn revival_two_kerr() -> Outcome {
    let (x, y, flagged) = quantum_scan(50.0, 50.0, -150.0, 150.0);
    let maxima = local_maxima(&y);
    let step = x[1] - x[0];
    let ok = [-100.0, 0.0, 100.0].iter().all(|&t| has_max_near(&x, &maxima, t, step).is_some());
    let at: Vec<f64> = maxima.iter().map(|&i| x[i]).collect();
    outcome(ok && flagged == 0, format!("local maxima at delta {{{}}} (grid step {step})", fmt_list(&at)))
}

fn semiclassical_scan(k2: f64, v: f64, lo: f64, hi: f64, n: usize, average_time: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let axis = Axis::new(AxisParam::Delta, lo, hi, n).unwrap();
    let ensemble = EnsembleOptions { n_traj: 256, dt: 4e-3, burn_in: 50.0, average_time, ..Default::default() };
    let spec = SweepSpec::new(Model::Semiclassical, axis, params(0.0, 50.0, k2, 0.0, v))
        .with_ensemble(ensemble)
        .with_seed(7)
        .with_observables(vec![Observable::AmpSq1]);
    let res = run_sweep(&spec, None).unwrap();
    assert_eq!(res.n_failed(), 0, "semiclassical points failed");
    (res.column("delta").unwrap(), res.column("amp_sq_1").unwrap(), res.column("amp_sq_1_se").unwrap())
}

fn semiclassical_single_peak() -> Outcome {
    let (xa, ya, sa) = semiclassical_scan(0.0, 8.0, 0.0, 200.0, 21, 250.0);
    let (xc, yc, sc) = semiclassical_scan(50.0, 8.0, -150.0, 150.0, 31, 250.0);
    let (xb, yb, sb) = semiclassical_scan(0.0, 2.0, 0.0, 300.0, 16, 3000.0);
    let peaks_a = significant_maxima(&ya, &sa);
    let peaks_c = significant_maxima(&yc, &sc);
    let peaks_b = significant_maxima(&yb, &sb);
    let loc_v8 = peak_location(&xa, &ya, &sa);
    let loc_v2 = peak_location(&xb, &yb, &sb);
    let at = |x: &[f64], p: &[usize]| fmt_list(&p.iter().map(|&i| x[i]).collect::<Vec<_>>());
    let ok = peaks_a.len() == 1 && peaks_c.len() == 1 && loc_v2 > loc_v8;
    outcome(
        ok,
        format!(
            "V=8 K2=0: significant maxima at {{{}}}; V=8 K2=50: at {{{}}}; peak location V=8 {loc_v8:.1} vs V=2 {loc_v2:.1} \
             (V=2 significant maxima: {{{}}})",
            at(&xa, &peaks_a),
            at(&xc, &peaks_c),
            at(&xb, &peaks_b)
        ),
    )
}

fn noise_suppression() -> Outcome {
    let base = params(0.0, 0.0, 0.0, 0.2, 6.0);
    let t = trunc(12);
    let quantum = |k: f64| {
        let (rho, _) = steady_state_for(&base.with_kerr(k), &t).unwrap();
        (mean_phonon(&rho, ModeIndex::One), check_truncation(&rho, &t))
    };
    let ((q0, c0), (q1, c1)) = (quantum(0.0), quantum(1.0));
    let opts = EnsembleOptions { n_traj: 256, dt: 4e-3, burn_in: 50.0, average_time: 250.0, seed: 1, ..Default::default() };
    let s0 = ensemble_average_with(&base, &opts).unwrap();
    let s1 = ensemble_average_with(&base.with_kerr(1.0), &opts).unwrap();
    let gap = s0.mean_amp_sq_1 - s1.mean_amp_sq_1;
    let combined = s0.standard_error_1.hypot(s1.standard_error_1);
    let c_0 = long_time_amplitude(&base, 8).unwrap();
    let c_1 = long_time_amplitude(&base.with_kerr(1.0), 8).unwrap();
    let ok = q1 < q0 && gap > 3.0 * combined && (c_0 - c_1).abs() < 1e-8;
    outcome(
        ok,
        format!(
            "quantum <n1> {q0:.4} -> {q1:.4} (truncation {:.1e}); semiclassical {:.4} -> {:.4} (gap {:.1} SE); \
             classical {c_0:.10} vs {c_1:.10}",
            c0.max(c1),
            s0.mean_amp_sq_1,
            s1.mean_amp_sq_1,
            gap / combined
        ),
    )
}

fn death_window() -> Outcome {
    let (n_delta, n_v) = (41, 41);
    let axis_d = Axis::new(AxisParam::Delta, 0.0, 8.0, n_delta).unwrap();
    let axis_v = Axis::new(AxisParam::V, 0.0, 12.0, n_v).unwrap();
    let spec = SweepSpec::new(Model::Classical, axis_d, params(0.0, 0.0, 0.0, 0.2, 0.0)).with_axis2(axis_v);
    let res = run_sweep(&spec, None).unwrap();
    let amp = res.column("amp_sq_1").unwrap();
    let (ds, vs) = (axis_d.values(), axis_v.values());
    let analytic = |i: usize, j: usize| aronson_death_region(1.0, vs[j], ds[i]);
    let (mut checked, mut mismatched) = (0, Vec::new());
    for i in 0..n_delta {
        for j in 0..n_v {
            let near_boundary = (i.saturating_sub(1)..=(i + 1).min(n_delta - 1))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(n_v - 1)).map(move |b| (a, b)))
                .any(|(a, b)| analytic(a, b) != analytic(i, j));
            if near_boundary {
                continue;
            }
            checked += 1;
            let dead = amp[i * n_v + j] < DEATH_THRESHOLD;
            if dead != analytic(i, j) {
                mismatched.push(format!("({}, {})", ds[i], vs[j]));
            }
        }
    }
    outcome(
        mismatched.is_empty() && res.n_failed() == 0,
        format!("{checked} of {} grid points away from the boundary, mismatches: [{}]", n_delta * n_v, mismatched.join(" ")),
    )
}

fn symmetries() -> Outcome {
    // κ = 0, K₁ = K₂: equal populations
    let t = trunc(14);
    let mut eq_dev = 0.0f64;
    for i in 0..=12 {
        let delta = -150.0 + 25.0 * i as f64;
        let (rho, _) = steady_state_for(&params(delta, 50.0, 50.0, 0.0, 8.0), &t).unwrap();
        eq_dev = eq_dev.max(phonon_difference(&rho).abs());
    }
    // Δ → −Δ swaps the modes
    let t = trunc(10);
    let mut swap_dev = 0.0f64;
    for (delta, k, kappa, v) in [(3.0, 1.0, 0.2, 6.0), (-100.0, 50.0, 0.25, 2.0), (1.7, 0.5, 0.5, 1.0)] {
        let (a, _) = steady_state_for(&params(delta, k, k, kappa, v), &t).unwrap();
        let (b, _) = steady_state_for(&params(-delta, k, k, kappa, v), &t).unwrap();
        swap_dev = swap_dev
            .max((mean_phonon(&a, ModeIndex::One) - mean_phonon(&b, ModeIndex::Two)).abs())
            .max((mean_phonon(&a, ModeIndex::Two) - mean_phonon(&b, ModeIndex::One)).abs());
    }
    // common frequency shift of both modes
    let t = trunc(8);
    let mut shift_dev = 0.0f64;
    let p = params(2.0, 1.0, 0.5, 0.2, 6.0);
    let base = steady_state(&build_liouvillian(&p, &t).unwrap()).unwrap();
    for shift in [-7.5, 3.0, 40.0] {
        let shifted = steady_state(&build_liouvillian_with_frame_shift(&p, &t, shift).unwrap()).unwrap();
        for mode in [ModeIndex::One, ModeIndex::Two] {
            shift_dev = shift_dev.max((mean_phonon(&base, mode) - mean_phonon(&shifted, mode)).abs());
        }
    }
    let ok = eq_dev < 1e-10 && swap_dev < 1e-10 && shift_dev < 1e-10;
    outcome(
        ok,
        format!("|n1 - n2| at kappa 0: {eq_dev:.1e}; reflection: {swap_dev:.1e}; frame shift: {shift_dev:.1e}"),
    )
}

fn kappa_asymmetry() -> Outcome {
    let mut diffs = Vec::new();
    let mut checks = Vec::new();
    for (kappa, n_max) in [(0.0, 34), (0.1, 16), (0.25, 16), (0.5, 16)] {
        let t = trunc(n_max);
        let (rho, _) = steady_state_for(&params(-100.0, 50.0, 50.0, kappa, 2.0), &t).unwrap();
        diffs.push(phonon_difference(&rho));
        checks.push(check_truncation(&rho, &t));
    }
    let increasing = diffs.windows(2).all(|w| w[1] > w[0]);
    let ok = diffs[0].abs() < 1e-10 && increasing;
    outcome(
        ok,
        format!(
            "<n1 - n2> over kappa {{0, 0.1, 0.25, 0.5}}: {} (max truncation {:.1e})",
            diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", "),
            checks.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn numerical_contracts() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let p = params(0.0, 1.0, 1.0, 0.2, 6.0);
    let t = trunc(6);
    let l = build_liouvillian(&p, &t).unwrap();
    let (_, stats) = evolve_with_stats(&DensityMatrix::vacuum(t), &l, 100.0, 1e-9).unwrap();
    ok &= stats.trace_drift < 1e-9;
    parts.push(format!("trace drift {:.1e}", stats.trace_drift));

    let mut min_eig = f64::INFINITY;
    for (p, n) in [
        (params(0.0, 1.0, 1.0, 0.2, 6.0), 12),
        (params(50.0, 50.0, 0.0, 0.0, 8.0), 6),
        (params(-100.0, 50.0, 50.0, 0.25, 2.0), 14),
        (params(3.0, 0.0, 0.0, 0.2, 2.0), 12),
    ] {
        let (_, report) = steady_state_for(&p, &trunc(n)).unwrap();
        min_eig = min_eig.min(report.min_eigenvalue);
    }
    ok &= min_eig >= -1e-8;
    parts.push(format!("min eigenvalue {min_eig:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut random_state = |scale: f64| {
        PhaseState::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    };
    let p = params(1.3, 0.7, 1.9, 0.2, 6.0);
    let mut fact = 0.0f64;
    for _ in 0..1000 {
        let s = random_state(3.0);
        let d = diffusion(&s, &p);
        let sigma = noise_matrix(&d).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ss: f64 = (0..4).map(|k| sigma[i][k] * sigma[j][k]).sum();
                fact = fact.max((ss - d.0[i][j]).abs());
            }
        }
    }
    ok &= fact < 1e-12;
    parts.push(format!("sigma sigma^T - D {fact:.1e}"));

    let mut drift_dev = 0.0f64;
    for _ in 0..100 {
        let s = random_state(2.0);
        let mu = drift(&s, &p).to_array();
        let f = classical_rhs(&s, &p).to_array();
        let x = s.to_array();
        for k in 0..4 {
            drift_dev = drift_dev.max((mu[k] - f[k] - p.kappa * x[k]).abs());
        }
    }
    ok &= drift_dev < 1e-12;
    parts.push(format!("drift - rhs - kappa X {drift_dev:.1e}"));

    let identical = thread_independence();
    ok &= identical;
    parts.push(format!("thread-count independent files: {identical}"));
    outcome(ok, parts.join("; "))
}

fn thread_independence() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let d = Axis::new(AxisParam::Delta, -2.0, 2.0, 9).unwrap();
    let v = Axis::new(AxisParam::V, 1.0, 4.0, 3).unwrap();
    let base = params(0.0, 1.0, 1.0, 0.3, 0.0);
    let specs = [
        SweepSpec::new(Model::Quantum, d, base).with_axis2(v).with_trunc(trunc(6)),
        SweepSpec::new(Model::Semiclassical, d, base).with_axis2(v).with_ensemble(EnsembleOptions {
            n_traj: 16,
            dt: 5e-3,
            burn_in: 5.0,
            average_time: 10.0,
            ..Default::default()
        }),
        SweepSpec::new(Model::Classical, d, base).with_axis2(v),
    ];
    specs.iter().enumerate().all(|(k, spec)| {
        let files: Vec<Vec<u8>> = [1usize, 3]
            .iter()
            .map(|&threads| {
                let path = dir.path().join(format!("{k}_{threads}.csv"));
                write_csv(&run_sweep(spec, Some(threads)).unwrap(), &path).unwrap();
                assert_eq!(read_csv(&path).unwrap().rows.len(), spec.n_points());
                std::fs::read(&path).unwrap()
            })
            .collect();
        files[0] == files[1]
    })
}
