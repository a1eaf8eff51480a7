//! Semiclassical model: truncated Fokker–Planck drift and diffusion in
//! Cartesian coordinates, simulated as an ensemble of Langevin trajectories.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::fock::ModeIndex;
use crate::params::SystemParams;

/// Eigenvalues of D in [−CLAMP_TOL, 0) are set to zero; below that the model is rejected.
pub const CLAMP_TOL: f64 = 1e-9;
/// A trajectory with |X| above this bound is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e3;
/// Largest tolerated fraction of failed trajectories in an ensemble.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftVector {
    pub mu_x1: f64,
    pub mu_y1: f64,
    pub mu_x2: f64,
    pub mu_y2: f64,
}

impl DriftVector {
    pub fn to_array(self) -> [f64; 4] {
        [self.mu_x1, self.mu_y1, self.mu_x2, self.mu_y2]
    }
}

/// 4×4 real symmetric matrix in the ordering (x₁, y₁, x₂, y₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub [[f64; 4]; 4]);

impl DiffusionMatrix {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        (0..4).for_each(|i| m[i][i] = 1.0);
        Self(m)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.0[i][j] == self.0[j][i]))
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        let m = Mat::from_fn(4, 4, |i, j| self.0[i][j]);
        let vals = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::InvalidState(format!("eigenvalue solver failed: {e:?}")))?;
        Ok([vals[0], vals[1], vals[2], vals[3]])
    }
}

/// Drift μ. μ_x = ω̃y + [G/2 − κ(r² − 1) − V/2]x + (V/2)x̄ with ω̃ = ω + 2Kr²,
/// and μ_y likewise with (y, −x).
pub fn drift(state: &PhaseState, params: &SystemParams) -> DriftVector {
    let [x1, y1, x2, y2] = state.to_array();
    let component = |mode: ModeIndex, x: f64, y: f64, xo: f64, yo: f64| {
        let r = x * x + y * y;
        let w = params.omega(mode) + 2.0 * params.kerr(mode) * r;
        let g = 0.5 * params.gain - params.kappa * (r - 1.0) - 0.5 * params.v;
        let c = 0.5 * params.v;
        (w * y + g * x + c * xo, -w * x + g * y + c * yo)
    };
    let (mu_x1, mu_y1) = component(ModeIndex::One, x1, y1, x2, y2);
    let (mu_x2, mu_y2) = component(ModeIndex::Two, x2, y2, x1, y1);
    DriftVector { mu_x1, mu_y1, mu_x2, mu_y2 }
}

/// ν_m = G/2 + κ(2|α_m|² − 1) + V/2.
fn nu(params: &SystemParams, amp_sq: f64) -> f64 {
    0.5 * params.gain + params.kappa * (2.0 * amp_sq - 1.0) + 0.5 * params.v
}

/// D = ½ [[ν₁, 0, −V/2, 0], [0, ν₁, 0, −V/2], [−V/2, 0, ν₂, 0], [0, −V/2, 0, ν₂]].
pub fn diffusion(state: &PhaseState, params: &SystemParams) -> DiffusionMatrix {
    let n1 = 0.5 * nu(params, state.amp_sq(ModeIndex::One));
    let n2 = 0.5 * nu(params, state.amp_sq(ModeIndex::Two));
    let c = -0.25 * params.v;
    DiffusionMatrix([
        [n1, 0.0, c, 0.0],
        [0.0, n1, 0.0, c],
        [c, 0.0, n2, 0.0],
        [0.0, c, 0.0, n2],
    ])
}

/// Symmetric square root σ = U√ΛUᵀ, so that σσᵀ = D.
pub fn noise_matrix(d: &DiffusionMatrix) -> Result<[[f64; 4]; 4]> {
    if !d.is_symmetric() {
        return Err(Error::InvalidState("diffusion matrix is not symmetric".into()));
    }
    let m = Mat::from_fn(4, 4, |i, j| d.0[i][j]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidState(format!("eigen decomposition failed: {e:?}")))?;
    let u = evd.U();
    let s = evd.S().column_vector();
    let mut roots = [0.0; 4];
    for k in 0..4 {
        let lambda = s[k];
        if lambda < -CLAMP_TOL {
            return Err(Error::IndefiniteDiffusion { eigenvalue: lambda });
        }
        roots[k] = lambda.max(0.0).sqrt();
    }
    let mut sigma = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let v: f64 = (0..4).map(|k| u[(i, k)] * roots[k] * u[(j, k)]).sum();
            sigma[i][j] = v;
            sigma[j][i] = v;
        }
    }
    Ok(sigma)
}

/// √ of the 2×2 mode block ½[[ν₁, −V/2], [−V/2, ν₂]]; σ = block ⊗ I₂.
fn block_sqrt(a: f64, b: f64, c: f64) -> Result<[f64; 3]> {
    let half_tr = 0.5 * (a + c);
    let lambda_min = half_tr - (0.25 * (a - c) * (a - c) + b * b).sqrt();
    if lambda_min < -CLAMP_TOL {
        return Err(Error::IndefiniteDiffusion { eigenvalue: lambda_min });
    }
    let det = (a * c - b * b).max(0.0);
    let s = det.sqrt();
    let t = (a + c + 2.0 * s).max(0.0).sqrt();
    if t == 0.0 {
        return Ok([0.0; 3]);
    }
    Ok([(a + s) / t, b / t, (c + s) / t])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// X ← X + μ dt + σ √dt ξ.
    EulerMaruyama,
    /// Euler–Maruyama for the non-rotating part of μ and the noise, followed by
    /// an exact rotation of each α_m by −ω̃_m dt at the pre-step amplitude.
    #[default]
    RotatingEulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub scheme: Scheme,
    /// Record every n-th step (the initial and final states are always kept).
    pub record_every: usize,
    /// Drop the noise term (deterministic limit).
    pub noiseless: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::default(),
            record_every: 1,
            noiseless: false,
        }
    }
}

struct Stepper<'a> {
    params: &'a SystemParams,
    dt: f64,
    sqrt_dt: f64,
    scheme: Scheme,
    noiseless: bool,
}

impl Stepper<'_> {
    fn step(&self, x: &mut [f64; 4], rng: &mut ChaCha8Rng) -> Result<()> {
        let p = self.params;
        let (r1, r2) = (x[0] * x[0] + x[1] * x[1], x[2] * x[2] + x[3] * x[3]);
        let mut noise = [0.0; 4];
        if !self.noiseless {
            let [s11, s12, s22] = block_sqrt(0.5 * nu(p, r1), -0.25 * p.v, 0.5 * nu(p, r2))?;
            let xi: [f64; 4] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            noise = [
                self.sqrt_dt * (s11 * xi[0] + s12 * xi[2]),
                self.sqrt_dt * (s11 * xi[1] + s12 * xi[3]),
                self.sqrt_dt * (s12 * xi[0] + s22 * xi[2]),
                self.sqrt_dt * (s12 * xi[1] + s22 * xi[3]),
            ];
        }
        let w1 = p.omega(ModeIndex::One) + 2.0 * p.k1 * r1;
        let w2 = p.omega(ModeIndex::Two) + 2.0 * p.k2 * r2;
        let g1 = 0.5 * p.gain - p.kappa * (r1 - 1.0) - 0.5 * p.v;
        let g2 = 0.5 * p.gain - p.kappa * (r2 - 1.0) - 0.5 * p.v;
        let c = 0.5 * p.v;
        let radial = [g1 * x[0] + c * x[2], g1 * x[1] + c * x[3], g2 * x[2] + c * x[0], g2 * x[3] + c * x[1]];
        match self.scheme {
            Scheme::EulerMaruyama => {
                let rot = [w1 * x[1], -w1 * x[0], w2 * x[3], -w2 * x[2]];
                for k in 0..4 {
                    x[k] += (radial[k] + rot[k]) * self.dt + noise[k];
                }
            }
            Scheme::RotatingEulerMaruyama => {
                for k in 0..4 {
                    x[k] += radial[k] * self.dt + noise[k];
                }
                for (m, w) in [(0usize, w1), (2usize, w2)] {
                    let (s, co) = (w * self.dt).sin_cos();
                    let (a, b) = (x[m], x[m + 1]);
                    // α ← α e^{−iωdt}
                    x[m] = co * a + s * b;
                    x[m + 1] = -s * a + co * b;
                }
            }
        }
        Ok(())
    }
}

fn check_args(params: &SystemParams, dt: f64, t_final: f64) -> Result<()> {
    params.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    if !(t_final >= dt && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!("t_final must be >= dt, got {t_final}")));
    }
    Ok(())
}

pub fn simulate_trajectory(
    state0: &PhaseState,
    params: &SystemParams,
    dt: f64,
    t_final: f64,
    seed: u64,
) -> Result<Trajectory> {
    simulate_trajectory_with(state0, params, dt, t_final, seed, &TrajectoryOptions::default())
}

/// One Langevin trajectory with noise drawn from a ChaCha8 stream keyed by `seed`.
pub fn simulate_trajectory_with(
    state0: &PhaseState,
    params: &SystemParams,
    dt: f64,
    t_final: f64,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<Trajectory> {
    check_args(params, dt, t_final)?;
    let steps = (t_final / dt).round() as usize;
    let every = opts.record_every.max(1);
    let stepper = Stepper {
        params,
        dt,
        sqrt_dt: dt.sqrt(),
        scheme: opts.scheme,
        noiseless: opts.noiseless,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = state0.to_array();
    let mut traj = Trajectory::default();
    traj.times.push(0.0);
    traj.states.push(*state0);
    for n in 1..=steps {
        stepper.step(&mut x, &mut rng)?;
        let s = PhaseState::from_slice(&x);
        let norm = s.norm();
        let t = n as f64 * dt;
        if !(norm <= DIVERGENCE_BOUND) {
            return Err(Error::Divergence { t, norm });
        }
        if n % every == 0 || n == steps {
            traj.times.push(t);
            traj.states.push(s);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub n_traj: usize,
    pub dt: f64,
    pub burn_in: f64,
    pub average_time: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            n_traj: 256,
            dt: 1e-3,
            burn_in: 100.0,
            average_time: 400.0,
            seed: 1,
            scheme: Scheme::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean_amp_sq_1: f64,
    pub mean_amp_sq_2: f64,
    /// Trajectories that contributed (failed ones excluded).
    pub n_trajectories: usize,
    pub n_failed: usize,
    pub burn_in_time: f64,
    pub average_time: f64,
    pub standard_error_1: f64,
    pub standard_error_2: f64,
}

/// Initial state on the uncoupled limit-cycle radius √(G/(2κ')) with random
/// phases, κ' = max(κ, 0.05G).
fn initial_state(params: &SystemParams, rng: &mut ChaCha8Rng) -> PhaseState {
    let kappa_eff = params.kappa.max(0.05 * params.gain);
    let r = (params.gain / (2.0 * kappa_eff)).sqrt();
    let a1 = C64::from_polar(r, 2.0 * PI * rng.random::<f64>());
    let a2 = C64::from_polar(r, 2.0 * PI * rng.random::<f64>());
    PhaseState::from_alphas(a1, a2)
}

/// Time averages of (|α₁|², |α₂|²) over `average_time` after `burn_in`.
fn trajectory_average(params: &SystemParams, opts: &EnsembleOptions, index: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index));
    let mut x = initial_state(params, &mut rng).to_array();
    let stepper = Stepper {
        params,
        dt: opts.dt,
        sqrt_dt: opts.dt.sqrt(),
        scheme: opts.scheme,
        noiseless: false,
    };
    let burn = (opts.burn_in / opts.dt).round() as usize;
    let avg = ((opts.average_time / opts.dt).round() as usize).max(1);
    let (mut s1, mut s2) = (0.0, 0.0);
    for n in 1..=burn + avg {
        stepper.step(&mut x, &mut rng)?;
        let (a1, a2) = (x[0] * x[0] + x[1] * x[1], x[2] * x[2] + x[3] * x[3]);
        let norm = (a1 + a2).sqrt();
        if !(norm <= DIVERGENCE_BOUND) {
            return Err(Error::Divergence { t: n as f64 * opts.dt, norm });
        }
        if n > burn {
            s1 += a1;
            s2 += a2;
        }
    }
    Ok((s1 / avg as f64, s2 / avg as f64))
}

pub fn ensemble_average(
    params: &SystemParams,
    n_traj: usize,
    dt: f64,
    burn_in: f64,
    average_time: f64,
    seed: u64,
) -> Result<EnsembleStats> {
    let opts = EnsembleOptions { n_traj, dt, burn_in, average_time, seed, ..Default::default() };
    ensemble_average_with(params, &opts)
}

/// Runs `n_traj` trajectories (seeds `seed + index`) in parallel and reduces
/// them in index order.
pub fn ensemble_average_with(params: &SystemParams, opts: &EnsembleOptions) -> Result<EnsembleStats> {
    if opts.n_traj < 2 {
        return Err(Error::InvalidParams("n_traj must be >= 2".into()));
    }
    check_args(params, opts.dt, opts.dt.max(opts.burn_in + opts.average_time))?;
    if !(opts.burn_in >= 0.0 && opts.average_time > 0.0) {
        return Err(Error::InvalidParams("burn_in must be >= 0 and average_time > 0".into()));
    }
    let results: Vec<Result<(f64, f64)>> = (0..opts.n_traj as u64)
        .into_par_iter()
        .map(|i| trajectory_average(params, opts, i))
        .collect();

    let mut ok = Vec::with_capacity(results.len());
    let mut first_error = None;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e.to_string());
                }
            }
        }
    }
    let failed = opts.n_traj - ok.len();
    if failed as f64 > MAX_FAILED_FRACTION * opts.n_traj as f64 || ok.len() < 2 {
        return Err(Error::EnsembleFailure {
            failed,
            total: opts.n_traj,
            first: first_error.unwrap_or_default(),
        });
    }
    if failed > 0 {
        log::warn!("{failed} of {} trajectories failed and were excluded", opts.n_traj);
    }
    let n = ok.len() as f64;
    let stats = |pick: fn(&(f64, f64)) -> f64| {
        let mean = ok.iter().map(pick).sum::<f64>() / n;
        let var = ok.iter().map(|v| (pick(v) - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let (m1, se1) = stats(|v| v.0);
    let (m2, se2) = stats(|v| v.1);
    Ok(EnsembleStats {
        mean_amp_sq_1: m1,
        mean_amp_sq_2: m2,
        n_trajectories: ok.len(),
        n_failed: failed,
        burn_in_time: opts.burn_in,
        average_time: opts.average_time,
        standard_error_1: se1,
        standard_error_2: se2,
    })
}
