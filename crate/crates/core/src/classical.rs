//! Noiseless mean-field dynamics of the coupled oscillators.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeIndex;
use crate::ode;
use crate::params::SystemParams;

/// Cartesian amplitudes α_m = x_m + i y_m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl PhaseState {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn from_alphas(a1: C64, a2: C64) -> Self {
        Self::new(a1.re, a1.im, a2.re, a2.im)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn alpha(&self, mode: ModeIndex) -> C64 {
        match mode {
            ModeIndex::One => C64::new(self.x1, self.y1),
            ModeIndex::Two => C64::new(self.x2, self.y2),
        }
    }

    pub fn amp_sq(&self, mode: ModeIndex) -> f64 {
        self.alpha(mode).norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Both amplitudes multiplied by e^{iθ}.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = C64::from_polar(1.0, theta);
        Self::from_alphas(self.alpha(ModeIndex::One) * r, self.alpha(ModeIndex::Two) * r)
    }
}

/// ∂_t α_m = −i(ω_m + 2K_m|α_m|²)α_m + (G/2)α_m − κ|α_m|²α_m + (V/2)(α_m̄ − α_m).
pub fn classical_rhs(state: &PhaseState, params: &SystemParams) -> PhaseState {
    let [x1, y1, x2, y2] = state.to_array();
    let (r1, r2) = (x1 * x1 + y1 * y1, x2 * x2 + y2 * y2);
    let w1 = params.omega(ModeIndex::One) + 2.0 * params.k1 * r1;
    let w2 = params.omega(ModeIndex::Two) + 2.0 * params.k2 * r2;
    let g1 = 0.5 * params.gain - params.kappa * r1 - 0.5 * params.v;
    let g2 = 0.5 * params.gain - params.kappa * r2 - 0.5 * params.v;
    let c = 0.5 * params.v;
    PhaseState::new(
        w1 * y1 + g1 * x1 + c * x2,
        -w1 * x1 + g1 * y1 + c * y2,
        w2 * y2 + g2 * x2 + c * x1,
        -w2 * x2 + g2 * y2 + c * y1,
    )
}

/// ω̃₂ − ω̃₁ with ω̃_m = ω_m + 2K_m|α_m|².
pub fn effective_detuning(state: &PhaseState, params: &SystemParams) -> f64 {
    let w = |m: ModeIndex| params.omega(m) + 2.0 * params.kerr(m) * state.amp_sq(m);
    w(ModeIndex::Two) - w(ModeIndex::One)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&PhaseState> {
        self.states.last()
    }
}

/// Adaptive Dormand–Prince integration; every accepted step is recorded.
pub fn integrate_classical(state0: &PhaseState, params: &SystemParams, t_final: f64, tol: f64) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run(state0, params, 0.0, t_final, tol, |t, s| {
        traj.times.push(t);
        traj.states.push(s);
    })?;
    Ok(traj)
}

fn run(
    state0: &PhaseState,
    params: &SystemParams,
    t0: f64,
    t_final: f64,
    tol: f64,
    mut observer: impl FnMut(f64, PhaseState),
) -> Result<PhaseState> {
    if !(t_final > t0 && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!("t_final must be > {t0}, got {t_final}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be > 0, got {tol}")));
    }
    params.validate()?;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy.copy_from_slice(&classical_rhs(&PhaseState::from_slice(y), params).to_array());
    };
    let (y, _) = ode::integrate(rhs, t0, &state0.to_array(), t_final, tol, |t, y| {
        observer(t, PhaseState::from_slice(y))
    })?;
    Ok(PhaseState::from_slice(&y))
}

/// Controls for [`long_time_amplitude_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTimeOptions {
    pub t_final: f64,
    /// Trailing fraction of the run used for the time average.
    pub average_fraction: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LongTimeOptions {
    fn default() -> Self {
        Self {
            t_final: 500.0,
            average_fraction: 0.2,
            tol: 1e-10,
            seed: 20_240_601,
        }
    }
}

/// |α₁|² below this value marks the rest state as attracting.
pub const DEATH_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_STARTS: usize = 8;

/// Start `index` of the multi-start scan: uniform in the disk |α_m| ≤ 2√(G/κ')
/// with κ' = max(κ, 0.05G).
pub fn random_start(params: &SystemParams, seed: u64, index: u64) -> PhaseState {
    let kappa_eff = params.kappa.max(0.05 * params.gain);
    let radius = 2.0 * (params.gain / kappa_eff).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
    let mut disk = || {
        let r = radius * rng.random::<f64>().sqrt();
        C64::from_polar(r, 2.0 * PI * rng.random::<f64>())
    };
    let (a1, a2) = (disk(), disk());
    PhaseState::from_alphas(a1, a2)
}

pub fn long_time_amplitude(params: &SystemParams, n_starts: usize) -> Result<f64> {
    long_time_amplitude_with(params, n_starts, &LongTimeOptions::default())
}

/// Maximum over seeded starts of the trailing time average of |α₁|².
pub fn long_time_amplitude_with(params: &SystemParams, n_starts: usize, opts: &LongTimeOptions) -> Result<f64> {
    if n_starts == 0 {
        return Err(Error::InvalidParams("n_starts must be >= 1".into()));
    }
    if !(opts.average_fraction > 0.0 && opts.average_fraction <= 1.0) {
        return Err(Error::InvalidParams("average_fraction must lie in (0, 1]".into()));
    }
    let t_avg = opts.t_final * (1.0 - opts.average_fraction);
    let mut best = f64::NEG_INFINITY;
    for start in 0..n_starts {
        let s0 = random_start(params, opts.seed, start as u64);
        let mid = if t_avg > 0.0 { run(&s0, params, 0.0, t_avg, opts.tol, |_, _| {})? } else { s0 };
        let mut acc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        run(&mid, params, t_avg, opts.t_final, opts.tol, |t, s| {
            let v = s.amp_sq(ModeIndex::One);
            if let Some((tp, vp)) = prev {
                acc += 0.5 * (t - tp) * (v + vp);
            }
            prev = Some((t, v));
        })?;
        best = best.max(acc / (opts.t_final - t_avg));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(delta: f64, k: f64, kappa: f64, v: f64) -> SystemParams {
        SystemParams::new(delta, k, k, 1.0, kappa, v).unwrap()
    }

    #[test]
    fn rhs_fixed_points() {
        assert_eq!(classical_rhs(&PhaseState::default(), &p(3.0, 1.0, 0.2, 2.0)), PhaseState::default());
        // radial velocity vanishes on |α|² = G/(2κ)
        let s = PhaseState::new(2.5f64.sqrt(), 0.0, 0.0, 0.0);
        let f = classical_rhs(&s, &p(0.0, 0.7, 0.2, 0.0));
        assert!((f.x1 * s.x1 + f.y1 * s.y1).abs() < 1e-14);
        // equal amplitudes switch the coupling off
        let a = C64::new(0.3, -1.1);
        let sym = PhaseState::from_alphas(a, a);
        let with = classical_rhs(&sym, &p(0.0, 0.5, 0.2, 4.0));
        let without = classical_rhs(&sym, &p(0.0, 0.5, 0.2, 0.0));
        for (u, v) in with.to_array().iter().zip(without.to_array()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn effective_detuning_cases() {
        let s = PhaseState::new(1.0, 1.0, 0.3, -0.2);
        assert_eq!(effective_detuning(&s, &p(2.5, 0.0, 0.2, 1.0)), 2.5);
        let s = PhaseState::from_alphas(C64::from_polar(1.3, 0.4), C64::from_polar(1.3, 2.0));
        assert!((effective_detuning(&s, &p(2.5, 0.8, 0.2, 1.0)) - 2.5).abs() < 1e-12);
        let params = SystemParams { k1: 1.0, ..Default::default() };
        let s = PhaseState::new(1.0, 1.0, 0.4, 0.9);
        assert_eq!(effective_detuning(&s, &params), -4.0);
    }

    #[test]
    fn uncoupled_limit_cycle() {
        let traj = integrate_classical(&PhaseState::new(0.1, 0.0, 0.1, 0.0), &p(0.0, 0.0, 0.2, 0.0), 200.0, 1e-10).unwrap();
        let last = traj.last().unwrap();
        assert!((last.amp_sq(ModeIndex::One) - 2.5).abs() < 1e-6);
        assert_eq!(*traj.times.last().unwrap(), 200.0);
    }

    #[test]
    fn death_and_survival() {
        let s0 = PhaseState::new(0.01, -0.02, 0.015, 0.005);
        let dead = integrate_classical(&s0, &p(5.0, 0.0, 0.2, 6.0), 500.0, 1e-10).unwrap();
        assert!(dead.last().unwrap().amp_sq(ModeIndex::One) < 1e-10);
        let alive = integrate_classical(&s0, &p(5.0, 0.0, 0.2, 14.0), 500.0, 1e-10).unwrap();
        assert!(alive.last().unwrap().amp_sq(ModeIndex::One) > 0.1);
    }

    #[test]
    fn phase_rotation_commutes_with_flow() {
        let params = SystemParams::new(1.5, 0.4, 0.9, 1.0, 0.2, 0.8).unwrap();
        let s0 = PhaseState::new(0.5, 0.2, -0.3, 0.7);
        let a = integrate_classical(&s0, &params, 20.0, 1e-11).unwrap();
        let b = integrate_classical(&s0.rotated(1.1), &params, 20.0, 1e-11).unwrap();
        let ra = a.last().unwrap().rotated(1.1);
        let rb = b.last().unwrap();
        for (u, v) in ra.to_array().iter().zip(rb.to_array()) {
            assert!((u - v).abs() < 1e-7);
        }
    }

    #[test]
    fn long_time_amplitude_regimes() {
        assert!(long_time_amplitude(&p(5.0, 0.0, 0.2, 6.0), 8).unwrap() < DEATH_THRESHOLD);
        let sync = long_time_amplitude(&p(0.0, 0.0, 0.2, 6.0), 8).unwrap();
        assert!((sync - 2.5).abs() < 0.05 * 2.5);
        assert!(long_time_amplitude(&p(1.0, 0.0, 0.2, 1.0), 0).is_err());
    }

    #[test]
    fn starts_lie_in_the_disk() {
        let params = p(0.0, 0.0, 0.2, 1.0);
        for i in 0..50 {
            let s = random_start(&params, 7, i);
            assert!(s.alpha(ModeIndex::One).norm() <= 2.0 * 5f64.sqrt());
            assert!(s.alpha(ModeIndex::Two).norm() <= 2.0 * 5f64.sqrt());
        }
        assert_eq!(random_start(&params, 7, 3), random_start(&params, 7, 3));
    }
}
