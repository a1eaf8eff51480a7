//! Self-check suite run by `kerr-vdp verify`: each solver is compared with
//! an independent reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{long_time_amplitude, PhaseState, DEATH_THRESHOLD};
use crate::error::Result;
use crate::fock::TruncationSpec;
use crate::langevin::{diffusion, noise_matrix};
use crate::liouvillian::steady_state_for;
use crate::oracles::{aronson_death_region, dense_steady_oracle, single_vdp_steady_diag};
use crate::params::SystemParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from(name: &str, outcome: Result<(bool, String)>) -> Self {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        Self { name: name.into(), passed, detail }
    }
}

/// Uncoupled steady-state populations against the closed form.
fn analytic_steady_state() -> Result<(bool, String)> {
    let n_max = 25;
    let trunc = TruncationSpec::symmetric(n_max)?;
    let mut worst = 0.0f64;
    for r in [0.5, 2.0, 5.0] {
        let params = SystemParams { kappa: 1.0 / r, ..Default::default() };
        let (rho, _) = steady_state_for(&params, &trunc)?;
        let oracle = single_vdp_steady_diag(r, n_max)?;
        for n1 in 0..=n_max {
            let marginal: f64 = (0..=n_max).map(|n2| rho.get(trunc.index(n1, n2), trunc.index(n1, n2)).re).sum();
            worst = worst.max((marginal - oracle.probabilities[n1]).abs());
        }
    }
    Ok((worst < 1e-8, format!("G/kappa in {{0.5, 2, 5}}, n_max {n_max}: max deviation {worst:.2e}")))
}

/// Sparse LU steady state against the dense eigen-decomposition null space.
fn dense_null_space() -> Result<(bool, String)> {
    let trunc = TruncationSpec::symmetric(3)?;
    let params = SystemParams::new(0.0, 1.0, 1.0, 1.0, 0.2, 6.0)?;
    let (sparse, _) = steady_state_for(&params, &trunc)?;
    let dense = dense_steady_oracle(&params, &trunc)?;
    let diff = sparse.max_abs_diff(&dense);
    Ok((diff < 1e-8, format!("n_max 3, (kappa, V, K) = (0.2, 6, 1): max |diff| {diff:.2e}")))
}

/// σσᵀ = D at random phase-space points.
fn noise_factorization() -> Result<(bool, String)> {
    let params = SystemParams::new(1.5, 1.0, 0.5, 1.0, 0.2, 6.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = PhaseState::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let d = diffusion(&s, &params);
        let sigma = noise_matrix(&d)?;
        for i in 0..4 {
            for j in 0..4 {
                let ss: f64 = (0..4).map(|k| sigma[i][k] * sigma[j][k]).sum();
                worst = worst.max((ss - d.0[i][j]).abs());
            }
        }
    }
    Ok((worst < 1e-12, format!("1000 random states: max |sigma sigma^T - D| {worst:.2e}")))
}

/// Long-time classical amplitude against the linear stability window, at
/// points well away from its boundary.
fn aronson_boundary() -> Result<(bool, String)> {
    let mut mismatches = Vec::new();
    let points = [(4.0, 3.0), (6.0, 8.0), (0.0, 3.0), (4.0, 0.5), (2.0, 6.0), (1.0, 0.2)];
    for (delta, v) in points {
        let params = SystemParams { delta, v, kappa: 0.2, ..Default::default() };
        let dead = long_time_amplitude(&params, 4)? < DEATH_THRESHOLD;
        if dead != aronson_death_region(params.gain, v, delta) {
            mismatches.push(format!("(delta {delta}, V {v})"));
        }
    }
    let ok = mismatches.is_empty();
    let detail = if ok {
        format!("{} (delta, V) points agree", points.len())
    } else {
        format!("mismatch at {}", mismatches.join(", "))
    };
    Ok((ok, detail))
}

/// Runs every check; the suite passes iff all entries pass.
pub fn run_oracle_suite() -> Vec<Check> {
    vec![
        Check::from("analytic steady state", analytic_steady_state()),
        Check::from("dense null space", dense_null_space()),
        Check::from("noise factorization", noise_factorization()),
        Check::from("amplitude-death window", aronson_boundary()),
    ]
}
