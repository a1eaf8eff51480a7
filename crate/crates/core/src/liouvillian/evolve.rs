use num_complex::Complex64 as C64;

use super::Superoperator;
use crate::error::{Error, Result};
use crate::ode::{self, OdeStats};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveStats {
    pub steps: usize,
    pub rejected: usize,
    /// max over accepted steps of |tr ρ(t) − tr ρ(0)|.
    pub trace_drift: f64,
}

pub fn evolve(rho0: &DensityMatrix, l: &Superoperator, t_final: f64, tol: f64) -> Result<DensityMatrix> {
    evolve_with_stats(rho0, l, t_final, tol).map(|(rho, _)| rho)
}

/// Integrates vec(ρ)' = L vec(ρ) up to `t_final` with local error tolerance `tol`.
pub fn evolve_with_stats(
    rho0: &DensityMatrix,
    l: &Superoperator,
    t_final: f64,
    tol: f64,
) -> Result<(DensityMatrix, EvolveStats)> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParams(format!("t_final must be finite and >= 0, got {t_final}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be > 0, got {tol}")));
    }
    let d = rho0.dim();
    if l.hilbert_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: l.hilbert_dim(),
            got: d,
        });
    }
    if t_final == 0.0 {
        let stats = EvolveStats { steps: 0, rejected: 0, trace_drift: 0.0 };
        return Ok((rho0.clone(), stats));
    }

    let y0: Vec<f64> = rho0.to_vec().iter().flat_map(|z| [z.re, z.im]).collect();
    let trace_of = |y: &[f64]| -> C64 { (0..d).map(|i| C64::new(y[2 * (i + d * i)], y[2 * (i + d * i) + 1])).sum() };
    let tr0 = trace_of(&y0);

    let mut x = vec![C64::new(0.0, 0.0); d * d];
    let mut lx = vec![C64::new(0.0, 0.0); d * d];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        for (k, z) in x.iter_mut().enumerate() {
            *z = C64::new(y[2 * k], y[2 * k + 1]);
        }
        l.matrix().matvec_into(&x, &mut lx);
        for (k, z) in lx.iter().enumerate() {
            dy[2 * k] = z.re;
            dy[2 * k + 1] = z.im;
        }
    };
    let mut drift = 0.0f64;
    let (y, OdeStats { accepted, rejected, .. }) = ode::integrate(rhs, 0.0, &y0, t_final, tol, |_, y| {
        drift = drift.max((trace_of(y) - tr0).norm());
    })?;
    let v: Vec<C64> = y.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    let rho = DensityMatrix::from_vec_unchecked(&v, *rho0.trunc())?;
    Ok((rho, EvolveStats { steps: accepted, rejected, trace_drift: drift }))
}
