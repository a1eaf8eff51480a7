//! Closed-form and brute-force references for the numerical solvers.

mod dense;

pub use dense::DenseMatrix;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, ModeIndex, TruncationSpec};
use crate::params::SystemParams;
use crate::state::DensityMatrix;

pub const KUMMER_MAX_TERMS: usize = 100_000;
/// Eigenvalues this close to zero count as kernel directions in the dense oracle.
pub const KERNEL_TOL: f64 = 1e-10;

/// Pochhammer symbol (x)_n = x(x+1)…(x+n−1).
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).map(|k| x + k as f64).product()
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z) by direct series
/// with Neumaier-compensated summation.
pub fn kummer_phi(a: f64, b: f64, z: f64) -> Result<f64> {
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(Error::InvalidParams(format!("b = {b} is a non-positive integer")));
    }
    if !(z >= 0.0 && z.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParams(format!("kummer_phi needs finite a, b and z >= 0, got z = {z}")));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    for k in 1..=KUMMER_MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf - 1.0) * z / ((b + kf - 1.0) * kf);
        term *= ratio;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        if term == 0.0 || (term.abs() < 1e-16 * (sum + comp).abs() && ratio.abs() < 1.0) {
            return Ok(sum + comp);
        }
    }
    Err(Error::NonConvergence { terms: KUMMER_MAX_TERMS })
}

/// Fock-state populations of a single uncoupled van der Pol oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyDiagonal {
    pub probabilities: Vec<f64>,
}

impl SteadyDiagonal {
    pub fn sum(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// ρ_nn = r^n Φ(1+n, r+n, r) / [(r)_n Φ(1, r, 2r)] with r = G/κ, for n = 0..=n_max.
/// Entries are not renormalized over the truncated range.
pub fn single_vdp_steady_diag(g_over_kappa: f64, n_max: usize) -> Result<SteadyDiagonal> {
    let r = g_over_kappa;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("G/kappa must be > 0, got {r}")));
    }
    let norm = kummer_phi(1.0, r, 2.0 * r)?;
    let mut prefactor = 1.0; // r^n / (r)_n
    let mut probabilities = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let nf = n as f64;
        probabilities.push(prefactor * kummer_phi(1.0 + nf, r + nf, r)? / norm);
        prefactor *= r / (r + nf);
    }
    Ok(SteadyDiagonal { probabilities })
}

/// Linear stability window of the rest state: G < V < (Δ² + G²)/(2G).
pub fn aronson_death_region(g: f64, v: f64, delta: f64) -> bool {
    g < v && v < (delta * delta + g * g) / (2.0 * g)
}

/// Dense Liouvillian built column by column from the Lindblad definition.
pub fn dense_liouvillian(params: &SystemParams, trunc: &TruncationSpec) -> Result<DenseMatrix> {
    params.validate()?;
    let d = trunc.dim();
    let dense = |m: &crate::sparse::ComplexSparseMatrix| DenseMatrix::from_rows(&m.to_dense());
    let n1 = dense(&fock::mode_number(ModeIndex::One, trunc));
    let n2 = dense(&fock::mode_number(ModeIndex::Two, trunc));
    let a1 = dense(&fock::mode_annihilation(ModeIndex::One, trunc));
    let a2 = dense(&fock::mode_annihilation(ModeIndex::Two, trunc));

    let mut h = DenseMatrix::zeros(d);
    for i in 0..d {
        let (x1, x2) = (n1[(i, i)].re, n2[(i, i)].re);
        h[(i, i)] = C64::new(params.k1 * x1 * x1 + params.delta * x2 + params.k2 * x2 * x2, 0.0);
    }
    let mut jumps: Vec<(f64, DenseMatrix)> = vec![
        (params.gain, a1.adjoint()),
        (params.gain, a2.adjoint()),
        (params.kappa, a1.matmul(&a1)),
        (params.kappa, a2.matmul(&a2)),
    ];
    let mut diff = a1.clone();
    for i in 0..d {
        for j in 0..d {
            diff[(i, j)] -= a2[(i, j)];
        }
    }
    jumps.push((params.v, diff));
    let jumps: Vec<(f64, DenseMatrix, DenseMatrix, DenseMatrix)> = jumps
        .into_iter()
        .map(|(g, c)| {
            let cd = c.adjoint();
            let cdc = cd.matmul(&c);
            (g, c, cd, cdc)
        })
        .collect();

    let i_unit = C64::new(0.0, 1.0);
    let mut l = DenseMatrix::zeros(d * d);
    for l_col in 0..d {
        for k_row in 0..d {
            let mut e = DenseMatrix::zeros(d);
            e[(k_row, l_col)] = C64::new(1.0, 0.0);
            let he = h.matmul(&e);
            let eh = e.matmul(&h);
            let mut out = DenseMatrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] = -i_unit * (he[(i, j)] - eh[(i, j)]);
                }
            }
            for (g, c, cd, cdc) in &jumps {
                if *g == 0.0 {
                    continue;
                }
                let sandwich = c.matmul(&e).matmul(cd);
                let left = cdc.matmul(&e);
                let right = e.matmul(cdc);
                for i in 0..d {
                    for j in 0..d {
                        out[(i, j)] += *g * (sandwich[(i, j)] - 0.5 * (left[(i, j)] + right[(i, j)]));
                    }
                }
            }
            let col = k_row + d * l_col;
            for i in 0..d {
                for j in 0..d {
                    l[(i + d * j, col)] = out[(i, j)];
                }
            }
        }
    }
    Ok(l)
}

/// Steady state from the full spectrum of the dense Liouvillian: the
/// eigenvector of the eigenvalue nearest zero, normalized to unit trace.
pub fn dense_steady_oracle(params: &SystemParams, trunc: &TruncationSpec) -> Result<DensityMatrix> {
    let d = trunc.dim();
    if d * d > 4096 {
        return Err(Error::InvalidTruncation(format!(
            "dense oracle needs d² <= 4096, got {}",
            d * d
        )));
    }
    let l = dense_liouvillian(params, trunc)?;
    let eigs = l.eigenvalues()?;
    let near_zero = eigs.iter().filter(|z| z.norm() < KERNEL_TOL).count();
    if near_zero > 1 {
        return Err(Error::AmbiguousKernel { count: near_zero, tol: KERNEL_TOL });
    }
    let lambda = *eigs
        .iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or_else(|| Error::SingularSolve("empty spectrum".into()))?;

    // inverse iteration on L − λI
    let n = d * d;
    let mut shifted = l.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    let tiny = f64::EPSILON * l.norm_inf().max(1.0);
    let mut x = vec![C64::new(1.0, 0.0); n];
    for _ in 0..4 {
        x = shifted.solve(&x, tiny);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::SingularSolve("inverse iteration broke down".into()));
        }
        x.iter_mut().for_each(|z| *z /= norm);
    }
    let trace: C64 = (0..d).map(|i| x[i + d * i]).sum();
    if trace.norm() == 0.0 {
        return Err(Error::SingularSolve("kernel vector is traceless".into()));
    }
    x.iter_mut().for_each(|z| *z /= trace);
    DensityMatrix::from_vec_unchecked(&x, *trunc)
}
