use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;

use super::assembly::{excitation_sector, LindbladModel};
use super::Superoperator;
use crate::error::{Error, Result};
use crate::fock::TruncationSpec;
use crate::params::SystemParams;
use crate::sparse::ComplexSparseMatrix;
use crate::state::DensityMatrix;

/// Relative residual gate ‖L·vec(ρ)‖∞ / ‖L‖∞.
pub const RESIDUAL_TOL: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateReport {
    /// ‖L·vec(ρ)‖∞ for the returned (Hermitized, normalized) state.
    pub residual: f64,
    /// ‖L‖∞ of the operator that was solved.
    pub l_norm: f64,
    /// Number of unknowns in the reduced linear system.
    pub system_size: usize,
    pub min_eigenvalue: f64,
}

impl SteadyStateReport {
    pub fn relative_residual(&self) -> f64 {
        if self.l_norm > 0.0 {
            self.residual / self.l_norm
        } else {
            self.residual
        }
    }
}

pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    steady_state_with_report(l).map(|(rho, _)| rho)
}

/// Solves Lρ = 0 on the smallest union of L-invariant blocks that carries the trace.
pub fn steady_state_with_report(l: &Superoperator) -> Result<(DensityMatrix, SteadyStateReport)> {
    let trunc = *l
        .trunc()
        .ok_or_else(|| Error::InvalidState("superoperator has no two-mode truncation".into()))?;
    let d = l.hilbert_dim();
    let indices = trace_carrying_blocks(l.matrix(), d);
    let restricted = restrict(l.matrix(), &indices);
    solve_restricted(&restricted, &indices, trunc)
}

/// Steady state of the model at `(params, trunc)` without forming the full
/// Liouvillian: only the zero-excitation-difference sector is assembled.
pub fn steady_state_for(
    params: &SystemParams,
    trunc: &TruncationSpec,
) -> Result<(DensityMatrix, SteadyStateReport)> {
    let model = LindbladModel::new(params, trunc)?;
    let indices = excitation_sector(trunc, 0);
    let restricted = model.assemble_restricted(&indices)?;
    solve_restricted(&restricted, &indices, *trunc)
}

/// Indices of the connected components (of the symmetric nonzero pattern)
/// that contain at least one diagonal vec index.
fn trace_carrying_blocks(m: &ComplexSparseMatrix, d: usize) -> Vec<usize> {
    let n = m.n_rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, c, _) in m.iter() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a] = b;
        }
    }
    let mut carries = vec![false; n];
    for i in 0..d {
        let root = find(&mut parent, i + d * i);
        carries[root] = true;
    }
    (0..n).filter(|&v| carries[find(&mut parent, v)]).collect()
}

fn restrict(m: &ComplexSparseMatrix, indices: &[usize]) -> ComplexSparseMatrix {
    let mut position = vec![usize::MAX; m.n_rows()];
    for (p, &v) in indices.iter().enumerate() {
        position[v] = p;
    }
    let triplets = indices.iter().enumerate().flat_map(|(p, &v)| {
        let position = &position;
        m.row(v).filter_map(move |(c, val)| {
            let q = position[c];
            (q != usize::MAX).then_some((p, q, val))
        })
    });
    ComplexSparseMatrix::from_triplets(indices.len(), indices.len(), triplets)
        .expect("restriction stays in range")
}

fn solve_restricted(
    l: &ComplexSparseMatrix,
    indices: &[usize],
    trunc: TruncationSpec,
) -> Result<(DensityMatrix, SteadyStateReport)> {
    let d = trunc.dim();
    let n = indices.len();
    let diagonal: Vec<usize> = indices
        .iter()
        .enumerate()
        .filter(|(_, &v)| v % d == v / d)
        .map(|(p, _)| p)
        .collect();
    // replace the row of the first diagonal element (the vacuum population) by the trace
    let pivot_row = *diagonal
        .first()
        .ok_or_else(|| Error::SingularSolve("no diagonal entries in the solved block".into()))?;

    let mut triplets: Vec<Triplet<usize, usize, C64>> = l
        .iter()
        .filter(|&(r, _, _)| r != pivot_row)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.extend(diagonal.iter().map(|&p| Triplet::new(pivot_row, p, C64::new(1.0, 0.0))));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularSolve(format!("matrix assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::SingularSolve(format!("LU factorization failed: {e:?}")))?;

    let mut rhs = vec![C64::new(0.0, 0.0); n];
    rhs[pivot_row] = C64::new(1.0, 0.0);
    let mut x = lu_solve(&lu, &rhs);
    for _ in 0..REFINEMENT_STEPS {
        let ax = modified_matvec(l, pivot_row, &diagonal, &x);
        let r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let dx = lu_solve(&lu, &r);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
    }
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SingularSolve(
            "non-finite solution; the kernel is probably degenerate".into(),
        ));
    }

    let mut full = vec![C64::new(0.0, 0.0); d * d];
    for (p, &v) in indices.iter().enumerate() {
        full[v] = x[p];
    }
    let mut rho = DensityMatrix::from_vec_unchecked(&full, trunc)?;
    rho.hermitize_and_normalize()?;

    let packed: Vec<C64> = {
        let v = rho.to_vec();
        indices.iter().map(|&k| v[k]).collect()
    };
    let residual = l.matvec(&packed).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let l_norm = l.norm_inf();
    let min_eigenvalue = rho.min_eigenvalue();
    let report = SteadyStateReport {
        residual,
        l_norm,
        system_size: n,
        min_eigenvalue,
    };
    if report.relative_residual() > RESIDUAL_TOL {
        return Err(Error::SingularSolve(format!(
            "relative residual {:e} exceeds {RESIDUAL_TOL:e}; the kernel is probably not one-dimensional",
            report.relative_residual()
        )));
    }
    log::debug!(
        "steady state: n = {n}, residual = {residual:e}, min eigenvalue = {min_eigenvalue:e}"
    );
    rho.validate()?;
    Ok((rho, report))
}

fn lu_solve(lu: &faer::sparse::linalg::solvers::Lu<usize, C64>, b: &[C64]) -> Vec<C64> {
    use faer::linalg::solvers::Solve;
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let sol = lu.solve(&rhs);
    (0..b.len()).map(|i| sol[(i, 0)]).collect()
}

fn modified_matvec(l: &ComplexSparseMatrix, pivot_row: usize, diagonal: &[usize], x: &[C64]) -> Vec<C64> {
    let mut y = l.matvec(x);
    y[pivot_row] = diagonal.iter().map(|&p| x[p]).sum();
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeIndex;
    use crate::liouvillian::{build_liouvillian, mean_phonon};

    #[test]
    fn full_and_sector_paths_agree() {
        let t = TruncationSpec::new(4, 3).unwrap();
        let p = SystemParams::new(0.7, 1.0, 0.5, 1.0, 0.2, 3.0).unwrap();
        let (a, ra) = steady_state_with_report(&build_liouvillian(&p, &t).unwrap()).unwrap();
        let (b, rb) = steady_state_for(&p, &t).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert_eq!(ra.system_size, rb.system_size);
        assert!(ra.relative_residual() < RESIDUAL_TOL);
    }

    #[test]
    fn vanishing_gain_limit() {
        // |1⟩ is immune to two-phonon loss, so the G → 0 limit is (2/3, 1/3, 0, ...)
        let t = TruncationSpec::symmetric(4).unwrap();
        let p = SystemParams::new(0.0, 0.0, 0.0, 1e-6, 0.2, 0.0).unwrap();
        let (rho, _) = steady_state_for(&p, &t).unwrap();
        assert!((mean_phonon(&rho, ModeIndex::One) - 1.0 / 3.0).abs() < 1e-5);
        assert!((rho.get(0, 0).re - 4.0 / 9.0).abs() < 1e-5);
    }

    #[test]
    fn missing_truncation_rejected() {
        let l = crate::liouvillian::lindblad_term(&crate::fock::annihilation(2)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::InvalidState(_))));
    }
}
