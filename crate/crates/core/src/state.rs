//! Two-mode density matrices.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{ModeIndex, TruncationSpec};
use crate::sparse::ComplexSparseMatrix;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const NEGATIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive-semidefinite state on the truncated two-mode space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    trunc: TruncationSpec,
    mat: Mat<C64>,
}

impl DensityMatrix {
    /// Wraps `mat` after checking Hermiticity, trace and positivity.
    pub fn new(mat: Mat<C64>, trunc: TruncationSpec) -> Result<Self> {
        let rho = Self::from_mat_unchecked(mat, trunc)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps `mat` checking only its shape.
    pub fn from_mat_unchecked(mat: Mat<C64>, trunc: TruncationSpec) -> Result<Self> {
        let d = trunc.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { trunc, mat })
    }

    /// Unstacks a column-stacked vector (`vec[i + d*j] = ρ_ij`).
    pub fn from_vec_unchecked(v: &[C64], trunc: TruncationSpec) -> Result<Self> {
        let d = trunc.dim();
        if v.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: v.len(),
            });
        }
        Ok(Self {
            trunc,
            mat: Mat::from_fn(d, d, |i, j| v[i + d * j]),
        })
    }

    pub fn vacuum(trunc: TruncationSpec) -> Self {
        Self::fock(trunc, 0, 0)
    }

    /// The product number state |n1, n2⟩⟨n1, n2|.
    pub fn fock(trunc: TruncationSpec, n1: usize, n2: usize) -> Self {
        let d = trunc.dim();
        let k = trunc.index(n1, n2);
        let mat = Mat::from_fn(d, d, |i, j| {
            if i == k && j == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { trunc, mat }
    }

    /// Normalized projector onto `psi`.
    pub fn from_pure(psi: &[C64], trunc: TruncationSpec) -> Result<Self> {
        let d = trunc.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let mat = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm2);
        Ok(Self { trunc, mat })
    }

    /// ρ₁ ⊗ ρ₂ from single-mode matrices of dimensions d1 and d2.
    pub fn product(rho1: &Mat<C64>, rho2: &Mat<C64>, trunc: TruncationSpec) -> Result<Self> {
        let (d1, d2) = (trunc.dim_of(ModeIndex::One), trunc.dim_of(ModeIndex::Two));
        if rho1.nrows() != d1 || rho2.nrows() != d2 {
            return Err(Error::DimensionMismatch {
                expected: d1 * d2,
                got: rho1.nrows() * rho2.nrows(),
            });
        }
        let d = d1 * d2;
        let mat = Mat::from_fn(d, d, |i, j| {
            rho1[(i / d2, j / d2)] * rho2[(i % d2, j % d2)]
        });
        Ok(Self { trunc, mat })
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// Column-stacked vector `vec[i + d*j] = ρ_ij`.
    pub fn to_vec(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                v[i + d * j] = self.mat[(i, j)];
            }
        }
        v
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// max |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                err = err.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Replaces ρ by (ρ + ρ†)/2 and rescales to unit trace.
    pub(crate) fn hermitize_and_normalize(&mut self) -> Result<()> {
        let d = self.dim();
        for j in 0..d {
            for i in 0..j {
                let avg = (self.mat[(i, j)] + self.mat[(j, i)].conj()) * 0.5;
                self.mat[(i, j)] = avg;
                self.mat[(j, i)] = avg.conj();
            }
            self.mat[(j, j)] = C64::new(self.mat[(j, j)].re, 0.0);
        }
        let tr = self.trace().re;
        if !tr.is_finite() || tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSolve(format!("state has trace {tr}")));
        }
        for j in 0..d {
            for i in 0..d {
                self.mat[(i, j)] /= tr;
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue, computed block by block over the connected
    /// components of the nonzero pattern.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues_blockwise(&self.mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mat.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvariantViolation("non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!(
                "not Hermitian (error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("trace is {tr}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -NEGATIVITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "minimum eigenvalue {min_eig:e} below -{NEGATIVITY_TOL:e}"
            )));
        }
        Ok(())
    }

    /// Tr(op · ρ).
    pub fn expectation(&self, op: &ComplexSparseMatrix) -> Result<C64> {
        let d = self.dim();
        if op.n_rows() != d || op.n_cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.n_rows(),
            });
        }
        Ok(op.iter().map(|(i, k, v)| v * self.mat[(k, i)]).sum())
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.mat - &other.mat;
        0.5 * hermitian_eigenvalues_blockwise(&diff)
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
    }

    /// The state with the two modes exchanged (requires equal cutoffs).
    pub fn swap_modes(&self) -> Result<Self> {
        let (n1, n2) = (self.trunc.n_max(ModeIndex::One), self.trunc.n_max(ModeIndex::Two));
        let swapped = TruncationSpec::new(n2, n1)?;
        let d = self.dim();
        let perm: Vec<usize> = (0..d)
            .map(|i| {
                let (a, b) = self.trunc.occupations(i);
                swapped.index(b, a)
            })
            .collect();
        let mut mat = Mat::<C64>::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                mat[(perm[i], perm[j])] = self.mat[(i, j)];
            }
        }
        Ok(Self {
            trunc: swapped,
            mat,
        })
    }
}

/// Eigenvalues of a Hermitian matrix, split over the connected components
/// of its nonzero pattern.
pub(crate) fn hermitian_eigenvalues_blockwise(mat: &Mat<C64>) -> Vec<f64> {
    let d = mat.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..d {
        for i in 0..j {
            if mat[(i, j)] != C64::new(0.0, 0.0) || mat[(j, i)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..d {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut eigs = Vec::with_capacity(d);
    for idx in groups.values() {
        if idx.len() == 1 {
            eigs.push(mat[(idx[0], idx[0])].re);
            continue;
        }
        let block = Mat::from_fn(idx.len(), idx.len(), |a, b| mat[(idx[a], idx[b])]);
        match block.self_adjoint_eigenvalues(Side::Lower) {
            Ok(vals) => eigs.extend(vals),
            Err(_) => eigs.push(f64::NAN),
        }
    }
    eigs
}
