//! Liouvillian superoperator of the coupled Kerr van der Pol pair.
//!
//! Density matrices are vectorized by column stacking, `vec(ρ)[i + d*j] = ρ_ij`.
//! With this convention
//!
//! ```text
//! vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)
//! L = −i(I⊗H − Hᵀ⊗I) + Σ_c [ C̄⊗C − ½(I⊗C†C + (C†C)ᵀ⊗I) ]
//! ```
//!
//! where `⊗` puts its left factor on the slow (column) index.

mod assembly;
mod evolve;
mod observables;
mod solve;

pub use assembly::{
    build_hamiltonian, build_liouvillian, build_liouvillian_with_frame_shift, excitation_sector,
    hamiltonian_term, lindblad_term, LindbladModel, LIOUVILLE_DIM_CAP,
};
pub use evolve::{evolve, evolve_with_stats, EvolveStats};
pub use observables::{check_truncation, mean_phonon, phonon_difference, TRUNCATION_ERROR, TRUNCATION_WARN};
pub use solve::{steady_state, steady_state_for, steady_state_with_report, SteadyStateReport, RESIDUAL_TOL};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::TruncationSpec;
use crate::sparse::ComplexSparseMatrix;

/// A linear map on column-stacked d×d matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    d: usize,
    trunc: Option<TruncationSpec>,
    matrix: ComplexSparseMatrix,
}

impl Superoperator {
    pub fn new(matrix: ComplexSparseMatrix, d: usize, trunc: Option<TruncationSpec>) -> Result<Self> {
        if matrix.n_rows() != d * d || matrix.n_cols() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: matrix.n_rows().max(matrix.n_cols()),
            });
        }
        if let Some(t) = trunc {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: t.dim(),
                    got: d,
                });
            }
        }
        Ok(Self { d, trunc, matrix })
    }

    /// Hilbert-space dimension d (the matrix is d²×d²).
    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn trunc(&self) -> Option<&TruncationSpec> {
        self.trunc.as_ref()
    }

    pub fn matrix(&self) -> &ComplexSparseMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.matvec(v)
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        Ok(Superoperator {
            d: self.d,
            trunc: self.trunc.or(other.trunc),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Superoperator {
            d: self.d,
            trunc: self.trunc,
            matrix: self.matrix.scale(C64::new(s, 0.0)),
        }
    }

    /// max over basis matrices E_ij of |tr(L E_ij)|.
    pub fn trace_leak(&self) -> f64 {
        let d = self.d;
        let mut column_trace = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for (c, v) in self.matrix.row(i + d * i) {
                column_trace[c] += v;
            }
        }
        column_trace.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
