//! Ladder operators on the truncated two-mode Fock space.
//!
//! Tensor ordering is fixed project-wide: mode 1 is the left (slow) factor,
//! so the basis state |n1, n2⟩ has index `n1 * d2 + n2`.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::ComplexSparseMatrix;

/// Default bound on the two-mode Hilbert dimension `d1 * d2`.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeIndex {
    One,
    Two,
}

impl ModeIndex {
    pub fn other(self) -> Self {
        match self {
            ModeIndex::One => ModeIndex::Two,
            ModeIndex::Two => ModeIndex::One,
        }
    }
}

impl TryFrom<u8> for ModeIndex {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(ModeIndex::One),
            2 => Ok(ModeIndex::Two),
            other => Err(Error::InvalidParams(format!(
                "mode index must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::One => write!(f, "1"),
            ModeIndex::Two => write!(f, "2"),
        }
    }
}

/// Per-mode Fock cutoffs. Mode `m` keeps the levels `0..=n_max_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationSpec {
    n_max_1: usize,
    n_max_2: usize,
}

impl TruncationSpec {
    pub fn new(n_max_1: usize, n_max_2: usize) -> Result<Self> {
        Self::with_cap(n_max_1, n_max_2, DEFAULT_DIMENSION_CAP)
    }

    pub fn symmetric(n_max: usize) -> Result<Self> {
        Self::new(n_max, n_max)
    }

    pub fn with_cap(n_max_1: usize, n_max_2: usize, cap: usize) -> Result<Self> {
        if n_max_1 < 2 || n_max_2 < 2 {
            return Err(Error::InvalidTruncation(format!(
                "each mode needs at least three levels (n_max >= 2), got ({n_max_1}, {n_max_2})"
            )));
        }
        let d = (n_max_1 + 1) * (n_max_2 + 1);
        if d > cap {
            return Err(Error::InvalidTruncation(format!(
                "Hilbert dimension {d} exceeds the cap {cap}"
            )));
        }
        Ok(Self { n_max_1, n_max_2 })
    }

    pub fn n_max(&self, mode: ModeIndex) -> usize {
        match mode {
            ModeIndex::One => self.n_max_1,
            ModeIndex::Two => self.n_max_2,
        }
    }

    pub fn dim_of(&self, mode: ModeIndex) -> usize {
        self.n_max(mode) + 1
    }

    pub fn dim(&self) -> usize {
        (self.n_max_1 + 1) * (self.n_max_2 + 1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 <= self.n_max_1 && n2 <= self.n_max_2);
        n1 * (self.n_max_2 + 1) + n2
    }

    /// Inverse of [`TruncationSpec::index`].
    pub fn occupations(&self, index: usize) -> (usize, usize) {
        let d2 = self.n_max_2 + 1;
        (index / d2, index % d2)
    }

    /// Total excitation number n1 + n2 of a basis state.
    pub fn excitations(&self, index: usize) -> usize {
        let (n1, n2) = self.occupations(index);
        n1 + n2
    }
}

/// Single-mode annihilation operator with ⟨n−1|a|n⟩ = √n.
///
/// Panics if `n_max == 0`.
pub fn annihilation(n_max: usize) -> ComplexSparseMatrix {
    assert!(n_max >= 1, "annihilation operator needs n_max >= 1");
    let entries = (1..=n_max).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)));
    ComplexSparseMatrix::from_triplets(n_max + 1, n_max + 1, entries)
        .expect("ladder entries are in range")
}

pub fn creation(n_max: usize) -> ComplexSparseMatrix {
    annihilation(n_max).adjoint()
}

/// Single-mode number operator a†a.
pub fn number(n_max: usize) -> ComplexSparseMatrix {
    let diag: Vec<C64> = (0..=n_max).map(|n| C64::new(n as f64, 0.0)).collect();
    ComplexSparseMatrix::from_diagonal(&diag)
}

/// Embeds a single-mode operator into the two-mode space (I ⊗ op or op ⊗ I).
pub fn embed(
    op: &ComplexSparseMatrix,
    mode: ModeIndex,
    trunc: &TruncationSpec,
) -> Result<ComplexSparseMatrix> {
    let d_mode = trunc.dim_of(mode);
    if op.n_rows() != d_mode || op.n_cols() != d_mode {
        return Err(Error::DimensionMismatch {
            expected: d_mode,
            got: op.n_rows().max(op.n_cols()),
        });
    }
    let other = ComplexSparseMatrix::identity(trunc.dim_of(mode.other()));
    Ok(match mode {
        ModeIndex::One => op.kron(&other),
        ModeIndex::Two => other.kron(op),
    })
}

/// a_m embedded in the two-mode space.
pub fn mode_annihilation(mode: ModeIndex, trunc: &TruncationSpec) -> ComplexSparseMatrix {
    embed(&annihilation(trunc.n_max(mode)), mode, trunc).expect("dimensions agree by construction")
}

/// a_m†a_m embedded in the two-mode space.
pub fn mode_number(mode: ModeIndex, trunc: &TruncationSpec) -> ComplexSparseMatrix {
    embed(&number(trunc.n_max(mode)), mode, trunc).expect("dimensions agree by construction")
}

/// Jump operator a₁ − a₂ of the shared reservoir.
pub fn collective_jump(trunc: &TruncationSpec) -> ComplexSparseMatrix {
    mode_annihilation(ModeIndex::One, trunc)
        .sub(&mode_annihilation(ModeIndex::Two, trunc))
        .expect("same two-mode shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(trunc: &TruncationSpec, n1: usize, n2: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); trunc.dim()];
        v[trunc.index(n1, n2)] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn annihilation_small_cases() {
        let a1 = annihilation(1);
        assert_eq!(a1.to_dense()[0][1], C64::new(1.0, 0.0));
        assert_eq!(a1.nnz(), 1);

        let a2 = annihilation(2);
        assert_eq!(a2.get(0, 1).re, 1.0);
        assert_eq!(a2.get(1, 2).re, 2f64.sqrt());
        assert_eq!(a2.nnz(), 2);
    }

    #[test]
    fn number_operator_from_ladder() {
        let a = annihilation(3);
        let n = a.adjoint().matmul(&a).unwrap();
        let diag: Vec<f64> = n.diagonal().iter().map(|z| z.re).collect();
        for (k, d) in diag.iter().enumerate() {
            assert!((d - k as f64).abs() < 1e-14);
        }
        assert!(n.is_real() && a.is_real() && a.adjoint().is_real());
    }

    #[test]
    fn commutator_is_identity_off_the_top_level() {
        let n_max = 5;
        let a = annihilation(n_max);
        let ad = a.adjoint();
        let comm = a.matmul(&ad).unwrap().sub(&ad.matmul(&a).unwrap()).unwrap();
        for i in 0..n_max {
            for j in 0..n_max {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((comm.get(i, j) - C64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
        // the truncation artifact sits in the bottom-right corner
        assert!((comm.get(n_max, n_max).re + n_max as f64).abs() < 1e-12);
    }

    #[test]
    fn embedded_modes_commute() {
        let t = TruncationSpec::new(3, 2).unwrap();
        let a1 = mode_annihilation(ModeIndex::One, &t);
        let a2 = mode_annihilation(ModeIndex::Two, &t);
        let comm = a1.matmul(&a2).unwrap().sub(&a2.matmul(&a1).unwrap()).unwrap();
        assert_eq!(comm.nnz(), 0);
    }

    #[test]
    fn embed_identity_and_sparsity() {
        let t = TruncationSpec::new(3, 4).unwrap();
        let id = embed(&ComplexSparseMatrix::identity(4), ModeIndex::One, &t).unwrap();
        assert_eq!(id, ComplexSparseMatrix::identity(t.dim()));

        let a = annihilation(3);
        let e = embed(&a, ModeIndex::One, &t).unwrap();
        assert_eq!(e.nnz(), a.nnz() * t.dim_of(ModeIndex::Two));
        let b = annihilation(4);
        let e2 = embed(&b, ModeIndex::Two, &t).unwrap();
        assert_eq!(e2.nnz(), b.nnz() * t.dim_of(ModeIndex::One));

        assert!(embed(&b, ModeIndex::One, &t).is_err());
    }

    #[test]
    fn number_expectation_on_product_state() {
        let t = TruncationSpec::new(3, 3).unwrap();
        let n1 = mode_number(ModeIndex::One, &t);
        let psi = basis(&t, 1, 0);
        let v = n1.matvec(&psi);
        let expectation: C64 = psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        assert_eq!(expectation, C64::new(1.0, 0.0));
    }

    #[test]
    fn collective_jump_action() {
        let t = TruncationSpec::new(2, 2).unwrap();
        let c = collective_jump(&t);
        let out = c.matvec(&basis(&t, 1, 0));
        assert_eq!(out, basis(&t, 0, 0));

        let out = c.matvec(&basis(&t, 0, 1));
        let expected: Vec<C64> = basis(&t, 0, 0).iter().map(|z| -z).collect();
        assert_eq!(out, expected);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sym: Vec<C64> = basis(&t, 1, 0)
            .iter()
            .zip(basis(&t, 0, 1))
            .map(|(a, b)| (a + b) * s)
            .collect();
        assert!(c.matvec(&sym).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn truncation_invariants() {
        assert!(TruncationSpec::new(1, 3).is_err());
        assert!(TruncationSpec::new(63, 63).is_ok());
        assert!(TruncationSpec::new(64, 64).is_err());
        let t = TruncationSpec::new(4, 2).unwrap();
        for i in 0..t.dim() {
            let (n1, n2) = t.occupations(i);
            assert_eq!(t.index(n1, n2), i);
        }
        assert_eq!(ModeIndex::try_from(2).unwrap(), ModeIndex::Two);
        assert!(ModeIndex::try_from(3).is_err());
    }
}
