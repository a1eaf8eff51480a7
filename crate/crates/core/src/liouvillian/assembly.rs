use num_complex::Complex64 as C64;

use super::Superoperator;
use crate::error::{Error, Result};
use crate::fock::{self, ModeIndex, TruncationSpec};
use crate::params::SystemParams;
use crate::sparse::ComplexSparseMatrix;

/// Largest Liouville dimension d² the full assembler accepts. Larger spaces
/// go through the sector-restricted path of [`super::steady_state_for`].
pub const LIOUVILLE_DIM_CAP: usize = 1_000_000;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// H_m = ω_m n + K_m n² embedded in the two-mode space.
pub fn build_hamiltonian(
    params: &SystemParams,
    mode: ModeIndex,
    trunc: &TruncationSpec,
) -> ComplexSparseMatrix {
    let (w, k) = (params.omega(mode), params.kerr(mode));
    let diag: Vec<C64> = (0..=trunc.n_max(mode))
        .map(|n| {
            let n = n as f64;
            C64::new(w * n + k * n * n, 0.0)
        })
        .collect();
    fock::embed(&ComplexSparseMatrix::from_diagonal(&diag), mode, trunc)
        .expect("diagonal has the mode dimension")
}

/// −i[H, ·] as a superoperator.
pub fn hamiltonian_term(h: &ComplexSparseMatrix) -> Result<Superoperator> {
    check_square(h)?;
    let d = h.n_rows();
    let id = ComplexSparseMatrix::identity(d);
    let m = id.kron(h).sub(&h.transpose().kron(&id))?.scale(-I);
    Superoperator::new(m, d, None)
}

/// The dissipator 𝒟[c]ρ = cρc† − ½{c†c, ρ}.
pub fn lindblad_term(c: &ComplexSparseMatrix) -> Result<Superoperator> {
    check_square(c)?;
    let d = c.n_rows();
    let id = ComplexSparseMatrix::identity(d);
    let cdc = c.adjoint().matmul(c)?;
    let half = C64::new(0.5, 0.0);
    let m = c
        .conj()
        .kron(c)
        .sub(&id.kron(&cdc).add(&cdc.transpose().kron(&id))?.scale(half))?;
    Superoperator::new(m, d, None)
}

fn check_square(m: &ComplexSparseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.n_rows(),
            got: m.n_cols(),
        });
    }
    Ok(())
}

struct Jump {
    rate: f64,
    /// Cᵀ, so that row k lists column k of C.
    c_t: ComplexSparseMatrix,
    /// C†C (Hermitian).
    cdc: ComplexSparseMatrix,
    /// (C†C)ᵀ, row k lists column k of C†C.
    cdc_t: ComplexSparseMatrix,
}

/// Hamiltonian plus weighted jump operators, able to produce any column of
/// its Liouvillian without forming the full d²×d² matrix.
pub struct LindbladModel {
    trunc: TruncationSpec,
    h: ComplexSparseMatrix,
    h_t: ComplexSparseMatrix,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(params: &SystemParams, trunc: &TruncationSpec) -> Result<Self> {
        Self::with_frame_shift(params, trunc, 0.0)
    }

    /// Adds `shift` to both natural frequencies.
    pub fn with_frame_shift(params: &SystemParams, trunc: &TruncationSpec, shift: f64) -> Result<Self> {
        params.validate()?;
        let mut h = build_hamiltonian(params, ModeIndex::One, trunc)
            .add(&build_hamiltonian(params, ModeIndex::Two, trunc))?;
        if shift != 0.0 {
            let total = fock::mode_number(ModeIndex::One, trunc)
                .add(&fock::mode_number(ModeIndex::Two, trunc))?;
            h = h.add(&total.scale(C64::new(shift, 0.0)))?;
        }
        let mut ops = Vec::new();
        for mode in [ModeIndex::One, ModeIndex::Two] {
            let a = fock::mode_annihilation(mode, trunc);
            ops.push((params.gain, a.adjoint()));
            ops.push((params.kappa, a.matmul(&a)?));
        }
        ops.push((params.v, fock::collective_jump(trunc)));
        let jumps = ops
            .into_iter()
            .filter(|(rate, _)| *rate != 0.0)
            .map(|(rate, c)| {
                let cdc = c.adjoint().matmul(&c)?;
                Ok(Jump {
                    rate,
                    c_t: c.transpose(),
                    cdc_t: cdc.transpose(),
                    cdc,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trunc: *trunc,
            h_t: h.transpose(),
            h,
            jumps,
        })
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    /// Entries of L(|k⟩⟨l|) as `(i, j, value)`, possibly with repeats.
    pub fn column(&self, k: usize, l: usize, out: &mut Vec<(usize, usize, C64)>) {
        out.clear();
        // −i(H E − E H)
        for (i, h) in self.h_t.row(k) {
            out.push((i, l, -I * h));
        }
        for (j, h) in self.h.row(l) {
            out.push((k, j, I * h));
        }
        for jump in &self.jumps {
            let g = jump.rate;
            for (i, c1) in jump.c_t.row(k) {
                for (j, c2) in jump.c_t.row(l) {
                    out.push((i, j, c1 * c2.conj() * g));
                }
            }
            for (i, m) in jump.cdc_t.row(k) {
                out.push((i, l, m * (-0.5 * g)));
            }
            for (j, m) in jump.cdc.row(l) {
                out.push((k, j, m * (-0.5 * g)));
            }
        }
    }

    /// L restricted to the vec indices `indices` (sorted, unique). The span
    /// of those indices must be invariant under L.
    pub fn assemble_restricted(&self, indices: &[usize]) -> Result<ComplexSparseMatrix> {
        let d = self.trunc.dim();
        let n = indices.len();
        let mut position = vec![u32::MAX; d * d];
        for (p, &v) in indices.iter().enumerate() {
            if v >= d * d {
                return Err(Error::DimensionMismatch {
                    expected: d * d,
                    got: v,
                });
            }
            position[v] = p as u32;
        }
        let mut triplets = Vec::with_capacity(n * 12);
        let mut buf = Vec::new();
        for (col, &v) in indices.iter().enumerate() {
            let (k, l) = (v % d, v / d);
            self.column(k, l, &mut buf);
            for &(i, j, val) in &buf {
                let p = position[i + d * j];
                if p == u32::MAX {
                    return Err(Error::InvalidState(format!(
                        "index subset is not invariant: column ({k},{l}) reaches ({i},{j})"
                    )));
                }
                triplets.push((p as usize, col, val));
            }
        }
        ComplexSparseMatrix::from_triplets(n, n, triplets)
    }

    pub fn assemble(&self) -> Result<Superoperator> {
        let d = self.trunc.dim();
        if d * d > LIOUVILLE_DIM_CAP {
            return Err(Error::InvalidTruncation(format!(
                "Liouville dimension {} exceeds {LIOUVILLE_DIM_CAP}; use the sector solver",
                d * d
            )));
        }
        let all: Vec<usize> = (0..d * d).collect();
        Superoperator::new(self.assemble_restricted(&all)?, d, Some(self.trunc))
    }
}

pub fn build_liouvillian(params: &SystemParams, trunc: &TruncationSpec) -> Result<Superoperator> {
    LindbladModel::new(params, trunc)?.assemble()
}

/// Liouvillian with a common frequency `shift` added to both modes.
pub fn build_liouvillian_with_frame_shift(
    params: &SystemParams,
    trunc: &TruncationSpec,
    shift: f64,
) -> Result<Superoperator> {
    LindbladModel::with_frame_shift(params, trunc, shift)?.assemble()
}

/// Vec indices (i, j) whose excitation numbers differ by `k`:
/// exc(i) − exc(j) = k. Each such set is invariant under the model's L.
pub fn excitation_sector(trunc: &TruncationSpec, k: isize) -> Vec<usize> {
    let d = trunc.dim();
    let exc: Vec<isize> = (0..d).map(|i| trunc.excitations(i) as isize).collect();
    let mut out = Vec::new();
    for j in 0..d {
        for i in 0..d {
            if exc[i] - exc[j] == k {
                out.push(i + d * j);
            }
        }
    }
    out
}
