use crate::fock::{self, ModeIndex, TruncationSpec};
use crate::state::DensityMatrix;

/// Top-level population above which a caller should warn.
pub const TRUNCATION_WARN: f64 = 1e-6;
/// Top-level population above which a result is rejected or flagged.
pub const TRUNCATION_ERROR: f64 = 1e-3;

/// ⟨a_m†a_m⟩.
pub fn mean_phonon(rho: &DensityMatrix, mode: ModeIndex) -> f64 {
    let n = fock::mode_number(mode, rho.trunc());
    let z = rho.expectation(&n).expect("operator built on the state's own truncation");
    debug_assert!(z.im.abs() < 1e-10, "imaginary phonon number {}", z.im);
    z.re
}

/// ⟨a₁†a₁ − a₂†a₂⟩.
pub fn phonon_difference(rho: &DensityMatrix) -> f64 {
    mean_phonon(rho, ModeIndex::One) - mean_phonon(rho, ModeIndex::Two)
}

/// Largest (over modes) marginal population of the two highest retained Fock levels.
pub fn check_truncation(rho: &DensityMatrix, trunc: &TruncationSpec) -> f64 {
    let mut top = [0.0f64; 2];
    for i in 0..trunc.dim() {
        let p = rho.get(i, i).re;
        let (n1, n2) = trunc.occupations(i);
        if n1 + 1 >= trunc.n_max(ModeIndex::One) {
            top[0] += p;
        }
        if n2 + 1 >= trunc.n_max(ModeIndex::Two) {
            top[1] += p;
        }
    }
    top[0].max(top[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_state_observables() {
        let t = TruncationSpec::new(4, 3).unwrap();
        let rho = DensityMatrix::fock(t, 2, 0);
        assert_eq!(mean_phonon(&rho, ModeIndex::One), 2.0);
        assert_eq!(mean_phonon(&rho, ModeIndex::Two), 0.0);
        assert_eq!(phonon_difference(&rho), 2.0);
        assert_eq!(check_truncation(&DensityMatrix::vacuum(t), &t), 0.0);
        assert_eq!(check_truncation(&DensityMatrix::fock(t, 4, 0), &t), 1.0);
        assert_eq!(check_truncation(&DensityMatrix::fock(t, 3, 0), &t), 1.0);
        assert_eq!(check_truncation(&DensityMatrix::fock(t, 2, 1), &t), 0.0);
    }

    #[test]
    fn swap_symmetric_state_has_no_difference() {
        let t = TruncationSpec::symmetric(3).unwrap();
        let mut psi = vec![num_complex::Complex64::new(0.0, 0.0); t.dim()];
        psi[t.index(1, 2)] = 1.0.into();
        psi[t.index(2, 1)] = 1.0.into();
        let rho = DensityMatrix::from_pure(&psi, t).unwrap();
        assert!(phonon_difference(&rho).abs() < 1e-15);
    }
}
