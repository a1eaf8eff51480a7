//! Dissipatively coupled Kerr van der Pol oscillators at three levels of
//! description: Lindblad master equation, semiclassical Langevin ensemble and
//! noiseless mean-field ODE.

pub mod classical;
pub mod error;
pub mod figures;
pub mod fock;
pub mod langevin;
pub mod liouvillian;
pub mod ode;
pub mod oracles;
pub mod params;
pub mod phase_space;
pub mod sparse;
pub mod state;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{ModeIndex, TruncationSpec};
pub use params::SystemParams;
pub use sparse::ComplexSparseMatrix;
pub use state::DensityMatrix;
