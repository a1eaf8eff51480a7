use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeIndex;

/// Physical rates of the coupled oscillator pair, in units of the gain `G`.
///
/// Frequencies are taken in the rotating frame ω₁ = 0, ω₂ = Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Detuning Δ = ω₂ − ω₁.
    pub delta: f64,
    /// Kerr coefficient of mode 1.
    pub k1: f64,
    /// Kerr coefficient of mode 2.
    pub k2: f64,
    /// One-phonon gain rate G.
    pub gain: f64,
    /// Two-phonon loss rate κ.
    pub kappa: f64,
    /// Dissipative coupling V.
    pub v: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            k1: 0.0,
            k2: 0.0,
            gain: 1.0,
            kappa: 0.0,
            v: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(delta: f64, k1: f64, k2: f64, gain: f64, kappa: f64, v: f64) -> Result<Self> {
        let p = Self {
            delta,
            k1,
            k2,
            gain,
            kappa,
            v,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("k1", self.k1),
            ("k2", self.k2),
            ("gain", self.gain),
            ("kappa", self.kappa),
            ("v", self.v),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite")));
        }
        if self.gain <= 0.0 {
            return Err(Error::InvalidParams("gain must be > 0".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams("kappa must be >= 0".into()));
        }
        if self.v < 0.0 {
            return Err(Error::InvalidParams("v must be >= 0".into()));
        }
        if self.k1 < 0.0 || self.k2 < 0.0 {
            return Err(Error::InvalidParams("Kerr coefficients must be >= 0".into()));
        }
        Ok(())
    }

    /// Natural frequency of `mode` in the rotating frame.
    pub fn omega(&self, mode: ModeIndex) -> f64 {
        match mode {
            ModeIndex::One => 0.0,
            ModeIndex::Two => self.delta,
        }
    }

    pub fn kerr(&self, mode: ModeIndex) -> f64 {
        match mode {
            ModeIndex::One => self.k1,
            ModeIndex::Two => self.k2,
        }
    }

    /// Same physics with both Kerr coefficients set to `k`.
    pub fn with_kerr(self, k: f64) -> Self {
        Self {
            k1: k,
            k2: k,
            ..self
        }
    }
}
