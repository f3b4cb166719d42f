use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("energy {energy} outside the tunneling window (0, {v0})")]
    EnergyOutOfRange { energy: f64, v0: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("geometric series diverges: |ratio| = {ratio} >= 1")]
    DivergentSeries { ratio: f64 },

    #[error("input is at resonance (|sin(L - phi)| = {sin_mismatch:e}); use the resonance formula")]
    AtResonance { sin_mismatch: f64 },

    #[error("input is not at resonance (|sin(L - phi)| = {sin_mismatch:e})")]
    NotAtResonance { sin_mismatch: f64 },

    #[error("connection phase is singular: |sin(phi)| = {sin_phi:e}")]
    SingularPhase { sin_phi: f64 },

    #[error("numerical overflow while composing layer matrices")]
    NumericalOverflow,

    #[error("Bessel J_{order}({x}) requested outside the supported envelope |n| <= 200, |x| <= 100")]
    OutOfEnvelope { order: i64, x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
