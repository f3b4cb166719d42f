//! Transmission through a symmetric double rectangular barrier.
//!
//! Natural units ħ = 2m = 1 throughout: energies and potentials share one
//! unit and wavenumbers are square roots of energies. See `UNITS.md`.

pub mod error;
pub mod floquet;
pub mod kinematics;
pub mod oracle;
pub mod pathsum;
pub mod prescriptions;
pub mod search;

pub use error::{Error, Result};
pub use kinematics::{kinematics, BarrierSystem, KinematicState};
pub use oracle::{exact_transmission, from_double_barrier, PiecewisePotential, Segment};
pub use pathsum::{transmission, Method, Regime, TransmissionResult};
pub use prescriptions::{ConnectionPrescription, PrescriptionKind};
