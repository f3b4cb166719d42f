//! Connection prescriptions (N, N̄, φ, φ̄) and the turning-point factors they
//! induce.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::KinematicState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrescriptionKind {
    /// Energy-dependent factors that make a single rectangular barrier exact.
    Eltschka,
    /// N = N̄ = 1, φ = −φ̄ = π/4.
    AoyamaHarano,
    /// N = N̄ = 1, φ = −φ̄ = π/2.
    ConventionalWkb,
    Custom,
}

impl PrescriptionKind {
    /// Builds the prescription of this kind at the given state. `Custom` has
    /// no canonical values and yields `None`.
    pub fn at(self, state: &KinematicState) -> Option<ConnectionPrescription> {
        match self {
            Self::Eltschka => Some(eltschka(state)),
            Self::AoyamaHarano => Some(aoyama_harano()),
            Self::ConventionalWkb => Some(conventional_wkb()),
            Self::Custom => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eltschka => "eltschka",
            Self::AoyamaHarano => "aoyama-harano",
            Self::ConventionalWkb => "wkb",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for PrescriptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrescriptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eltschka" => Ok(Self::Eltschka),
            "aoyama-harano" => Ok(Self::AoyamaHarano),
            "wkb" => Ok(Self::ConventionalWkb),
            other => Err(Error::InvalidParameter {
                name: "prescription",
                reason: format!("expected one of eltschka, aoyama-harano, wkb; got `{other}`"),
            }),
        }
    }
}

/// Amplitude factors and phases on the two sides of a turning point.
///
/// The consistency condition N·N̄ = sin½(φ − φ̄) is not enforced here; see
/// [`consistency_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionPrescription {
    pub n_amp: f64,
    pub n_bar_amp: f64,
    pub phi: f64,
    pub phi_bar: f64,
    pub kind: PrescriptionKind,
}

impl ConnectionPrescription {
    pub fn custom(n_amp: f64, n_bar_amp: f64, phi: f64, phi_bar: f64) -> Result<Self> {
        for (name, v) in [("n_amp", n_amp), ("n_bar_amp", n_bar_amp)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("amplitude factor must be positive, got {v}"),
                });
            }
        }
        for (name, v) in [("phi", phi), ("phi_bar", phi_bar)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("phase must be finite, got {v}"),
                });
            }
        }
        Ok(Self {
            n_amp,
            n_bar_amp,
            phi,
            phi_bar,
            kind: PrescriptionKind::Custom,
        })
    }

    /// N / 2N̄, the weight of a forbidden→forbidden reflection.
    pub fn reflection_weight(&self) -> f64 {
        self.n_amp / (2.0 * self.n_bar_amp)
    }
}

/// The prescription that reproduces the exact single rectangular barrier:
/// N = 2N̄ = 2√(kq/(k²+q²)), φ = −φ̄ = 2 arctan(q/k).
pub fn eltschka(state: &KinematicState) -> ConnectionPrescription {
    let (k, q) = (state.k, state.q);
    let n_amp = 2.0 * (k * q / (k * k + q * q)).sqrt();
    let phi = 2.0 * q.atan2(k);
    ConnectionPrescription {
        n_amp,
        n_bar_amp: 0.5 * n_amp,
        phi,
        phi_bar: -phi,
        kind: PrescriptionKind::Eltschka,
    }
}

pub fn aoyama_harano() -> ConnectionPrescription {
    ConnectionPrescription {
        n_amp: 1.0,
        n_bar_amp: 1.0,
        phi: FRAC_PI_4,
        phi_bar: -FRAC_PI_4,
        kind: PrescriptionKind::AoyamaHarano,
    }
}

pub fn conventional_wkb() -> ConnectionPrescription {
    ConnectionPrescription {
        n_amp: 1.0,
        n_bar_amp: 1.0,
        phi: FRAC_PI_2,
        phi_bar: -FRAC_PI_2,
        kind: PrescriptionKind::ConventionalWkb,
    }
}

/// N·N̄ − sin½(φ − φ̄). Zero when the prescription satisfies the consistency
/// condition.
pub fn consistency_residual(p: &ConnectionPrescription) -> f64 {
    p.n_amp * p.n_bar_amp - (0.5 * (p.phi - p.phi_bar)).sin()
}

/// The four kinds of turning-point crossing a path can make.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurningPointTransition {
    AllowedToAllowed,
    ForbiddenToForbidden,
    ForbiddenToAllowed,
    AllowedToForbidden,
}

impl TurningPointTransition {
    pub const ALL: [Self; 4] = [
        Self::AllowedToAllowed,
        Self::ForbiddenToForbidden,
        Self::ForbiddenToAllowed,
        Self::AllowedToForbidden,
    ];

    /// Weight column of the table, i.e. the modulus of the factor.
    pub fn weight(self, p: &ConnectionPrescription) -> f64 {
        match self {
            Self::AllowedToAllowed => 1.0,
            Self::ForbiddenToForbidden => p.reflection_weight(),
            Self::ForbiddenToAllowed | Self::AllowedToForbidden => p.n_amp,
        }
    }
}

/// Phase × weight picked up by a path at a turning point.
pub fn turning_point_factor(p: &ConnectionPrescription, t: TurningPointTransition) -> Complex64 {
    use TurningPointTransition::*;
    let phase = match t {
        AllowedToAllowed => Complex64::cis(-p.phi),
        ForbiddenToForbidden => -Complex64::cis(-0.5 * (p.phi - p.phi_bar)),
        ForbiddenToAllowed => Complex64::i() * Complex64::cis(-0.5 * p.phi),
        AllowedToForbidden => Complex64::cis(-0.5 * p.phi),
    };
    phase * t.weight(p)
}
