//! Barrier geometry and the energy-dependent wavenumbers.
//!
//! Units: ħ = 2m = 1 throughout, so an energy E corresponds to a free
//! wavenumber k = √E and a decay constant q = √(V₀ − E) under a barrier of
//! height V₀. Lengths are in the reciprocal of those wavenumber units.

use crate::error::{Error, Result};

/// Energies closer than this fraction of V₀ to either end of the tunneling
/// window are rejected.
pub const EDGE_FRACTION: f64 = 1e-12;

/// A symmetric double rectangular barrier: two identical barriers of height
/// `v0` and width `barrier_width` enclosing a field-free well of width
/// `well_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSystem {
    v0: f64,
    barrier_width: f64,
    well_width: f64,
}

impl BarrierSystem {
    pub fn new(v0: f64, barrier_width: f64, well_width: f64) -> Result<Self> {
        positive("v0", v0)?;
        positive("w", barrier_width)?;
        positive("d", well_width)?;
        Ok(Self {
            v0,
            barrier_width,
            well_width,
        })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn barrier_width(&self) -> f64 {
        self.barrier_width
    }

    pub fn well_width(&self) -> f64 {
        self.well_width
    }

    /// Checks that `e` lies strictly inside the tunneling window.
    pub fn check_energy(&self, e: f64) -> Result<()> {
        let margin = EDGE_FRACTION * self.v0;
        if !e.is_finite() || e <= margin || e >= self.v0 - margin {
            return Err(Error::EnergyOutOfRange { energy: e, v0: self.v0 });
        }
        Ok(())
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be a positive finite number, got {value}"),
        })
    }
}

/// Every energy-dependent scalar the semiclassical formulas need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub e: f64,
    pub k: f64,
    pub q: f64,
    /// Tunneling action q·w of one barrier.
    pub theta: f64,
    /// Well phase k·d.
    pub l_phase: f64,
    pub dk_de: f64,
    pub dq_de: f64,
}

impl KinematicState {
    /// q/k, which equals tan(φ/2) for the exact rectangular-barrier prescription.
    pub fn q_over_k(&self) -> f64 {
        self.q / self.k
    }
}

pub fn kinematics(system: &BarrierSystem, e: f64) -> Result<KinematicState> {
    system.check_energy(e)?;
    let k = e.sqrt();
    let q = (system.v0 - e).sqrt();
    Ok(KinematicState {
        e,
        k,
        q,
        theta: q * system.barrier_width,
        l_phase: k * system.well_width,
        dk_de: 0.5 / k,
        dq_de: -0.5 / q,
    })
}

/// Central-difference estimates of (dk/dE, dq/dE).
pub fn finite_difference_derivatives(system: &BarrierSystem, e: f64, h: f64) -> Result<(f64, f64)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("stencil step must be positive, got {h}"),
        });
    }
    let lo = kinematics(system, e - h)?;
    let hi = kinematics(system, e + h)?;
    Ok(((hi.k - lo.k) / (2.0 * h), (hi.q - lo.q) / (2.0 * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_energy_gives_unit_wavenumbers() {
        let sys = BarrierSystem::new(2.0, 1.0, 1.0).unwrap();
        let s = kinematics(&sys, 1.0).unwrap();
        assert_eq!((s.k, s.q, s.theta, s.l_phase), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn quarter_energy() {
        let sys = BarrierSystem::new(1.0, 2.0, 3.0).unwrap();
        let s = kinematics(&sys, 0.25).unwrap();
        assert_relative_eq!(s.k, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.q, 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_relative_eq!(s.theta, 1.732_050_807_568_877_2, epsilon = 1e-15);
        assert_relative_eq!(s.l_phase, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn above_barrier_is_rejected() {
        let sys = BarrierSystem::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(kinematics(&sys, 1.5), Err(Error::EnergyOutOfRange { .. })));
        assert!(matches!(kinematics(&sys, 0.0), Err(Error::EnergyOutOfRange { .. })));
        assert!(matches!(
            kinematics(&sys, 1.0 - 1e-14),
            Err(Error::EnergyOutOfRange { .. })
        ));
        assert!(matches!(
            kinematics(&sys, f64::NAN),
            Err(Error::EnergyOutOfRange { .. })
        ));
    }

    #[test]
    fn invalid_geometry_names_the_field() {
        let err = BarrierSystem::new(1.0, -1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "w", .. }));
        assert!(BarrierSystem::new(0.0, 1.0, 1.0).is_err());
        assert!(BarrierSystem::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn stencil_matches_analytic_at_unit_energy() {
        let sys = BarrierSystem::new(2.0, 1.0, 1.0).unwrap();
        let (dk, dq) = finite_difference_derivatives(&sys, 1.0, 1e-5).unwrap();
        assert!((dk - 0.5).abs() < 1e-8);
        assert!((dq + 0.5).abs() < 1e-8);

        let sys = BarrierSystem::new(1.0, 1.0, 1.0).unwrap();
        let (dk, _) = finite_difference_derivatives(&sys, 0.5, 1e-5).unwrap();
        assert!((dk - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
    }

    #[test]
    fn stencil_leaving_window_is_rejected() {
        let sys = BarrierSystem::new(1.0, 1.0, 1.0).unwrap();
        assert!(finite_difference_derivatives(&sys, 0.99, 0.02).is_err());
        assert!(finite_difference_derivatives(&sys, 0.5, 0.0).is_err());
    }

    #[test]
    fn analytic_derivatives_match_stencil_on_grid() {
        let sys = BarrierSystem::new(3.7, 1.0, 1.0).unwrap();
        for i in 0..100 {
            let e = sys.v0() * (0.05 + 0.9 * i as f64 / 99.0);
            let s = kinematics(&sys, e).unwrap();
            let (dk, dq) = finite_difference_derivatives(&sys, e, 1e-5 * e).unwrap();
            assert!(((dk - s.dk_de) / s.dk_de).abs() < 1e-6, "dk at {e}");
            assert!(((dq - s.dq_de) / s.dq_de).abs() < 1e-6, "dq at {e}");
        }
    }

    proptest! {
        #[test]
        fn wavenumbers_square_to_barrier_height(v0 in 0.01f64..1e3, frac in 0.001f64..0.999) {
            let sys = BarrierSystem::new(v0, 1.0, 1.0).unwrap();
            let s = kinematics(&sys, frac * v0).unwrap();
            prop_assert!(((s.k * s.k + s.q * s.q - v0) / v0).abs() < 1e-14);
            prop_assert!(s.dk_de > 0.0 && s.dq_de < 0.0);
        }

        #[test]
        fn kinematics_is_pure(v0 in 0.1f64..100.0, frac in 0.01f64..0.99, w in 0.1f64..5.0, d in 0.1f64..5.0) {
            let sys = BarrierSystem::new(v0, w, d).unwrap();
            let a = kinematics(&sys, frac * v0).unwrap();
            let b = kinematics(&sys, frac * v0).unwrap();
            prop_assert_eq!(a.k.to_bits(), b.k.to_bits());
            prop_assert_eq!(a.theta.to_bits(), b.theta.to_bits());
            prop_assert_eq!(a.l_phase.to_bits(), b.l_phase.to_bits());
        }
    }
}
