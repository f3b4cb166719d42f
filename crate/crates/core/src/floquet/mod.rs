//! Sidebands of the resonant double barrier when the well floor oscillates
//! as V₁ cos ωt.
//!
//! Incident sideband amplitudes A⁽ⁿ⁾ are mixed by the well into outgoing
//! amplitudes B⁽ᵐ⁾. The ansatz A⁽ⁿ⁾ = J_n(γf) is a fixed point of that map to
//! first order in ω when γ is chosen from the energy dependence of k and q.

mod bessel;

use std::collections::BTreeMap;

use log::warn;
use num_complex::Complex64;

pub use bessel::{bessel_j, bessel_j_sequence, MAX_ARGUMENT, MAX_ORDER};

use crate::error::{Error, Result};
use crate::kinematics::{BarrierSystem, KinematicState};
use crate::pathsum::{is_near_resonance, SINGULAR_SIN_PHI};
use crate::prescriptions::eltschka;
use crate::search::bisect_root;

/// Extra orders kept beyond the Bessel argument in every infinite sum.
pub const TRUNCATION_MARGIN: usize = 20;

/// ħω above this fraction of V₀ is outside the first-order regime.
pub const OMEGA_WARN_FRACTION: f64 = 0.05;

pub fn truncation_for(argument: f64) -> usize {
    argument.abs().ceil() as usize + TRUNCATION_MARGIN
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParameters {
    pub v1: f64,
    pub omega: f64,
    pub f: f64,
}

impl DriveParameters {
    pub fn new(v1: f64, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        if !(v1.is_finite() && v1 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "v1",
                reason: format!("must be a non-negative finite number, got {v1}"),
            });
        }
        Ok(Self {
            v1,
            omega,
            f: v1 / omega,
        })
    }

    /// Fixes f = V₁/ħω directly, which is what stays constant as ω → 0.
    pub fn with_ratio(f: f64, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "f",
                reason: format!("must be a non-negative finite number, got {f}"),
            });
        }
        Ok(Self {
            v1: f * omega,
            omega,
            f,
        })
    }

    pub fn is_first_order(&self, system: &BarrierSystem) -> bool {
        self.omega <= OMEGA_WARN_FRACTION * system.v0()
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be a positive finite number, got {omega}"),
        })
    }
}

fn sin_phi(state: &KinematicState) -> Result<f64> {
    let s = eltschka(state).phi.sin();
    if s < SINGULAR_SIN_PHI {
        return Err(Error::SingularPhase { sin_phi: s });
    }
    Ok(s)
}

/// γ = −(L + sin φ) / [(q′/q)(k/k′) sin φ].
pub fn gamma_parameter(state: &KinematicState) -> Result<f64> {
    let s = sin_phi(state)?;
    Ok(-(state.l_phase + s) / ((state.dq_de / state.q) * (state.k / state.dk_de) * s))
}

/// First-order shift of L − φ for a path that absorbs n quanta on entry,
/// l in the well and leaves in sideband m.
pub fn phase_correction(state: &KinematicState, system: &BarrierSystem, omega: f64, n: i32, l: i32, m: i32) -> f64 {
    let s = eltschka(state).phi.sin();
    let (a, b) = correction_coefficients(state, system, s);
    omega * (a * (n - l) as f64 + b * m as f64)
}

fn correction_coefficients(state: &KinematicState, system: &BarrierSystem, sin_phi: f64) -> (f64, f64) {
    let a = state.dk_de * system.well_width() + sin_phi * state.dk_de / state.k;
    let b = sin_phi * state.dq_de / state.q;
    (a, b)
}

/// Truncated double sums Σ J_{n−l}(u) J_{m−l}(u) J_n(γu) and the same with a
/// factor l. They approach J_m(γu) and m(1 − 1/γ) J_m(γu).
pub fn neumann_sum_check(u: f64, gamma: f64, m: i32, n_trunc: usize) -> Result<(f64, f64)> {
    let needed = truncation_for(gamma * u);
    if n_trunc < needed {
        return Err(Error::InvalidParameter {
            name: "n_trunc",
            reason: format!("needs at least {needed} for argument {}", gamma * u),
        });
    }
    let nt = n_trunc as i32;
    let (mut s0, mut s1) = (0.0, 0.0);
    for n in -nt..=nt {
        let outer = bessel_j(n, gamma * u)?;
        for l in -nt..=nt {
            let w = bessel_j(n - l, u)? * bessel_j(m - l, u)? * outer;
            s0 += w;
            s1 += w * l as f64;
        }
    }
    Ok((s0, s1))
}

/// Form of the first-order resonance factor applied to each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketVariant {
    /// 1 − i(L−φ)₁
    Linear,
    /// 1 − (L−φ)₁
    PrintedReal,
    /// e^{−i(L−φ)₁}, the phase before expansion.
    Exponential,
}

impl BracketVariant {
    fn factor(self, x: f64) -> Complex64 {
        match self {
            BracketVariant::Linear => Complex64::new(1.0, -x),
            BracketVariant::PrintedReal => Complex64::new(1.0 - x, 0.0),
            BracketVariant::Exponential => Complex64::new(0.0, -x).exp(),
        }
    }
}

pub fn sideband_mix(
    state: &KinematicState,
    system: &BarrierSystem,
    drive: &DriveParameters,
    incident: &BTreeMap<i32, f64>,
    n_trunc: usize,
) -> Result<BTreeMap<i32, Complex64>> {
    sideband_mix_with(state, system, drive, incident, n_trunc, BracketVariant::Linear)
}

/// B⁽ᵐ⁾ = Σ_{n,l} J_{n−l}(f) J_{m−l}(f) · bracket · A⁽ⁿ⁾ for |m|, |l| ≤ n_trunc.
pub fn sideband_mix_with(
    state: &KinematicState,
    system: &BarrierSystem,
    drive: &DriveParameters,
    incident: &BTreeMap<i32, f64>,
    n_trunc: usize,
    variant: BracketVariant,
) -> Result<BTreeMap<i32, Complex64>> {
    let p = eltschka(state);
    if !is_near_resonance(state, &p) {
        return Err(Error::NotAtResonance {
            sin_mismatch: (state.l_phase - p.phi).sin(),
        });
    }
    if !drive.is_first_order(system) {
        warn!(
            "omega = {} exceeds {} V0; first-order mixing is unreliable",
            drive.omega, OMEGA_WARN_FRACTION
        );
    }
    let (a, b) = correction_coefficients(state, system, p.phi.sin());
    let nt = n_trunc as i32;
    let span = (incident.keys().map(|n| n.abs()).max().unwrap_or(0) + nt).max(2 * nt);
    let table = signed_table(span as usize, drive.f)?;
    let j = |order: i32| table[(order + span) as usize];

    let mut out = BTreeMap::new();
    for m in -nt..=nt {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&n, &amp) in incident {
            if amp == 0.0 {
                continue;
            }
            for l in -nt..=nt {
                let weight = j(n - l) * j(m - l);
                if weight == 0.0 {
                    continue;
                }
                let x = drive.omega * (a * (n - l) as f64 + b * m as f64);
                acc += variant.factor(x) * (weight * amp);
            }
        }
        out.insert(m, acc);
    }
    Ok(out)
}

/// J_{−span}(x), …, J_{span}(x).
fn signed_table(span: usize, x: f64) -> Result<Vec<f64>> {
    if span > MAX_ORDER as usize {
        return Err(Error::OutOfEnvelope { order: span as i64, x });
    }
    let pos = bessel_j_sequence(span, x)?;
    let mut out = Vec::with_capacity(2 * span + 1);
    for n in (1..=span).rev() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * pos[n]);
    }
    out.extend_from_slice(&pos);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSpectrum {
    pub gamma: f64,
    pub f: f64,
    pub n_max: usize,
    pub amplitudes: BTreeMap<i32, f64>,
    pub probabilities: BTreeMap<i32, f64>,
}

impl SidebandSpectrum {
    pub fn total_probability(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Sideband weights J_n(γf)² for |n| ≤ n_max. An undriven well has only n = 0.
pub fn sideband_spectrum(state: &KinematicState, drive: &DriveParameters, n_max: usize) -> Result<SidebandSpectrum> {
    let gamma = gamma_parameter(state)?;
    let mut amplitudes = BTreeMap::new();
    if drive.f == 0.0 {
        amplitudes.insert(0, 1.0);
    } else {
        let table = signed_table(n_max, gamma * drive.f)?;
        for (i, v) in table.into_iter().enumerate() {
            amplitudes.insert(i as i32 - n_max as i32, v);
        }
    }
    let probabilities = amplitudes.iter().map(|(&n, &a)| (n, a * a)).collect();
    Ok(SidebandSpectrum {
        gamma,
        f: drive.f,
        n_max,
        amplitudes,
        probabilities,
    })
}

/// Scan step in u = γf; far below the spacing of Bessel zeros.
const QUENCH_SCAN_STEP: f64 = 0.05;
pub const QUENCH_TOLERANCE: f64 = 1e-10;

/// Drive strengths f in (0, f_max] at which sideband n is switched off.
pub fn quench_points(state: &KinematicState, n: i32, f_max: f64) -> Result<Vec<f64>> {
    if !(f_max.is_finite() && f_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "f_max",
            reason: format!("must be a positive finite number, got {f_max}"),
        });
    }
    let gamma = gamma_parameter(state)?;
    let u_max = gamma * f_max;
    bessel_j(n, u_max)?;
    let jn = |f: f64| bessel_j(n, gamma * f).unwrap_or(f64::NAN);

    let steps = (u_max / QUENCH_SCAN_STEP).ceil().max(1.0) as usize;
    let df = f_max / steps as f64;
    let mut out = Vec::new();
    let mut lo = 0.5 * df.min(1e-3);
    let mut f_lo = jn(lo);
    for i in 1..=steps {
        let hi = if i == steps { f_max } else { df * i as f64 };
        let f_hi = jn(hi);
        if f_hi == 0.0 {
            out.push(hi);
        } else if f_lo != 0.0 && f_lo.signum() != f_hi.signum() {
            out.push(bisect_root(jn, lo, hi, QUENCH_TOLERANCE));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(out)
}
