//! Semiclassical transmission through the double barrier by summing over
//! turning-point paths.
//!
//! Regions are numbered 0..=4 from the left: lead, barrier, well, barrier,
//! lead. Amplitudes `T_ij` collect every path that enters region `i` and
//! leaves into region `j` while staying inside `i`; `B_ij` additionally
//! follows the particle after it has left and re-entered.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{kinematics, BarrierSystem, KinematicState};
use crate::prescriptions::{
    aoyama_harano, eltschka, turning_point_factor, ConnectionPrescription, PrescriptionKind,
    TurningPointTransition as Tp,
};
use crate::search::{bisect_root, golden_section_min, polish_by_ulps};

/// Below this |sin φ| the closed form and the sideband formulas are singular.
pub const SINGULAR_SIN_PHI: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    OffResonance,
    Resonance,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::OffResonance => "off-resonance",
            Regime::Resonance => "resonance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SemiclassicalClosedForm,
    SemiclassicalComposed,
    ResonanceMixed,
    ExactOracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionResult {
    pub amplitude: Complex64,
    pub probability: f64,
    pub regime: Regime,
    pub method: Method,
}

impl TransmissionResult {
    pub fn new(amplitude: Complex64, regime: Regime, method: Method) -> Self {
        Self {
            amplitude,
            probability: amplitude.norm_sqr(),
            regime,
            method,
        }
    }
}

/// Phase mismatch L − φ accumulated by one round trip's worth of well
/// propagation and reflection.
pub fn phase_mismatch(state: &KinematicState, p: &ConnectionPrescription) -> f64 {
    state.l_phase - p.phi
}

/// True where the resonant term of the closed-form denominator is at least as
/// large as the off-resonant one: |sin(L − φ)|·2 sinh θ cosh θ ≤ 1.
pub fn is_near_resonance(state: &KinematicState, p: &ConnectionPrescription) -> bool {
    phase_mismatch(state, p).sin().abs() * (2.0 * state.theta).sinh() <= 1.0
}

/// Amplitude to cross one barrier: enter it, bounce inside any even number of
/// times, and leave on the far side.
pub fn single_barrier_amplitude(state: &KinematicState, p: &ConnectionPrescription) -> Result<Complex64> {
    let decay = (-state.theta).exp();
    let bounce = turning_point_factor(p, Tp::ForbiddenToForbidden) * decay;
    if bounce.norm() >= 1.0 {
        return Err(Error::DivergentSeries { ratio: bounce.norm() });
    }
    let enter = turning_point_factor(p, Tp::AllowedToForbidden);
    let leave = turning_point_factor(p, Tp::ForbiddenToAllowed);
    Ok(enter * decay * leave / (1.0 - bounce * bounce))
}

/// Region amplitudes of the double barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionAmplitudes {
    /// T₁₂⁽⁺⁾ = T₃₄⁽⁺⁾
    pub t12: Complex64,
    /// T₁₂⁽⁻⁾ = T₃₂⁽⁺⁾
    pub t12_minus: Complex64,
    /// T₂₁⁽⁺⁾
    pub t21: Complex64,
    /// T₂₃⁽⁺⁾
    pub t23: Complex64,
    /// B₂₃⁽⁺⁾ from the exact solution of the four coupled re-entry equations.
    pub b23: Complex64,
    /// B₂₁⁽⁺⁾ from the same solution.
    pub b21: Complex64,
    /// B₂₃⁽⁺⁾ + B₂₁⁽⁺⁾ with O(e^{−4θ}) dropped.
    pub b_sum: Complex64,
    /// 1/(N e^{−iφ/2}), removes interface factors counted twice.
    pub interface_correction: Complex64,
}

pub fn region_amplitudes(state: &KinematicState, p: &ConnectionPrescription) -> Result<RegionAmplitudes> {
    let x = phase_mismatch(state, p);
    if is_near_resonance(state, p) {
        return Err(Error::AtResonance {
            sin_mismatch: x.sin().abs(),
        });
    }
    let decay = (-state.theta).exp();
    let enter_barrier = turning_point_factor(p, Tp::AllowedToForbidden);
    let enter_well = turning_point_factor(p, Tp::ForbiddenToAllowed);
    let wall = turning_point_factor(p, Tp::AllowedToAllowed);

    let t12 = single_barrier_amplitude(state, p)?;
    let t12_minus = turning_point_factor(p, Tp::ForbiddenToForbidden) * decay * t12;

    // Σ (e^{−iφ} e^{iL})^{2n} resummed: 1 − e^{2ix} = −2i sin x e^{ix}
    let eix = Complex64::cis(x);
    let round_trips = 1.0 / (Complex64::new(0.0, -2.0 * x.sin()) * eix);
    let t21 = enter_well * Complex64::cis(2.0 * state.l_phase) * wall * round_trips * enter_barrier;
    let t23 = t21 / eix;

    let corr = 1.0 / enter_barrier;

    // Exact solution of the four linear re-entry equations.
    let g = corr * corr * t21 * t12_minus;
    let one = Complex64::new(1.0, 0.0);
    let total = corr * t23 * t12 / ((one - g) * (one - g) - g * g / (eix * eix));
    let b23 = (one - g) * total;
    let b21 = g * total;

    let n = p.n_amp;
    let b_sum = corr / (1.0 / (t23 * t12) + (n / p.n_bar_amp) * decay * eix / (n * n));

    Ok(RegionAmplitudes {
        t12,
        t12_minus,
        t21,
        t23,
        b23,
        b21,
        b_sum,
        interface_correction: corr,
    })
}

/// Full double-barrier amplitude assembled from the region amplitudes:
/// T = T₁₂⁽⁺⁾ · (1/N e^{−iφ/2}) · (B₂₃⁽⁺⁾ + B₂₁⁽⁺⁾).
///
/// Carries an overall factor −1 relative to [`transmission_off_resonance`].
pub fn composed_amplitude(state: &KinematicState, p: &ConnectionPrescription) -> Result<Complex64> {
    let r = region_amplitudes(state, p)?;
    Ok(r.t12 * r.interface_correction * r.b_sum)
}

pub fn transmission_composed(state: &KinematicState, p: &ConnectionPrescription) -> Result<TransmissionResult> {
    Ok(TransmissionResult::new(
        composed_amplitude(state, p)?,
        Regime::OffResonance,
        Method::SemiclassicalComposed,
    ))
}

/// Closed-form off-resonance amplitude
/// T = −i / [ e^{i(L−φ)}/sin φ − 2 (sinh θ / sin φ) sin(L−φ) (cosh θ − i cot φ sinh θ) ].
pub fn transmission_off_resonance(state: &KinematicState, p: &ConnectionPrescription) -> Result<TransmissionResult> {
    let x = phase_mismatch(state, p);
    if is_near_resonance(state, p) {
        return Err(Error::AtResonance {
            sin_mismatch: x.sin().abs(),
        });
    }
    let sin_phi = p.phi.sin();
    if sin_phi.abs() < SINGULAR_SIN_PHI {
        return Err(Error::SingularPhase { sin_phi });
    }
    let (sh, ch) = (state.theta.sinh(), state.theta.cosh());
    let cot_phi = p.phi.cos() / sin_phi;
    let bracket = Complex64::new(ch, -cot_phi * sh);
    let denom = Complex64::cis(x) / sin_phi - bracket * (2.0 * sh / sin_phi * x.sin());
    Ok(TransmissionResult::new(
        Complex64::new(0.0, -1.0) / denom,
        Regime::OffResonance,
        Method::SemiclassicalClosedForm,
    ))
}

/// 1 − cos L − (q/k) sin L; zero on the even resonances.
pub fn resonance_residual(state: &KinematicState) -> f64 {
    1.0 - state.l_phase.cos() - state.q_over_k() * state.l_phase.sin()
}

/// The residual vanishes both at L − φ = 2πn and at L = 2πn. True when `state`
/// is closer to the first family.
pub fn on_physical_branch(state: &KinematicState) -> bool {
    wrap_to_pi(phase_mismatch(state, &eltschka(state))).abs() < wrap_to_pi(state.l_phase).abs()
}

/// Intermediate quantities of the resummed resonance amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceAssembly {
    /// Well-wall reflection dressed by one excursion into a barrier:
    /// e^{−iφ} + N e^{−iφ/2} e^{−θ} (i/2) e^{−θ} iN e^{−iφ/2}.
    pub dressed_reflection: Complex64,
    /// The same bracket in closed form, e^{−iφ}[1 − ½N²e^{−2θ}].
    pub dressed_reflection_closed: Complex64,
    /// e^{iL} / (1 − e^{2i(L−φ)}(1 − N²e^{−2θ})).
    pub resummed_oscillation: Complex64,
    /// Outer and inner interface factors wrapped around the resummed well.
    pub amplitude: Complex64,
    /// i e^{−i(L−φ)}, the value the assembly reduces to on resonance.
    pub resonant_phase: Complex64,
}

/// Resummed well oscillation with the inner interfaces taken from `inner`
/// and the lead-facing interfaces from `outer`.
pub fn resonance_assembly(
    state: &KinematicState,
    inner: &ConnectionPrescription,
    outer: &ConnectionPrescription,
) -> ResonanceAssembly {
    let x = phase_mismatch(state, inner);
    let decay = (-state.theta).exp();
    let n = inner.n_amp;
    let enter_barrier = turning_point_factor(inner, Tp::AllowedToForbidden);
    let enter_well = turning_point_factor(inner, Tp::ForbiddenToAllowed);
    let wall = turning_point_factor(inner, Tp::AllowedToAllowed);

    let dressed_reflection = wall + enter_barrier * decay * Complex64::new(0.0, 0.5) * decay * enter_well;
    let dressed_reflection_closed = wall * (1.0 - 0.5 * n * n * decay * decay);

    // 1 − e^{2ix}(1 − ε) written without cancelling 1 against 1 − ε
    let leak = n * n * decay * decay;
    let eix = Complex64::cis(x);
    let denom = Complex64::new(0.0, -2.0 * x.sin()) * eix + leak * eix * eix;
    let resummed_oscillation = Complex64::cis(state.l_phase) / denom;

    let lead_in = Complex64::cis(-outer.phi) * outer.n_amp;
    let lead_out = Complex64::cis(outer.phi) * outer.n_amp;
    let amplitude = lead_in * decay * enter_well * resummed_oscillation * enter_barrier * decay * lead_out;

    ResonanceAssembly {
        dressed_reflection,
        dressed_reflection_closed,
        resummed_oscillation,
        amplitude,
        resonant_phase: Complex64::i() * Complex64::cis(-x),
    }
}

/// Resonance amplitude with the exact-barrier prescription at the well and
/// the Aoyama–Harano factors at the leads.
pub fn transmission_at_resonance(state: &KinematicState) -> Result<TransmissionResult> {
    transmission_at_resonance_with(state, &eltschka(state), &aoyama_harano())
}

pub fn transmission_at_resonance_with(
    state: &KinematicState,
    inner: &ConnectionPrescription,
    outer: &ConnectionPrescription,
) -> Result<TransmissionResult> {
    if !is_near_resonance(state, inner) {
        return Err(Error::NotAtResonance {
            sin_mismatch: phase_mismatch(state, inner).sin().abs(),
        });
    }
    let a = resonance_assembly(state, inner, outer);
    Ok(TransmissionResult::new(
        a.amplitude,
        Regime::Resonance,
        Method::ResonanceMixed,
    ))
}

/// Picks the resonance or off-resonance formula for the given energy.
pub fn transmission(system: &BarrierSystem, e: f64, kind: PrescriptionKind) -> Result<TransmissionResult> {
    let state = kinematics(system, e)?;
    let p = kind.at(&state).ok_or_else(|| Error::InvalidParameter {
        name: "prescription",
        reason: "custom prescriptions have no canonical values".into(),
    })?;
    if is_near_resonance(&state, &p) {
        transmission_at_resonance_with(&state, &p, &aoyama_harano())
    } else {
        transmission_off_resonance(&state, &p)
    }
}

/// Bracket tolerance used by the resonance searches.
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Grid minima of the residual below this count as touching roots.
pub const TOUCH_TOLERANCE: f64 = 1e-10;

fn check_range(system: &BarrierSystem, e_min: f64, e_max: f64, grid_n: usize) -> Result<()> {
    system.check_energy(e_min)?;
    system.check_energy(e_max)?;
    if e_min >= e_max {
        return Err(Error::InvalidParameter {
            name: "e_min",
            reason: format!("e_min ({e_min}) must be below e_max ({e_max})"),
        });
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            reason: format!("need at least 2 grid points, got {grid_n}"),
        });
    }
    Ok(())
}

fn grid(e_min: f64, e_max: f64, n: usize) -> Vec<f64> {
    let step = (e_max - e_min) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { e_max } else { e_min + step * i as f64 })
        .collect()
}

fn state_at(system: &BarrierSystem, e: f64) -> KinematicState {
    kinematics(system, e).expect("energy inside a validated search range")
}

fn sin_mismatch_at(system: &BarrierSystem, e: f64) -> f64 {
    let s = state_at(system, e);
    phase_mismatch(&s, &eltschka(&s)).sin()
}

/// Roots of [`resonance_residual`] in `[e_min, e_max]` on the physical branch
/// L − φ = 2πn, ascending.
///
/// Sign changes on a `grid_n`-point grid are refined by bisection; grid
/// minima of |residual| that touch zero without changing sign are refined by
/// golden-section search. The residual also vanishes at L = 2πn for every
/// q/k; a root is kept only if L − φ lies closer to a multiple of 2π than L
/// does. Each root
/// is finally moved to the nearby double with the smallest evaluated
/// |sin(L − φ)|.
pub fn find_resonances(system: &BarrierSystem, e_min: f64, e_max: f64, grid_n: usize) -> Result<Vec<f64>> {
    check_range(system, e_min, e_max, grid_n)?;
    let f = |e: f64| resonance_residual(&state_at(system, e));
    let es = grid(e_min, e_max, grid_n);
    let rs: Vec<f64> = es.iter().map(|&e| f(e)).collect();

    let mut roots = Vec::new();
    for i in 0..es.len() {
        if rs[i] == 0.0 {
            roots.push(es[i]);
            continue;
        }
        if i + 1 < es.len() && rs[i + 1] != 0.0 && rs[i].signum() != rs[i + 1].signum() {
            roots.push(bisect_root(f, es[i], es[i + 1], ROOT_TOLERANCE));
        }
        if i > 0 && i + 1 < es.len() {
            let (a, b, c) = (rs[i - 1], rs[i], rs[i + 1]);
            let no_crossing = a.signum() == b.signum() && b.signum() == c.signum();
            if no_crossing && b.abs() <= a.abs() && b.abs() <= c.abs() {
                let (e, v) = golden_section_min(|e| f(e).abs(), es[i - 1], es[i + 1], ROOT_TOLERANCE);
                if v < TOUCH_TOLERANCE {
                    roots.push(e);
                }
            }
        }
    }

    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|&e| on_physical_branch(&state_at(system, e)))
        .map(|e| refine_phase_root(system, e, e_min, e_max))
        .collect();
    dedup_sorted(&mut out);
    Ok(out)
}

/// Bisects sin(L − φ) to adjacent doubles around a residual root `e`, then
/// polishes. Falls back to ulp polishing if no sign change is found nearby.
fn refine_phase_root(system: &BarrierSystem, e: f64, e_min: f64, e_max: f64) -> f64 {
    let f = |e: f64| sin_mismatch_at(system, e);
    let mut half = 1e3 * ROOT_TOLERANCE;
    let mut bracket = None;
    for _ in 0..8 {
        let (lo, hi) = ((e - half).max(e_min), (e + half).min(e_max));
        if f(lo).signum() != f(hi).signum() || f(lo) == 0.0 || f(hi) == 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        half *= 10.0;
    }
    let start = match bracket {
        Some((lo, hi)) => bisect_root(f, lo, hi, 0.0),
        None => e,
    };
    polish_by_ulps(|e| f(e).abs(), start, e_min, e_max)
}

/// Every zero of sin(L − φ) in `[e_min, e_max]`, i.e. both cos(L − φ) = +1
/// and −1 resonances, ascending.
pub fn find_phase_resonances(system: &BarrierSystem, e_min: f64, e_max: f64, grid_n: usize) -> Result<Vec<f64>> {
    check_range(system, e_min, e_max, grid_n)?;
    let f = |e: f64| sin_mismatch_at(system, e);
    let es = grid(e_min, e_max, grid_n);
    let vs: Vec<f64> = es.iter().map(|&e| f(e)).collect();
    let mut roots = Vec::new();
    for i in 0..es.len() {
        if vs[i] == 0.0 {
            roots.push(es[i]);
        } else if i + 1 < es.len() && vs[i + 1] != 0.0 && vs[i].signum() != vs[i + 1].signum() {
            let e = bisect_root(f, es[i], es[i + 1], ROOT_TOLERANCE);
            roots.push(polish_by_ulps(|e| f(e).abs(), e, e_min, e_max));
        }
    }
    dedup_sorted(&mut roots);
    Ok(roots)
}

/// Representative of `x` modulo 2π in (−π, π].
fn wrap_to_pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn dedup_sorted(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() < 1e3 * ROOT_TOLERANCE);
}
