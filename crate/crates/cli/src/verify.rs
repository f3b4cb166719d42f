use std::collections::BTreeMap;

use dbarrier::floquet::{
    bessel_j, gamma_parameter, neumann_sum_check, sideband_mix_with, truncation_for, BracketVariant, DriveParameters,
};
use dbarrier::oracle::{exact_scattering, PiecewisePotential, Segment};
use dbarrier::pathsum::{
    composed_amplitude, find_resonances, is_near_resonance, phase_mismatch, region_amplitudes,
    single_barrier_amplitude, transmission_at_resonance, transmission_off_resonance,
};
use dbarrier::prescriptions::{aoyama_harano, consistency_residual, conventional_wkb, eltschka};
use dbarrier::{kinematics, BarrierSystem, KinematicState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::energy_grid;

pub const AOYAMA_HARANO_RESIDUAL: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Known deviation, shown but not counted as a failure.
    Reported,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        let status = if measured <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name,
            status,
            measured,
            tolerance,
            note: String::new(),
        }
    }

    fn error(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            name,
            status: Status::Fail,
            measured: f64::NAN,
            tolerance: f64::NAN,
            note: err.to_string(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

type Outcome = Result<Check, dbarrier::Error>;

fn run(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    f().unwrap_or_else(|e| Check::error(name, e))
}

fn states(system: &BarrierSystem) -> Vec<KinematicState> {
    let v0 = system.v0();
    energy_grid(0.05 * v0, 0.95 * v0, 50)
        .into_iter()
        .filter_map(|e| kinematics(system, e).ok())
        .collect()
}

fn off_resonance(system: &BarrierSystem) -> Vec<KinematicState> {
    states(system)
        .into_iter()
        .filter(|s| !is_near_resonance(s, &eltschka(s)))
        .collect()
}

pub fn run_all(system: &BarrierSystem) -> Vec<Check> {
    vec![
        run("consistency_eltschka", || {
            let worst = states(system)
                .iter()
                .map(|s| consistency_residual(&eltschka(s)).abs())
                .fold(0.0, f64::max);
            Ok(Check::at_most("consistency_eltschka", worst, 1e-14))
        }),
        run("consistency_wkb", || {
            Ok(Check::at_most(
                "consistency_wkb",
                consistency_residual(&conventional_wkb()).abs(),
                1e-14,
            ))
        }),
        run("consistency_aoyama_harano", || {
            let r = consistency_residual(&aoyama_harano());
            let mut c = Check::at_most("consistency_aoyama_harano", r, AOYAMA_HARANO_RESIDUAL + 1e-7);
            if (r - AOYAMA_HARANO_RESIDUAL).abs() <= 1e-7 {
                c.status = Status::Reported;
            } else {
                c.status = Status::Fail;
            }
            Ok(c.with_note("expected 1 - 1/sqrt(2); these factors violate the condition"))
        }),
        run("barrier_reflection_ratio", || {
            let mut worst: f64 = 0.0;
            for s in off_resonance(system) {
                let p = eltschka(&s);
                let r = region_amplitudes(&s, &p)?;
                let want = -p.reflection_weight() * Complex64::cis(-p.phi) * (-s.theta).exp();
                worst = worst.max((r.t12_minus / r.t12 - want).norm());
            }
            Ok(Check::at_most("barrier_reflection_ratio", worst, 1e-12))
        }),
        run("well_phase_ratio", || {
            let mut worst: f64 = 0.0;
            for s in off_resonance(system) {
                let p = eltschka(&s);
                let r = region_amplitudes(&s, &p)?;
                worst = worst.max((r.t23 / r.t21 - Complex64::cis(-phase_mismatch(&s, &p))).norm());
            }
            Ok(Check::at_most("well_phase_ratio", worst, 1e-12))
        }),
        run("closed_form_vs_composed", || {
            // |T_composed + T_closed| e^{4θ}; the two differ by an overall sign
            let mut worst: f64 = 0.0;
            for s in off_resonance(system) {
                let p = eltschka(&s);
                if phase_mismatch(&s, &p).sin().abs() <= 0.1 {
                    continue;
                }
                let c = composed_amplitude(&s, &p)?;
                let t = transmission_off_resonance(&s, &p)?.amplitude;
                worst = worst.max((c + t).norm() * (4.0 * s.theta).exp());
            }
            Ok(Check::at_most("closed_form_vs_composed", worst, 10.0)
                .with_note("max |difference| * exp(4 theta) over off-resonance energies"))
        }),
        run("single_barrier_exact", || {
            let mut worst: f64 = 0.0;
            for s in states(system) {
                let p = eltschka(&s);
                let t = single_barrier_amplitude(&s, &p)?.norm_sqr();
                let pot = PiecewisePotential::new(vec![Segment {
                    length: system.barrier_width(),
                    height: system.v0(),
                }])?;
                let exact = exact_scattering(&pot, s.e)?.transmission.norm_sqr();
                worst = worst.max(((t - exact) / exact).abs());
            }
            Ok(Check::at_most("single_barrier_exact", worst, 1e-12))
        }),
        run("oracle_unitarity", || {
            let (unitarity, _) = oracle_sample()?;
            Ok(Check::at_most("oracle_unitarity", unitarity, 1e-10))
        }),
        run("oracle_reciprocity", || {
            let (_, reciprocity) = oracle_sample()?;
            Ok(Check::at_most("oracle_reciprocity", reciprocity, 1e-12))
        }),
        run("resonance_unimodular", || {
            let v0 = system.v0();
            let roots = find_resonances(system, 0.05 * v0, 0.95 * v0, 2000)?;
            let mut worst: f64 = 0.0;
            for e in &roots {
                let s = kinematics(system, *e)?;
                worst = worst.max((transmission_at_resonance(&s)?.probability - 1.0).abs());
            }
            Ok(Check::at_most("resonance_unimodular", worst, 1e-12).with_note(format!("{} resonances", roots.len())))
        }),
        run("bessel_normalization", || {
            let mut worst: f64 = 0.0;
            for u in [0.5, 1.0, 2.0, 5.0, 10.0] {
                let n = u as i32 + 40;
                let mut sum = 0.0;
                for k in -n..=n {
                    sum += bessel_j(k, u)?.powi(2);
                }
                worst = worst.max((sum - 1.0).abs());
            }
            Ok(Check::at_most("bessel_normalization", worst, 1e-12))
        }),
        run("neumann_identities", || {
            let mut worst: f64 = 0.0;
            for u in [0.25, 0.5, 1.0] {
                for gamma in [1.5, 2.0, 2.570_796_3] {
                    for m in 0..=3 {
                        let (s0, s1) = neumann_sum_check(u, gamma, m, truncation_for(gamma * u))?;
                        let jm = bessel_j(m, gamma * u)?;
                        worst = worst
                            .max((s0 - jm).abs())
                            .max((s1 - m as f64 * (1.0 - 1.0 / gamma) * jm).abs());
                    }
                }
            }
            Ok(Check::at_most("neumann_identities", worst, 1e-8))
        }),
        run("gamma_self_consistency", gamma_self_consistency),
    ]
}

/// Worst unitarity defect and reciprocity mismatch over random profiles.
fn oracle_sample() -> Result<(f64, f64), dbarrier::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut unitarity, mut reciprocity): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let n = rng.gen_range(1..=5);
        let segments = (0..n)
            .map(|_| Segment {
                length: rng.gen_range(0.05..2.0),
                height: rng.gen_range(-5.0..20.0),
            })
            .collect();
        let pot = PiecewisePotential::new(segments)?;
        let e = rng.gen_range(0.1..15.0);
        let fwd = exact_scattering(&pot, e)?;
        let rev = exact_scattering(&pot.reversed(), e)?;
        unitarity = unitarity.max(fwd.unitarity_defect().abs());
        reciprocity = reciprocity.max((fwd.transmission - rev.transmission).norm());
    }
    Ok((unitarity, reciprocity))
}

/// Residual of the J_n(γf) ansatz under one pass of sideband mixing.
pub fn ansatz_residual(
    system: &BarrierSystem,
    state: &KinematicState,
    f: f64,
    omega: f64,
    gamma: f64,
) -> Result<f64, dbarrier::Error> {
    let drive = DriveParameters::with_ratio(f, omega)?;
    let nt = truncation_for(gamma.max(gamma_parameter(state)?) * f);
    let mut incident = BTreeMap::new();
    for n in -(nt as i32)..=nt as i32 {
        incident.insert(n, bessel_j(n, gamma * f)?);
    }
    let out = sideband_mix_with(state, system, &drive, &incident, nt, BracketVariant::Exponential)?;
    Ok(out
        .iter()
        .map(|(m, b)| (b - incident.get(m).copied().unwrap_or(0.0)).norm())
        .fold(0.0, f64::max))
}

fn gamma_self_consistency() -> Outcome {
    let system = BarrierSystem::new(2.0, 2.0, std::f64::consts::FRAC_PI_2)?;
    let state = kinematics(&system, 1.0)?;
    let gamma = gamma_parameter(&state)?;
    let f = 1.0;
    let ratio = |g: f64| -> Result<f64, dbarrier::Error> {
        Ok(ansatz_residual(&system, &state, f, 0.02, g)? / ansatz_residual(&system, &state, f, 0.01, g)?)
    };
    let ansatz = ratio(gamma)?;
    let control = ratio(0.5 * gamma)?;
    let pass = ansatz >= 3.5 && control < 2.5;
    Ok(Check {
        name: "gamma_self_consistency",
        status: if pass { Status::Pass } else { Status::Fail },
        measured: ansatz,
        tolerance: 3.5,
        note: format!(
            "residual shrink on halving omega: ansatz {ansatz:.4}, control {control:.4} (needs >= 3.5 and < 2.5)"
        ),
    })
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}

pub fn render_text(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Reported => "REPORTED",
        };
        out.push_str(&format!(
            "{status:<8} {:<26} measured={:.6e} tolerance={:.1e}",
            c.name, c.measured, c.tolerance
        ));
        if !c.note.is_empty() {
            out.push_str(&format!("  # {}", c.note));
        }
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    out.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    out
}
