use dbarrier::floquet::{quench_points, sideband_spectrum, truncation_for, DriveParameters, MAX_ARGUMENT};
use dbarrier::oracle::{exact_peak_positions, exact_transmission, from_double_barrier};
use dbarrier::pathsum::{find_resonances, on_physical_branch, resonance_residual, transmission};
use dbarrier::{kinematics, BarrierSystem, PrescriptionKind};
use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Format, RangeArgs, Settings, SidebandArgs, SweepArgs, TransmitArgs};
use crate::output::{
    csv_table, emit, json_value, render_table, QuenchRow, ResonanceRow, SidebandHeader, SidebandRow, TransmissionRow,
};
use crate::CliError;

pub const DEFAULT_SWEEP_POINTS: usize = 1001;
pub const DEFAULT_SEARCH_POINTS: usize = 2000;
pub const DEFAULT_RANGE: (f64, f64) = (0.05, 0.95);
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-8;
pub const DEFAULT_OMEGA: f64 = 0.01;
pub const DEFAULT_F_MAX: f64 = 2.0;

fn compute(e: dbarrier::Error) -> CliError {
    CliError::Compute(e.to_string())
}

fn checked_energy(system: &BarrierSystem, key: &str, e: f64) -> Result<f64, CliError> {
    system
        .check_energy(e)
        .map(|_| e)
        .map_err(|err| CliError::Usage(format!("{key}: {err}")))
}

pub fn transmission_row(
    system: &BarrierSystem,
    e: f64,
    kind: PrescriptionKind,
    compare_exact: bool,
) -> Result<TransmissionRow, CliError> {
    let state = kinematics(system, e).map_err(compute)?;
    let t = transmission(system, e, kind).map_err(compute)?;
    let exact = if compare_exact {
        let pot = from_double_barrier(system);
        Some(exact_transmission(&pot, e).map_err(compute)?.probability)
    } else {
        None
    };
    Ok(TransmissionRow {
        e,
        k: state.k,
        q: state.q,
        theta: state.theta,
        l: state.l_phase,
        t2_semiclassical: t.probability,
        regime: t.regime.as_str(),
        t2_exact: exact,
        abs_err: exact.map(|x| (t.probability - x).abs()),
    })
}

pub fn transmit(settings: &Settings, args: TransmitArgs) -> Result<(), CliError> {
    let e = settings
        .file
        .pick(args.energy, "energy")?
        .ok_or_else(|| CliError::Usage("energy: required (--energy)".into()))?;
    let e = checked_energy(&settings.system, "energy", e)?;
    let row = transmission_row(&settings.system, e, settings.prescription, settings.compare_exact)?;
    emit(&render_table(&[row], settings.format)?, settings.output.as_deref())
}

struct Range {
    e_min: f64,
    e_max: f64,
    points: usize,
}

fn resolve_range(settings: &Settings, args: RangeArgs, default_points: usize) -> Result<Range, CliError> {
    let v0 = settings.system.v0();
    let file = &settings.file;
    let e_min = file.pick(args.e_min, "e-min")?.unwrap_or(DEFAULT_RANGE.0 * v0);
    let e_max = file.pick(args.e_max, "e-max")?.unwrap_or(DEFAULT_RANGE.1 * v0);
    let points = file.pick(args.points, "points")?.unwrap_or(default_points);
    let e_min = checked_energy(&settings.system, "e-min", e_min)?;
    let e_max = checked_energy(&settings.system, "e-max", e_max)?;
    if e_min >= e_max {
        return Err(CliError::Usage(format!(
            "e-max: must exceed e-min ({e_min}), got {e_max}"
        )));
    }
    if points < 2 {
        return Err(CliError::Usage(format!("points: need at least 2, got {points}")));
    }
    Ok(Range { e_min, e_max, points })
}

/// `points` energies from `e_min` to `e_max`, both ends exact.
pub fn energy_grid(e_min: f64, e_max: f64, points: usize) -> Vec<f64> {
    let step = (e_max - e_min) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                e_max
            } else {
                e_min + step * i as f64
            }
        })
        .collect()
}

pub fn sweep(settings: &Settings, args: SweepArgs) -> Result<(), CliError> {
    let workers = settings.file.pick(args.workers, "workers")?;
    let range = resolve_range(settings, args.range, DEFAULT_SWEEP_POINTS)?;
    if workers == Some(0) {
        return Err(CliError::Usage("workers: must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Compute(format!("workers: cannot start thread pool: {e}")))?;

    let grid = energy_grid(range.e_min, range.e_max, range.points);
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&e| transmission_row(&settings.system, e, settings.prescription, settings.compare_exact))
            .collect::<Result<Vec<_>, _>>()
    })?;
    emit(&render_table(&rows, settings.format)?, settings.output.as_deref())
}

/// Pairs each root with its nearest peak when the peak agrees; unpaired
/// entries get rows of their own. Rows are ordered by energy.
pub fn pair_resonances(system: &BarrierSystem, roots: &[f64], peaks: Option<&[(f64, f64)]>) -> Vec<ResonanceRow> {
    let residual = |e: f64| kinematics(system, e).map(|s| resonance_residual(&s)).ok();
    let Some(peaks) = peaks else {
        return roots
            .iter()
            .map(|&e| ResonanceRow {
                e_semiclassical: Some(e),
                residual: residual(e),
                e_exact: None,
                t2_exact: None,
                abs_de: None,
            })
            .collect();
    };
    let nearest = |x: f64, ys: &[f64]| -> Option<usize> {
        (0..ys.len()).min_by(|&a, &b| (ys[a] - x).abs().total_cmp(&(ys[b] - x).abs()))
    };
    let peak_es: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    let mut rows = Vec::new();
    let mut peak_used = vec![false; peaks.len()];
    for &r in roots {
        let paired = nearest(r, &peak_es).filter(|&j| nearest(peak_es[j], roots).map(|i| roots[i]) == Some(r));
        match paired {
            Some(j) => {
                peak_used[j] = true;
                rows.push(ResonanceRow {
                    e_semiclassical: Some(r),
                    residual: residual(r),
                    e_exact: Some(peaks[j].0),
                    t2_exact: Some(peaks[j].1),
                    abs_de: Some((r - peaks[j].0).abs()),
                });
            }
            None => rows.push(ResonanceRow {
                e_semiclassical: Some(r),
                residual: residual(r),
                e_exact: None,
                t2_exact: None,
                abs_de: None,
            }),
        }
    }
    for (j, &(e, t)) in peaks.iter().enumerate() {
        if !peak_used[j] {
            rows.push(ResonanceRow {
                e_semiclassical: None,
                residual: None,
                e_exact: Some(e),
                t2_exact: Some(t),
                abs_de: None,
            });
        }
    }
    let key = |r: &ResonanceRow| r.e_semiclassical.or(r.e_exact).unwrap_or(f64::NAN);
    rows.sort_by(|a, b| key(a).total_cmp(&key(b)));
    rows
}

pub fn resonances(settings: &Settings, args: RangeArgs) -> Result<(), CliError> {
    let range = resolve_range(settings, args, DEFAULT_SEARCH_POINTS)?;
    let sys = &settings.system;
    let roots = find_resonances(sys, range.e_min, range.e_max, range.points).map_err(compute)?;
    let peaks = if settings.compare_exact {
        let pot = from_double_barrier(sys);
        let es = exact_peak_positions(&pot, range.e_min, range.e_max, range.points.max(16)).map_err(compute)?;
        let mut out = Vec::with_capacity(es.len());
        for e in es {
            out.push((e, exact_transmission(&pot, e).map_err(compute)?.probability));
        }
        Some(out)
    } else {
        None
    };
    let rows = pair_resonances(sys, &roots, peaks.as_deref());
    emit(&render_table(&rows, settings.format)?, settings.output.as_deref())
}

#[derive(Serialize)]
struct SidebandReport<'a> {
    gamma: f64,
    f: f64,
    resonance_residual: f64,
    sidebands: &'a [SidebandRow],
    quench: &'a [QuenchRow],
}

pub fn sidebands(settings: &Settings, args: SidebandArgs) -> Result<(), CliError> {
    let file = &settings.file;
    let sys = &settings.system;
    let e = file
        .pick(args.energy, "energy")?
        .ok_or_else(|| CliError::Usage("energy: required (--energy), e.g. a root from `resonances`".into()))?;
    let e = checked_energy(sys, "energy", e)?;
    let v1 = file.pick(args.v1, "v1")?.unwrap_or(0.0);
    let omega = file.pick(args.omega, "omega")?.unwrap_or(DEFAULT_OMEGA);
    let f_max = file.pick(args.f_max, "f-max")?.unwrap_or(DEFAULT_F_MAX);
    let tol = file
        .pick(args.resonance_tol, "resonance-tol")?
        .unwrap_or(DEFAULT_RESONANCE_TOL);
    let drive = DriveParameters::new(v1, omega).map_err(|e| CliError::Usage(e.to_string()))?;
    if !(f_max.is_finite() && f_max > 0.0) {
        return Err(CliError::Usage(format!("f-max: must be positive, got {f_max}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!("resonance-tol: must be positive, got {tol}")));
    }

    let state = kinematics(sys, e).map_err(compute)?;
    let residual = resonance_residual(&state);
    if residual.abs() >= tol {
        return Err(CliError::Usage(format!(
            "energy: {e} is not at a resonance (residual = {residual:e}, tolerance {tol:e})"
        )));
    }
    if !on_physical_branch(&state) {
        return Err(CliError::Usage(format!(
            "energy: {e} zeroes the residual on the kd = 2πn branch, which is not a resonance (residual = {residual:e})"
        )));
    }
    if !drive.is_first_order(sys) {
        warn!("omega = {omega} is large compared with v0; the first-order sideband picture is strained");
    }

    let gamma = dbarrier::floquet::gamma_parameter(&state).map_err(compute)?;
    let n_max = file
        .pick(args.n_max, "n-max")?
        .unwrap_or_else(|| truncation_for(gamma * drive.f));
    let spectrum = sideband_spectrum(&state, &drive, n_max).map_err(compute)?;
    let f_scan = if gamma * f_max > MAX_ARGUMENT {
        let clamped = MAX_ARGUMENT / gamma;
        warn!("f-max = {f_max} puts gamma*f beyond {MAX_ARGUMENT}; quench scan stops at f = {clamped}");
        clamped
    } else {
        f_max
    };
    let quench = quench_points(&state, 0, f_scan).map_err(compute)?;

    let header = SidebandHeader {
        gamma: spectrum.gamma,
        f: spectrum.f,
        resonance_residual: residual,
    };
    let rows: Vec<SidebandRow> = spectrum
        .amplitudes
        .iter()
        .map(|(&n, &a)| SidebandRow {
            n,
            j_n: a,
            probability: spectrum.probabilities[&n],
        })
        .collect();
    let quench: Vec<QuenchRow> = quench.into_iter().map(|f| QuenchRow { quench_n: 0, f }).collect();

    let text = match settings.format {
        Format::Csv => format!("{}\n{}\n{}", csv_table(&[header]), csv_table(&rows), csv_table(&quench)),
        Format::Json => json_value(&SidebandReport {
            gamma: header.gamma,
            f: header.f,
            resonance_residual: header.resonance_residual,
            sidebands: &rows,
            quench: &quench,
        })?,
    };
    emit(&text, settings.output.as_deref())
}
