//! Exact transmission through piecewise-constant potentials.
//!
//! Each interface and each constant segment is a 2×2 scattering block acting
//! on right- and left-moving plane-wave amplitudes referenced to the segment
//! edges. Blocks are chained with the Redheffer star product, so every
//! propagation factor has modulus ≤ 1 and thick barriers never overflow.
//!
//! Between two opaque stretches the multiple-reflection denominator
//! 1 − r′r is of order e^{−2θ}. Wherever the medium is classically allowed,
//! the chain is split and |r| = 1 − δ is rebuilt from flux conservation, so
//! that the small part of the denominator never comes from a subtraction.
//!
//! Nothing here is shared with the semiclassical code.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::BarrierSystem;
use crate::pathsum::{Method, Regime, TransmissionResult};
use crate::search::golden_section_min;

/// Relative energy shift applied when E coincides with a segment height.
pub const DEGENERATE_SHIFT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub length: f64,
    pub height: f64,
}

/// Constant-height segments between two field-free leads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewisePotential {
    segments: Vec<Segment>,
}

impl PiecewisePotential {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.length.is_finite() && s.length > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "length",
                    reason: format!("segment length must be positive, got {}", s.length),
                });
            }
            if !s.height.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "height",
                    reason: format!("segment height must be finite, got {}", s.height),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn free() -> Self {
        Self::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().copied().collect(),
        }
    }

    fn height_scale(&self) -> f64 {
        self.segments.iter().map(|s| s.height.abs()).fold(0.0, f64::max)
    }
}

pub fn from_double_barrier(system: &BarrierSystem) -> PiecewisePotential {
    let barrier = Segment {
        length: system.barrier_width(),
        height: system.v0(),
    };
    let well = Segment {
        length: system.well_width(),
        height: 0.0,
    };
    PiecewisePotential {
        segments: vec![barrier, well, barrier],
    }
}

/// Transmission and reflection amplitudes for a wave incident from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub transmission: Complex64,
    pub reflection: Complex64,
}

impl Scattering {
    /// |t|² + |r|² − 1; zero for a flux-conserving solution.
    pub fn unitarity_defect(&self) -> f64 {
        self.transmission.norm_sqr() + self.reflection.norm_sqr() - 1.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    t: Complex64,
    r: Complex64,
    rp: Complex64,
    tp: Complex64,
}

impl Block {
    fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            t: one,
            r: zero,
            rp: zero,
            tp: one,
        }
    }

    fn interface(left: Complex64, right: Complex64) -> Self {
        let sum = left + right;
        Self {
            t: 2.0 * left / sum,
            r: (left - right) / sum,
            rp: (right - left) / sum,
            tp: 2.0 * right / sum,
        }
    }

    fn propagation(wavenumber: Complex64, length: f64) -> Self {
        let p = (Complex64::i() * wavenumber * length).exp();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            t: p,
            r: zero,
            rp: zero,
            tp: p,
        }
    }

    /// `self` on the left, `next` on the right.
    fn star(self, next: Self) -> Self {
        self.star_with(next, 1.0 - self.rp * next.r)
    }

    /// Star product across an allowed medium with wavenumber `km`, where
    /// `self` starts in a medium `ka` and `next` ends in a medium `kb`, both
    /// allowed too.
    fn star_compensated(self, next: Self, ka: f64, km: f64, kb: f64) -> Self {
        let (ra, rb) = (self.rp.norm(), next.r.norm());
        if ra * rb < 0.5 {
            return self.star(next);
        }
        // flux: |r|² + (k_out/k_m)|t|² = 1 on each side
        let da = ka / km * self.tp.norm_sqr() / (1.0 + ra);
        let db = kb / km * next.t.norm_sqr() / (1.0 + rb);
        let psi = self.rp.arg() + next.r.arg();
        let turn = Complex64::cis(psi);
        let den =
            Complex64::new(0.0, -2.0 * (0.5 * psi).sin()) * Complex64::cis(0.5 * psi) + turn * (da + db - da * db);
        self.star_with(next, den)
    }

    fn star_with(self, next: Self, den: Complex64) -> Self {
        let inv = 1.0 / den;
        Self {
            t: next.t * self.t * inv,
            r: self.r + self.tp * next.r * self.t * inv,
            rp: next.rp + next.t * self.rp * next.tp * inv,
            tp: self.tp * next.tp * inv,
        }
    }
}

fn local_wavenumber(e: f64, height: f64) -> Complex64 {
    let diff = e - height;
    if diff >= 0.0 {
        Complex64::new(diff.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-diff).sqrt())
    }
}

/// Moves `e` off any segment height it coincides with.
fn regularize_energy(pot: &PiecewisePotential, e: f64) -> f64 {
    let scale = pot.height_scale().max(e);
    let eps = DEGENERATE_SHIFT * scale;
    let mut shifted = e;
    for _ in 0..4 {
        match pot.segments.iter().find(|s| (shifted - s.height).abs() < 0.5 * eps) {
            Some(s) => {
                warn!(
                    "energy {shifted} coincides with segment height {}; shifting by {eps:e}",
                    s.height
                );
                shifted += eps;
            }
            None => break,
        }
    }
    shifted
}

/// Chains the segments, splitting at every allowed segment.
///
/// `runs[i]` goes from allowed medium i to allowed medium i + 1 (leads
/// included) and ends with the propagation across medium i + 1.
fn compose(e: f64, segments: &[Segment]) -> Block {
    let lead = local_wavenumber(e, 0.0);
    let mut runs = Vec::new();
    let mut media = vec![lead.re];
    let mut run = Block::identity();
    let mut left = lead;
    for s in segments {
        let inside = local_wavenumber(e, s.height);
        run = run.star(Block::interface(left, inside));
        run = run.star(Block::propagation(inside, s.length));
        if inside.im == 0.0 {
            runs.push(run);
            media.push(inside.re);
            run = Block::identity();
        }
        left = inside;
    }
    runs.push(run.star(Block::interface(left, lead)));
    media.push(lead.re);

    // right to left, so the right operand always ends in the lead
    let mut acc = runs.pop().unwrap_or_else(Block::identity);
    for (i, block) in runs.into_iter().enumerate().rev() {
        acc = block.star_compensated(acc, media[i], media[i + 1], lead.re);
    }
    acc
}

pub fn exact_scattering(pot: &PiecewisePotential, e: f64) -> Result<Scattering> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::EnergyOutOfRange {
            energy: e,
            v0: pot.height_scale(),
        });
    }
    let e = regularize_energy(pot, e);
    let acc = compose(e, &pot.segments);
    let out = Scattering {
        transmission: acc.t,
        reflection: acc.r,
    };
    let finite = [out.transmission, out.reflection]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(Error::NumericalOverflow);
    }
    Ok(out)
}

/// Probabilities this close to one are flagged as resonant.
pub const FULL_TRANSMISSION: f64 = 1.0 - 1e-9;

pub fn exact_transmission(pot: &PiecewisePotential, e: f64) -> Result<TransmissionResult> {
    let s = exact_scattering(pot, e)?;
    let probability = s.transmission.norm_sqr();
    let regime = if probability >= FULL_TRANSMISSION {
        Regime::Resonance
    } else {
        Regime::OffResonance
    };
    Ok(TransmissionResult {
        amplitude: s.transmission,
        probability,
        regime,
        method: Method::ExactOracle,
    })
}

fn probability(pot: &PiecewisePotential, e: f64) -> f64 {
    exact_scattering(pot, e).map_or(f64::NAN, |s| s.transmission.norm_sqr())
}

/// Local maxima of |t|²(E) in `[e_min, e_max]`, located on a `grid_n`-point
/// grid and refined by golden-section search.
pub fn exact_peak_positions(pot: &PiecewisePotential, e_min: f64, e_max: f64, grid_n: usize) -> Result<Vec<f64>> {
    if !(e_min.is_finite() && e_min > 0.0) {
        return Err(Error::EnergyOutOfRange {
            energy: e_min,
            v0: pot.height_scale(),
        });
    }
    if !(e_max.is_finite() && e_max > e_min) {
        return Err(Error::EnergyOutOfRange {
            energy: e_max,
            v0: pot.height_scale(),
        });
    }
    if grid_n < 16 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            reason: format!("peak search needs at least 16 grid points, got {grid_n}"),
        });
    }
    let step = (e_max - e_min) / (grid_n - 1) as f64;
    let es: Vec<f64> = (0..grid_n).map(|i| e_min + step * i as f64).collect();
    let ts = es
        .iter()
        .map(|&e| exact_transmission(pot, e).map(|t| t.probability))
        .collect::<Result<Vec<_>>>()?;

    let mut peaks = Vec::new();
    for i in 1..grid_n - 1 {
        if ts[i] > ts[i - 1] && ts[i] >= ts[i + 1] {
            let (e, _) = golden_section_min(|e| -probability(pot, e), es[i - 1], es[i + 1], 1e-12);
            peaks.push(e);
        }
    }
    peaks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(peaks)
}
