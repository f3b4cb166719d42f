//! Integer-order Bessel functions of the first kind.

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 200;
pub const MAX_ARGUMENT: f64 = 100.0;

const SERIES_LIMIT: f64 = 1.0;
const START_MARGIN: f64 = 60.0;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

fn check_envelope(n: i64, x: f64) -> Result<()> {
    if n.abs() > MAX_ORDER as i64 || !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::OutOfEnvelope { order: n, x });
    }
    Ok(())
}

fn parity(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// J_n(x) for |n| ≤ 200 and |x| ≤ 100, accurate to about 1e-12 absolute.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_envelope(n as i64, x)?;
    let order = n.abs();
    let sign = if n < 0 { parity(order) } else { 1.0 } * if x < 0.0 { parity(order) } else { 1.0 };
    let ax = x.abs();
    let value = if ax == 0.0 {
        if order == 0 {
            1.0
        } else {
            0.0
        }
    } else if ax < SERIES_LIMIT {
        series(order, ax)
    } else {
        miller(order as usize, ax)[order as usize]
    };
    Ok(sign * value)
}

/// J_0(x), …, J_{n_max}(x) from a single recurrence pass.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_envelope(n_max as i64, x)?;
    let ax = x.abs();
    let mut out = if ax == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        v
    } else if ax < SERIES_LIMIT {
        (0..=n_max as i32).map(|n| series(n, ax)).collect()
    } else {
        let mut v = miller(n_max, ax);
        v.truncate(n_max + 1);
        v
    };
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(out)
}

/// Power series about the origin; x > 0.
fn series(n: i32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let h2 = half * half;
    let mut sum = term;
    for k in 1..100 {
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence from a high even order, normalized with
/// J_0 + 2 Σ J_{2k} = 1. Returns at least orders 0..=n_max; x > 0.
fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let start = (n_max as f64).max(x) + START_MARGIN;
    let mut m = start.ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut vals = vec![0.0; m + 2];
    vals[m] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let next = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * next;
        }
        if next.abs() > RESCALE_ABOVE {
            for v in vals[k - 1..].iter_mut() {
                *v *= RESCALE_BY;
            }
            norm *= RESCALE_BY;
        }
    }
    norm += vals[0];
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}
