//! Bracketed one-dimensional searches.

/// Bisection on a sign-changing bracket until it is narrower than `tol` or
/// cannot be split further in floating point.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal `f` on `[a, b]`. Returns the
/// best abscissa and its value.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Walks up to 64 representable doubles either side of `x` (within
/// `[lo, hi]`) and returns the one where `g` is smallest.
pub fn polish_by_ulps<G: Fn(f64) -> f64>(g: G, x: f64, lo: f64, hi: f64) -> f64 {
    let mut best = (x, g(x));
    for dir in [f64::INFINITY, f64::NEG_INFINITY] {
        let mut y = x;
        for _ in 0..64 {
            y = next_toward(y, dir);
            if y < lo || y > hi {
                break;
            }
            let gy = g(y);
            if gy < best.1 {
                best = (y, gy);
            }
            if best.1 == 0.0 {
                return best.0;
            }
        }
    }
    best.0
}

fn next_toward(x: f64, dir: f64) -> f64 {
    // x is finite and positive in every caller
    let bits = x.to_bits();
    if dir > x {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}
