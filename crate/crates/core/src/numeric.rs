/// Inverts a continuous nondecreasing `f` on `[lo, hi]`, assuming
/// `f(lo) <= target <= f(hi)`. Stops once `|f(mid) - target| <= tol` or the
/// bracket cannot be split any further in floating point.
pub(crate) fn bisect_increasing<F>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo) - target;
    if f_lo >= -tol {
        return lo;
    }
    let mut f_hi = f(hi) - target;
    if f_hi <= tol {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid) - target;
        if f_mid.abs() <= tol {
            return mid;
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if -f_lo <= f_hi {
        lo
    } else {
        hi
    }
}

/// Rounds `q` to the nearest integer when it is within a relative `1e-12`
/// of it, so that ceilings and floors of exact integer ratios computed
/// through logarithms land on the intended side.
pub(crate) fn snap_integer(q: f64) -> f64 {
    let k = q.round();
    if (q - k).abs() <= 1e-12 * k.abs().max(1.0) {
        k
    } else {
        q
    }
}
