//! Scalar bracketing utilities.

use crate::scalar::Real;

/// Bisection on a sign change of `f` inside `[lo, hi]`. Returns the midpoint of the final bracket.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Option<T> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Some(lo);
    }
    if f_hi == T::zero() {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    let half = T::lit(0.5);
    while (hi - lo).abs() > tol {
        let mid = half * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(half * (lo + hi))
}

/// First sign change of `f` on `[start, end]` scanned with stride `step`, refined by bisection.
pub fn first_root<T: Real, F: FnMut(T) -> T>(mut f: F, start: T, end: T, step: T, tol: T) -> Option<T> {
    let mut a = start;
    let mut fa = f(a);
    if fa == T::zero() {
        return Some(a);
    }
    while a < end {
        let b = (a + step).min(end);
        let fb = f(b);
        if fb == T::zero() || fb.signum() != fa.signum() {
            return bisect(&mut f, a, b, tol);
        }
        a = b;
        fa = fb;
    }
    None
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`. Returns `(argmax, max)`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = T::lit(0.5) * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}
