//! One-dimensional bisection and golden-section search used by boundary
//! finders and sweep refinement.

/// Golden-section maximization of `f` on [lo, hi] to bracket width `tol`.
/// Returns (argmax, max). `f` should be unimodal on the interval; on flat or
/// multi-modal inputs the result is a local maximizer.
pub fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = (lo + hi) / 2.0;
    let fx = f(x);
    if fx >= f1 && fx >= f2 {
        (x, fx)
    } else if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection for the switching point of a predicate that is true at `lo` and
/// false at `hi` (or the reverse). Returns the midpoint of the final bracket,
/// accurate to `tol`. Panics if the predicate does not differ at the ends.
pub fn bisect_flip(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> bool) -> f64 {
    let at_lo = f(lo);
    let at_hi = f(hi);
    assert!(
        at_lo != at_hi,
        "bisect_flip needs a sign change on [{lo}, {hi}]"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection root finding for a continuous function with f(lo) and f(hi) of
/// opposite sign. Returns the midpoint of the final bracket.
pub fn bisect_root(lo: f64, hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> Result<f64, String> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(format!("no sign change on [{lo}, {hi}]"));
    }
    Ok(bisect_flip(lo, hi, tol, |x| f(x).signum() == flo.signum()))
}
