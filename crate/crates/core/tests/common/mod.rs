//! Shared helpers for the integration suites. The flip-search here is
//! test-owned so boundary locations are measured independently of the
//! library's own search utilities.

use gausswork::nalgebra::Matrix4;

/// Standard-form covariance assembled directly, bypassing library builders.
pub fn cov(a: f64, b: f64, c1: f64, c2: f64) -> Matrix4<f64> {
    Matrix4::new(
        a, 0.0, c1, 0.0, //
        0.0, a, 0.0, c2, //
        c1, 0.0, b, 0.0, //
        0.0, c2, 0.0, b,
    )
}

/// Midpoint of the final bracket around the point where `pred` changes
/// value. Panics unless the endpoints disagree.
pub fn flip_point(mut lo: f64, mut hi: f64, tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let at_lo = pred(lo);
    assert_ne!(at_lo, pred(hi), "predicate must differ at the endpoints");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
