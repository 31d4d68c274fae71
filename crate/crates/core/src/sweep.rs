//! Parameter sweeps over the standard-form family, plus searches along the
//! classification boundaries: the work maximum on a boundary curve and the
//! parameter values where that maximum jumps between the curve's interior
//! and its endpoint on the c2 axis.
//!
//! Quadrant sweeps and boundary searches use the c1 ≤ 0 ≤ c2 quadrant. Both
//! the physical region and every boundary curve in that quadrant are
//! symmetric under (c1, c2) → (-c2, -c1), so boundary work maxima come in
//! mirror pairs of equal value (coinciding on the anti-diagonal); the search
//! scans the whole curve and reports one of them.

use crate::classify::{boundary_c2, classify, BoundaryKind};
use crate::gaussian::{is_physical, standard_form_state, StandardFormParams};
use crate::protocols::{run_protocol, work, work_report, ProtocolKind};
use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SweepError {
    #[error("sweep range is empty, unordered, or not finite")]
    BadRange,
    #[error("boundary curve has no physical points in the quadrant")]
    EmptyBoundary,
    #[error("no transition inside the scanned interval")]
    NoTransition,
    #[error("closed-form work disagrees with the trajectory route at row {row}")]
    VerifyMismatch { row: usize },
}

/// One grid point of a sweep: parameters, classification flags, and the two
/// protocol works (absent for nonphysical points).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub physical: bool,
    pub separable: bool,
    pub steer_b_to_a: bool,
    pub steer_a_to_b: bool,
    pub w_hom: Option<f64>,
    pub w_het: Option<f64>,
}

impl SweepRow {
    fn at(params: &StandardFormParams) -> SweepRow {
        let rec = classify(params);
        let (w_hom, w_het) = if rec.physical {
            let rep = work_report(params).expect("physical point has closed-form works");
            (Some(rep.w_hom), Some(rep.w_het))
        } else {
            (None, None)
        };
        SweepRow {
            a: params.a,
            b: params.b,
            c1: params.c1,
            c2: params.c2,
            physical: rec.physical,
            separable: rec.separable,
            steer_b_to_a: rec.steerable_b_to_a,
            steer_a_to_b: rec.steerable_a_to_b,
            w_hom,
            w_het,
        }
    }
}

fn checked_axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, SweepError> {
    if !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(SweepError::BadRange);
    }
    if n == 1 {
        if lo != hi {
            return Err(SweepError::BadRange);
        }
        return Ok(vec![lo]);
    }
    if lo >= hi {
        return Err(SweepError::BadRange);
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    v[n - 1] = hi;
    Ok(v)
}

/// Sweeps the symmetric family (a, a, c, -c) on an (a, c) grid. Rows are in
/// row-major order with `a` as the outer axis.
pub fn sweep_symmetric(
    a_lo: f64,
    a_hi: f64,
    na: usize,
    c_lo: f64,
    c_hi: f64,
    nc: usize,
) -> Result<Vec<SweepRow>, SweepError> {
    let avals = checked_axis(a_lo, a_hi, na)?;
    let cvals = checked_axis(c_lo, c_hi, nc)?;
    let cells: Vec<(f64, f64)> = avals
        .iter()
        .flat_map(|&a| cvals.iter().map(move |&c| (a, c)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(a, c)| SweepRow::at(&StandardFormParams::symmetric(a, c)))
        .collect())
}

/// Sweeps the c1 ≤ 0 ≤ c2 quadrant at fixed (a, b). Rows are in row-major
/// order with `c1` as the outer axis.
#[allow(clippy::too_many_arguments)]
pub fn sweep_quadrant(
    a: f64,
    b: f64,
    c1_lo: f64,
    c1_hi: f64,
    n1: usize,
    c2_lo: f64,
    c2_hi: f64,
    n2: usize,
) -> Result<Vec<SweepRow>, SweepError> {
    if !a.is_finite() || !b.is_finite() || a <= 0.0 || b <= 0.0 {
        return Err(SweepError::BadRange);
    }
    let c1vals = checked_axis(c1_lo, c1_hi, n1)?;
    let c2vals = checked_axis(c2_lo, c2_hi, n2)?;
    if c1vals.last().copied().unwrap_or(1.0) > 0.0 || c2vals[0] < 0.0 {
        return Err(SweepError::BadRange);
    }
    let cells: Vec<(f64, f64)> = c1vals
        .iter()
        .flat_map(|&c1| c2vals.iter().map(move |&c2| (c1, c2)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(c1, c2)| SweepRow::at(&StandardFormParams::new(a, b, c1, c2)))
        .collect())
}

/// Re-derives the works of every `stride`-th physical row through the
/// explicit measure/displace/squeeze trajectory and compares against the
/// stored closed-form values. Returns the number of rows checked.
pub fn verify_rows(rows: &[SweepRow], stride: usize) -> Result<usize, SweepError> {
    let stride = stride.max(1);
    let mut checked = 0;
    for (i, row) in rows.iter().enumerate().step_by(stride) {
        if !row.physical {
            continue;
        }
        let params = StandardFormParams::new(row.a, row.b, row.c1, row.c2);
        let origin = Vector2::zeros();
        let traj = |kind| run_protocol(&params, kind, origin).map(|t| t.work);
        let mismatch = SweepError::VerifyMismatch { row: i };
        let wx = traj(ProtocolKind::HomodyneX).map_err(|_| mismatch)?;
        let wp = traj(ProtocolKind::HomodyneP).map_err(|_| mismatch)?;
        let whet = traj(ProtocolKind::Heterodyne).map_err(|_| mismatch)?;
        let hom_ok = row
            .w_hom
            .is_some_and(|w| (w - 0.5 * (wx + wp)).abs() <= 1e-9);
        let het_ok = row.w_het.is_some_and(|w| (w - whet).abs() <= 1e-9);
        if !hom_ok || !het_ok {
            return Err(mismatch);
        }
        checked += 1;
    }
    Ok(checked)
}

/// Location and value of the work maximum on one boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryMax {
    pub c1: f64,
    pub c2: f64,
    pub work: f64,
    /// True when the maximum sits at either curve endpoint on an axis
    /// (c1 = 0 or c2 = 0), as opposed to the curve interior.
    pub at_edge: bool,
}

fn curve_point(
    kind: BoundaryKind,
    protocol: ProtocolKind,
    a: f64,
    b: f64,
    c1: f64,
) -> Option<(f64, f64)> {
    let c2 = boundary_c2(kind, a, b, c1).ok()?;
    if c2 < 0.0 {
        return None;
    }
    let params = StandardFormParams::new(a, b, c1, c2);
    if !is_physical(standard_form_state(&params).cov()) {
        return None;
    }
    let w = work(&params, protocol).ok()?;
    Some((c2, w))
}

/// Maximizes a protocol's work along one boundary curve at fixed (a, b).
///
/// The curve is scanned on a dense c1 grid and the best point is refined with
/// a golden-section search; `at_edge` reports whether the maximum sits at a
/// curve endpoint on one of the axes rather than in the interior.
pub fn boundary_work_max(
    kind: BoundaryKind,
    protocol: ProtocolKind,
    a: f64,
    b: f64,
) -> Result<BoundaryMax, SweepError> {
    if !a.is_finite() || !b.is_finite() || a <= 0.0 || b <= 0.0 {
        return Err(SweepError::BadRange);
    }
    let lo = -(a * b).sqrt() * (1.0 - 1e-12);
    let n = 2001;
    let step = -lo / (n - 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    let mut values: Vec<Option<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let c1 = lo + step * i as f64;
        let w = curve_point(kind, protocol, a, b, c1).map(|(_, w)| w);
        if let Some(w) = w {
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        values.push(w);
    }
    let (j, _) = best.ok_or(SweepError::EmptyBoundary)?;

    // Refine inside the largest valid bracket around the scan maximum.
    let win_lo = if j > 0 && values[j - 1].is_some() {
        lo + step * (j - 1) as f64
    } else {
        lo + step * j as f64
    };
    let win_hi = if j + 1 < n && values[j + 1].is_some() {
        lo + step * (j + 1) as f64
    } else {
        lo + step * j as f64
    };
    let eval = |c1: f64| {
        curve_point(kind, protocol, a, b, c1)
            .map(|(_, w)| w)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (c1_star, w_star) = if win_hi > win_lo {
        crate::search::golden_max(win_lo, win_hi, 1e-7, eval)
    } else {
        (win_lo, eval(win_lo))
    };
    let (c2_star, w_star2) = curve_point(kind, protocol, a, b, c1_star).unwrap_or_else(|| {
        // Golden search stays inside the bracket, but guard against float
        // dust at the curve ends by falling back to the scan point.
        let c1 = lo + step * j as f64;
        curve_point(kind, protocol, a, b, c1).expect("scan maximum is on the curve")
    });
    let _ = w_star;
    Ok(BoundaryMax {
        c1: c1_star,
        c2: c2_star,
        work: w_star2,
        at_edge: c1_star.abs() <= 1e-4 || c2_star.abs() <= 1e-4,
    })
}

fn bisect_flag<F>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<f64, SweepError>
where
    F: FnMut(f64) -> Result<bool, SweepError>,
{
    let flo = f(lo)?;
    if f(hi)? == flo {
        return Err(SweepError::NoTransition);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn transition_scan<F>(lo: f64, hi: f64, mut flag: F) -> Result<f64, SweepError>
where
    F: FnMut(f64) -> Result<bool, SweepError>,
{
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(SweepError::BadRange);
    }
    let n = 33;
    let step = (hi - lo) / (n - 1) as f64;
    let mut prev = flag(lo)?;
    for i in 1..n {
        let x = lo + step * i as f64;
        let cur = flag(x)?;
        if cur != prev {
            return bisect_flag(x - step, x, 1e-4, &mut flag);
        }
        prev = cur;
    }
    Err(SweepError::NoTransition)
}

/// Finds the `b` at which the boundary work maximum jumps between the curve
/// interior and the c2-axis endpoint, at fixed `a`. Resolved to 1e-4.
pub fn find_transition_b(
    kind: BoundaryKind,
    protocol: ProtocolKind,
    a: f64,
    b_lo: f64,
    b_hi: f64,
) -> Result<f64, SweepError> {
    transition_scan(b_lo, b_hi, |b| {
        boundary_work_max(kind, protocol, a, b).map(|m| m.at_edge)
    })
}

/// Finds the `a` at which the boundary work maximum jumps between the curve
/// interior and the c2-axis endpoint, at fixed `b`. Resolved to 1e-4.
pub fn find_transition_a(
    kind: BoundaryKind,
    protocol: ProtocolKind,
    b: f64,
    a_lo: f64,
    a_hi: f64,
) -> Result<f64, SweepError> {
    transition_scan(a_lo, a_hi, |a| {
        boundary_work_max(kind, protocol, a, b).map(|m| m.at_edge)
    })
}

/// Largest gap c2_physical - c2_nonsteerable over the quadrant, or negative
/// infinity when the curves never coexist. Positive gap means B→A steerable
/// states exist at this (a, b).
fn steering_margin(a: f64, b: f64) -> f64 {
    let margin = |c1: f64| -> Option<f64> {
        let ns = boundary_c2(BoundaryKind::NonsteerabilityBtoA, a, b, c1).ok()?;
        let ph = boundary_c2(BoundaryKind::Physicality, a, b, c1).ok()?;
        Some(ph - ns)
    };
    let lo = -(a * b).sqrt() * (1.0 - 1e-9);
    let n = 101;
    let step = -lo / (n - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_i: Option<usize> = None;
    for i in 0..n {
        let c1 = lo + step * i as f64;
        if let Some(m) = margin(c1) {
            if m > best {
                best = m;
                best_i = Some(i);
            }
        }
    }
    let Some(j) = best_i else {
        return f64::NEG_INFINITY;
    };
    let win_lo = lo + step * j.saturating_sub(1) as f64;
    let win_hi = lo + step * (j + 1).min(n - 1) as f64;
    if win_hi > win_lo {
        let (_, m) = crate::search::golden_max(win_lo, win_hi, 1e-8, |c1| {
            margin(c1).unwrap_or(f64::NEG_INFINITY)
        });
        m.max(best)
    } else {
        best
    }
}

/// Whether any B→A steerable state exists in the quadrant at fixed (a, b).
pub fn steerable_states_exist(a: f64, b: f64) -> bool {
    steering_margin(a, b) > 1e-7
}

/// Finds the `b` below which no B→A steerable states exist at fixed `a`,
/// resolved to 1e-4. The scanned interval must straddle the threshold.
pub fn find_steer_vanish_b(a: f64, b_lo: f64, b_hi: f64) -> Result<f64, SweepError> {
    if !b_lo.is_finite() || !b_hi.is_finite() || b_lo >= b_hi {
        return Err(SweepError::BadRange);
    }
    bisect_flag(b_lo, b_hi, 1e-4, |b| Ok(steerable_states_exist(a, b)))
}

fn fmt_opt(w: Option<f64>) -> String {
    w.map(|v| format!("{v}")).unwrap_or_default()
}

/// Writes rows as CSV: one header line, booleans as 0/1, works empty for
/// nonphysical rows, and a trailing newline.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "a,b,c1,c2,physical,separable,steer_b_to_a,steer_a_to_b,w_hom,w_het"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.a,
            r.b,
            r.c1,
            r.c2,
            r.physical as u8,
            r.separable as u8,
            r.steer_b_to_a as u8,
            r.steer_a_to_b as u8,
            fmt_opt(r.w_hom),
            fmt_opt(r.w_het),
        )?;
    }
    Ok(())
}

/// Writes rows as a JSON array of objects, followed by a trailing newline.
pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    serde_json::to_writer(&mut out, rows).map_err(io::Error::other)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::boundary_c2_separable;
    use crate::protocols::{work_het, work_hom};

    #[test]
    fn symmetric_sweep_is_row_major_with_a_outer() {
        let rows = sweep_symmetric(1.0, 2.0, 3, 0.0, 1.0, 2).unwrap();
        assert_eq!(rows.len(), 6);
        let coords: Vec<(f64, f64)> = rows.iter().map(|r| (r.a, r.c1)).collect();
        assert_eq!(
            coords,
            vec![
                (1.0, 0.0),
                (1.0, 1.0),
                (1.5, 0.0),
                (1.5, 1.0),
                (2.0, 0.0),
                (2.0, 1.0)
            ]
        );
        for r in &rows {
            assert_eq!(r.b, r.a);
            assert_eq!(r.c2, -r.c1);
        }
    }

    #[test]
    fn quadrant_sweep_is_row_major_with_c1_outer() {
        let rows = sweep_quadrant(5.0, 5.0, -1.0, 0.0, 2, 0.0, 3.0, 3).unwrap();
        assert_eq!(rows.len(), 6);
        let coords: Vec<(f64, f64)> = rows.iter().map(|r| (r.c1, r.c2)).collect();
        assert_eq!(
            coords,
            vec![
                (-1.0, 0.0),
                (-1.0, 1.5),
                (-1.0, 3.0),
                (0.0, 0.0),
                (0.0, 1.5),
                (0.0, 3.0)
            ]
        );
    }

    #[test]
    fn sweep_rows_carry_classification_and_works() {
        let rows = sweep_symmetric(5.0, 5.0, 1, 3.0, 4.95, 4).unwrap();
        // c = 3: separable but correlated, works from the closed forms.
        assert!(rows[0].physical && rows[0].separable);
        assert_eq!(rows[0].w_hom.unwrap(), 0.5);
        assert_eq!(rows[0].w_het.unwrap(), 0.75);
        // c = 3.65: still below the separability edge at c = 4.
        assert!(rows[1].physical && rows[1].separable && !rows[1].steer_b_to_a);
        // c = 4.3: entangled, still below the steering edge at sqrt(20).
        assert!(rows[2].physical && !rows[2].separable && !rows[2].steer_b_to_a);
        // c = 4.95: beyond sqrt(24) ≈ 4.899, nonphysical.
        assert!(!rows[3].physical);
        assert_eq!(rows[3].w_hom, None);
        assert_eq!(rows[3].w_het, None);
    }

    #[test]
    fn quadrant_rows_match_symmetric_works() {
        // (a, a, -c, c) and (a, a, c, -c) give the same works.
        let rows = sweep_quadrant(5.0, 5.0, -3.0, -3.0, 1, 3.0, 3.0, 1).unwrap();
        let p = StandardFormParams::symmetric(5.0, 3.0);
        assert!((rows[0].w_hom.unwrap() - work_hom(&p).unwrap()).abs() < 1e-15);
        assert!((rows[0].w_het.unwrap() - work_het(&p).unwrap()).abs() < 1e-15);
        assert!(rows[0].separable);
    }

    #[test]
    fn bad_ranges_are_rejected() {
        assert_eq!(
            sweep_symmetric(2.0, 1.0, 3, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        assert_eq!(
            sweep_symmetric(1.0, 2.0, 0, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        assert_eq!(
            sweep_symmetric(1.0, 2.0, 1, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        assert_eq!(
            sweep_symmetric(f64::NAN, 2.0, 2, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        // Quadrant sweeps must stay in c1 <= 0 <= c2.
        assert_eq!(
            sweep_quadrant(5.0, 5.0, -1.0, 0.5, 2, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        assert_eq!(
            sweep_quadrant(5.0, 5.0, -1.0, 0.0, 2, -0.5, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
        assert_eq!(
            sweep_quadrant(-1.0, 5.0, -1.0, 0.0, 2, 0.0, 1.0, 2).unwrap_err(),
            SweepError::BadRange
        );
    }

    #[test]
    fn csv_output_is_stable() {
        let rows = sweep_symmetric(1.0, 1.0, 1, 0.0, 0.1, 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expect = "a,b,c1,c2,physical,separable,steer_b_to_a,steer_a_to_b,w_hom,w_het\n\
                      1,1,0,0,1,1,0,0,0,0\n\
                      1,1,0.1,-0.1,0,0,0,0,,\n";
        assert_eq!(text, expect);
    }

    #[test]
    fn json_output_uses_null_for_missing_works() {
        let rows = sweep_symmetric(1.0, 1.0, 1, 0.0, 0.1, 2).unwrap();
        let mut buf = Vec::new();
        write_json(&rows, &mut buf).unwrap();
        assert_eq!(buf.last(), Some(&b'\n'));
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr[0]["physical"], serde_json::json!(true));
        assert_eq!(arr[0]["w_hom"], serde_json::json!(0.0));
        assert!(arr[1]["w_hom"].is_null());
        assert_eq!(arr[1]["a"], serde_json::json!(1.0));
    }

    #[test]
    fn verify_rows_counts_physical_rows_and_detects_tampering() {
        let mut rows = sweep_symmetric(2.0, 4.0, 3, 0.0, 2.0, 5).unwrap();
        let physical = rows.iter().filter(|r| r.physical).count();
        assert_eq!(verify_rows(&rows, 1).unwrap(), physical);
        // stride skips rows deterministically from index 0.
        let expect: usize = rows.iter().step_by(4).filter(|r| r.physical).count();
        assert_eq!(verify_rows(&rows, 4).unwrap(), expect);
        let idx = rows.iter().position(|r| r.physical).unwrap();
        rows[idx].w_het = rows[idx].w_het.map(|w| w + 1e-6);
        assert_eq!(
            verify_rows(&rows, 1).unwrap_err(),
            SweepError::VerifyMismatch { row: idx }
        );
    }

    #[test]
    fn boundary_maximum_sits_on_the_curve() {
        let m = boundary_work_max(
            BoundaryKind::Separability,
            ProtocolKind::Heterodyne,
            5.0,
            5.0,
        )
        .unwrap();
        let on_curve = boundary_c2_separable(5.0, 5.0, m.c1).unwrap();
        assert!((m.c2 - on_curve).abs() < 1e-9);
        // At a = b the maximum sits exactly on the anti-diagonal.
        assert!((m.c1 + m.c2).abs() < 1e-4, "expected c1 = -c2, got {m:?}");
        let w = work_het(&StandardFormParams::new(5.0, 5.0, m.c1, m.c2)).unwrap();
        assert!((w - m.work).abs() < 1e-12);
        // The maximum beats both the axis endpoint and the curve midpoint.
        let axis_c2 = boundary_c2_separable(5.0, 5.0, 0.0).unwrap();
        let w_axis = work_het(&StandardFormParams::new(5.0, 5.0, 0.0, axis_c2)).unwrap();
        assert!(m.work >= w_axis - 1e-12);
    }

    #[test]
    fn empty_boundary_is_reported() {
        // At (a, b) = (5, 2) the nonsteerability curve lies outside the
        // physical region, so it has no physical points to maximize over.
        assert_eq!(
            boundary_work_max(
                BoundaryKind::NonsteerabilityBtoA,
                ProtocolKind::Heterodyne,
                5.0,
                2.0,
            )
            .unwrap_err(),
            SweepError::EmptyBoundary
        );
    }

    #[test]
    fn steerable_existence_tracks_b() {
        assert!(steerable_states_exist(5.0, 5.0));
        assert!(steerable_states_exist(5.0, 3.2));
        assert!(!steerable_states_exist(5.0, 2.9));
        assert!(!steerable_states_exist(5.0, 2.0));
    }

    #[test]
    fn steering_threshold_is_found_by_bisection() {
        let b = find_steer_vanish_b(5.0, 2.0, 4.0).unwrap();
        assert!((b - 3.0).abs() < 1e-3, "threshold {b}");
        assert_eq!(
            find_steer_vanish_b(5.0, 3.5, 4.0).unwrap_err(),
            SweepError::NoTransition
        );
        assert_eq!(
            find_steer_vanish_b(5.0, 4.0, 3.5).unwrap_err(),
            SweepError::BadRange
        );
    }

    #[test]
    fn transition_scan_requires_a_flip() {
        assert_eq!(
            find_transition_b(
                BoundaryKind::Separability,
                ProtocolKind::Heterodyne,
                5.0,
                4.0,
                5.0,
            )
            .unwrap_err(),
            SweepError::NoTransition
        );
    }
}
