//! Work extraction from mode A conditioned on a Gaussian measurement of
//! mode B: measure, displace the conditional mean away, then squeeze the
//! conditional covariance to balance its variances.
//!
//! Each protocol's extracted work is outcome-independent, because the
//! conditional covariance does not depend on the measurement outcome and the
//! displacement removes the mean exactly. The closed forms (with Γ in
//! standard form, measuring B):
//!   x-homodyne: W = a/2 · (1 − sqrt(1 − c1²/(ab)))
//!   p-homodyne: W = a/2 · (1 − sqrt(1 − c2²/(ab)))
//!   heterodyne: W = a/2 − 1/2 · sqrt((a − c1²/(b+1)) (a − c2²/(b+1)))
//! and the homodyne average is the mean of the first two.

use crate::gaussian::{
    conditional_update, is_physical, local_energy, standard_form_state, GaussianError,
    MeasurementSpec, Mode, SingleModeState, StandardFormParams, SYM_TOL,
};
use nalgebra::{Matrix2, Vector2};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("state is not physical")]
    NotPhysical,
    #[error("conditioning is degenerate at these parameters")]
    DegenerateConditioning,
    #[error("squeezing requires a diagonal covariance matrix")]
    NonDiagonalInput,
    #[error("squeezing requires positive variances")]
    NonPositiveVariance,
    #[error("protocol has no single-shot trajectory")]
    NotSingleShot,
}

/// Measurement choice on mode B. `HomodyneAverage` is the even mixture of the
/// two homodyne protocols; it has a well-defined average work but no
/// single-shot trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProtocolKind {
    HomodyneX,
    HomodyneP,
    HomodyneAverage,
    Heterodyne,
}

/// Which quadrature carries the `s` factor in the squeezing S:
/// X means S = diag(s, 1/s), P means S = diag(1/s, s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeAxis {
    X,
    P,
}

/// One protocol run at a fixed measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub outcome: Vector2<f64>,
    pub post_measurement: SingleModeState,
    pub post_displacement: SingleModeState,
    pub squeeze_s: f64,
    pub final_state: SingleModeState,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub work: f64,
}

/// Average work of every protocol at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkReport {
    pub w_x: f64,
    pub w_p: f64,
    pub w_hom: f64,
    pub w_het: f64,
}

/// Variance-balancing squeeze of a diagonal 2x2 covariance matrix.
///
/// Returns (s, S Γ Sᵀ) where s minimizes the trace of S Γ Sᵀ over s > 0 for
/// the given axis convention; the minimum balances both variances at
/// sqrt(γ1 γ2).
pub fn optimal_squeeze(
    cov: &Matrix2<f64>,
    axis: SqueezeAxis,
) -> Result<(f64, Matrix2<f64>), ProtocolError> {
    if cov[(0, 1)].abs() > SYM_TOL || cov[(1, 0)].abs() > SYM_TOL {
        return Err(ProtocolError::NonDiagonalInput);
    }
    let g1 = cov[(0, 0)];
    let g2 = cov[(1, 1)];
    if g1 <= 0.0 || g2 <= 0.0 {
        return Err(ProtocolError::NonPositiveVariance);
    }
    let s2 = match axis {
        SqueezeAxis::X => (g2 / g1).sqrt(),
        SqueezeAxis::P => (g1 / g2).sqrt(),
    };
    let (v1, v2) = match axis {
        SqueezeAxis::X => (s2 * g1, g2 / s2),
        SqueezeAxis::P => (g1 / s2, s2 * g2),
    };
    Ok((s2.sqrt(), Matrix2::new(v1, 0.0, 0.0, v2)))
}

fn measurement_for(kind: ProtocolKind) -> Result<MeasurementSpec, ProtocolError> {
    match kind {
        ProtocolKind::HomodyneX => Ok(MeasurementSpec::homodyne_x(Mode::B)),
        ProtocolKind::HomodyneP => Ok(MeasurementSpec::homodyne_p(Mode::B)),
        ProtocolKind::Heterodyne => Ok(MeasurementSpec::heterodyne(Mode::B)),
        ProtocolKind::HomodyneAverage => Err(ProtocolError::NotSingleShot),
    }
}

fn squeeze_axis_for(kind: ProtocolKind) -> SqueezeAxis {
    match kind {
        // The x-homodyne leaves the x variance reduced, so s acts on x;
        // the other protocols use the mirrored convention.
        ProtocolKind::HomodyneX => SqueezeAxis::X,
        _ => SqueezeAxis::P,
    }
}

/// Trajectory of a single-shot protocol without re-validating physicality;
/// callers must have checked it (hot loop of the Monte Carlo oracle).
pub(crate) fn trajectory_unchecked(
    params: &StandardFormParams,
    kind: ProtocolKind,
    outcome: Vector2<f64>,
) -> Result<Trajectory, ProtocolError> {
    let meas = measurement_for(kind)?;
    let state = standard_form_state(params);
    let initial_energy = local_energy(&state.reduced(Mode::A));
    let post_measurement = conditional_update(&state, &meas, outcome).map_err(|e| match e {
        GaussianError::SingularConditioning => ProtocolError::DegenerateConditioning,
        _ => ProtocolError::NotPhysical,
    })?;
    if post_measurement.cov[(0, 0)] <= 0.0 || post_measurement.cov[(1, 1)] <= 0.0 {
        return Err(ProtocolError::DegenerateConditioning);
    }
    // The displacement returns the conditional mean to the origin exactly.
    let post_displacement = SingleModeState {
        mean: Vector2::zeros(),
        cov: post_measurement.cov,
    };
    let (squeeze_s, final_cov) = optimal_squeeze(&post_displacement.cov, squeeze_axis_for(kind))?;
    let final_state = SingleModeState {
        mean: Vector2::zeros(),
        cov: final_cov,
    };
    let final_energy = local_energy(&final_state);
    Ok(Trajectory {
        outcome,
        post_measurement,
        post_displacement,
        squeeze_s,
        final_state,
        initial_energy,
        final_energy,
        work: initial_energy - final_energy,
    })
}

/// Runs a single-shot protocol (x-homodyne, p-homodyne, or heterodyne) on a
/// physical parameter point at the given measurement outcome.
pub fn run_protocol(
    params: &StandardFormParams,
    kind: ProtocolKind,
    outcome: Vector2<f64>,
) -> Result<Trajectory, ProtocolError> {
    if !is_physical(standard_form_state(params).cov()) {
        return Err(ProtocolError::NotPhysical);
    }
    trajectory_unchecked(params, kind, outcome)
}

fn checked_sqrt_term(num: f64, den: f64) -> f64 {
    // Physicality bounds the ratio by 1; clamp float dust at the boundary.
    (1.0 - num / den).max(0.0).sqrt()
}

/// Outcome-averaged work of a protocol, in closed form.
pub fn work(params: &StandardFormParams, kind: ProtocolKind) -> Result<f64, ProtocolError> {
    if !is_physical(standard_form_state(params).cov()) {
        return Err(ProtocolError::NotPhysical);
    }
    let &StandardFormParams { a, b, c1, c2 } = params;
    Ok(match kind {
        ProtocolKind::HomodyneX => a / 2.0 * (1.0 - checked_sqrt_term(c1 * c1, a * b)),
        ProtocolKind::HomodyneP => a / 2.0 * (1.0 - checked_sqrt_term(c2 * c2, a * b)),
        ProtocolKind::HomodyneAverage => {
            a / 2.0
                - a / 4.0 * (checked_sqrt_term(c1 * c1, a * b) + checked_sqrt_term(c2 * c2, a * b))
        }
        ProtocolKind::Heterodyne => {
            a / 2.0
                - a / 2.0
                    * checked_sqrt_term(c1 * c1, a * (b + 1.0))
                    * checked_sqrt_term(c2 * c2, a * (b + 1.0))
        }
    })
}

/// Average work of the even homodyne mixture.
pub fn work_hom(params: &StandardFormParams) -> Result<f64, ProtocolError> {
    work(params, ProtocolKind::HomodyneAverage)
}

/// Average work of the heterodyne protocol.
pub fn work_het(params: &StandardFormParams) -> Result<f64, ProtocolError> {
    work(params, ProtocolKind::Heterodyne)
}

/// All four protocol works at once.
pub fn work_report(params: &StandardFormParams) -> Result<WorkReport, ProtocolError> {
    Ok(WorkReport {
        w_x: work(params, ProtocolKind::HomodyneX)?,
        w_p: work(params, ProtocolKind::HomodyneP)?,
        w_hom: work(params, ProtocolKind::HomodyneAverage)?,
        w_het: work(params, ProtocolKind::Heterodyne)?,
    })
}
