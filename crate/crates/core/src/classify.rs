//! Separability and steering classification of two-mode Gaussian states,
//! plus the boundary curves of each class in the (c1 ≤ 0, c2 ≥ 0) quadrant.
//!
//! All three criteria are positivity tests on Γ + iW for a suitable form W:
//! W = Ω for physicality, W = Ω after partial transposition for separability,
//! and W = diag(Ω_A, 0) (or diag(0, Ω_B)) for nonsteerability of the
//! corresponding direction. Each also has a scalar equivalent used as a
//! cross-check in tests: the partial-transpose symplectic eigenvalue ν̃₋ ≥ 1
//! for separability, and det(Γ_A − C Γ_B⁻¹ Cᵀ) ≥ 1 for B→A nonsteerability.

use crate::gaussian::{
    hermitian_part, is_physical, min_hermitian_eigenvalue, standard_form_state, StandardFormParams,
    SymplecticForm, PSD_TOL,
};
use crate::search::{bisect_flip, golden_max};
use nalgebra::Matrix4;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("state is not physical")]
    NotPhysical,
    #[error("parameters are outside the domain of this boundary")]
    DomainError,
}

/// Classification flags of one parameter point. The flags are nested:
/// a nonphysical point has all flags false, a separable state is never
/// steerable, and steering is reported per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    pub physical: bool,
    pub separable: bool,
    pub steerable_b_to_a: bool,
    pub steerable_a_to_b: bool,
}

/// Boundary curves available in the quadrant, each expressed as the largest
/// admissible c2 at fixed (a, b, c1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    Physicality,
    Separability,
    NonsteerabilityBtoA,
}

fn min_eig_with_form(cov: &Matrix4<f64>, form: &Matrix4<f64>) -> Result<f64, ClassifyError> {
    min_hermitian_eigenvalue(&hermitian_part(cov, form)).map_err(|_| ClassifyError::NotPhysical)
}

/// Positive partial transpose test: separable iff Γ̃ + iΩ ≥ 0.
pub fn is_separable(cov: &Matrix4<f64>) -> Result<bool, ClassifyError> {
    if !is_physical(cov) {
        return Err(ClassifyError::NotPhysical);
    }
    let pt = crate::gaussian::partial_transpose(cov);
    Ok(min_eig_with_form(&pt, &SymplecticForm::two_mode())? >= -PSD_TOL)
}

/// B→A steering test: steerable iff Γ + i diag(Ω_A, 0) is not PSD.
pub fn is_steerable_b_to_a(cov: &Matrix4<f64>) -> Result<bool, ClassifyError> {
    if !is_physical(cov) {
        return Err(ClassifyError::NotPhysical);
    }
    Ok(min_eig_with_form(cov, &SymplecticForm::mode_a_only())? < -PSD_TOL)
}

/// A→B steering test: steerable iff Γ + i diag(0, Ω_B) is not PSD.
pub fn is_steerable_a_to_b(cov: &Matrix4<f64>) -> Result<bool, ClassifyError> {
    if !is_physical(cov) {
        return Err(ClassifyError::NotPhysical);
    }
    Ok(min_eig_with_form(cov, &SymplecticForm::mode_b_only())? < -PSD_TOL)
}

/// Full classification of a parameter point. Flags are evaluated in order
/// physical → separable → steerable, so the nesting invariants hold even for
/// states sitting on a boundary.
pub fn classify(params: &StandardFormParams) -> ClassRecord {
    let st = standard_form_state(params);
    if !is_physical(st.cov()) {
        return ClassRecord {
            physical: false,
            separable: false,
            steerable_b_to_a: false,
            steerable_a_to_b: false,
        };
    }
    let separable = is_separable(st.cov()).expect("physicality was just checked");
    let (sba, sab) = if separable {
        (false, false)
    } else {
        (
            is_steerable_b_to_a(st.cov()).expect("physicality was just checked"),
            is_steerable_a_to_b(st.cov()).expect("physicality was just checked"),
        )
    };
    ClassRecord {
        physical: true,
        separable,
        steerable_b_to_a: sba,
        steerable_a_to_b: sab,
    }
}

fn check_quadrant_c1(a: f64, b: f64, c1: f64) -> Result<f64, ClassifyError> {
    if !a.is_finite() || !b.is_finite() || c1.is_nan() || c1 > 0.0 || a <= 0.0 || b <= 0.0 {
        return Err(ClassifyError::DomainError);
    }
    let d = a * b - c1 * c1;
    if d <= 0.0 {
        return Err(ClassifyError::DomainError);
    }
    Ok(d)
}

/// Largest c2 for which (a, b, c1, c2) is separable, at fixed c1 ≤ 0:
/// c2 = c1/(ab − c1²) + sqrt(ab + ab/(c1² − ab)² + (a² + b²)/(c1² − ab)).
///
/// The value can be negative (no separable states with c2 ≥ 0 at this c1);
/// a negative radicand means no separable states at any c2 and is a domain
/// error.
pub fn boundary_c2_separable(a: f64, b: f64, c1: f64) -> Result<f64, ClassifyError> {
    let d = check_quadrant_c1(a, b, c1)?;
    let radicand = a * b + a * b / (d * d) - (a * a + b * b) / d;
    if radicand < 0.0 {
        return Err(ClassifyError::DomainError);
    }
    Ok(c1 / d + radicand.sqrt())
}

/// Largest c2 for which (a, b, c1, c2) is B→A nonsteerable, at fixed c1 ≤ 0:
/// c2 = sqrt(b (a + b/(c1² − ab))).
///
/// A nonpositive radicand means every c2 ≥ 0 is steerable wherever physical
/// states exist at this c1, so no boundary exists and the call is a domain
/// error. The returned value may exceed the physicality bound; compare with
/// [`boundary_c2_physical`] to decide whether steerable states exist.
pub fn boundary_c2_nonsteer(a: f64, b: f64, c1: f64) -> Result<f64, ClassifyError> {
    let d = check_quadrant_c1(a, b, c1)?;
    let radicand = b * (a - b / d);
    if radicand <= 0.0 {
        return Err(ClassifyError::DomainError);
    }
    Ok(radicand.sqrt())
}

/// Largest c2 ≥ 0 for which (a, b, c1, c2) is physical, found by bisection
/// on the uncertainty-relation test.
///
/// The minimum eigenvalue of Γ(c2) + iΩ is concave in c2 (the matrix is
/// affine in c2), so a golden-section maximization locates the physical
/// window and bisection then pins its upper edge to 1e-9. Errors if no
/// c2 ≥ 0 is physical at this c1.
pub fn boundary_c2_physical(a: f64, b: f64, c1: f64) -> Result<f64, ClassifyError> {
    check_quadrant_c1(a, b, c1.min(0.0)).map(|_| ())?; // validates a, b
    if c1 * c1 >= a * b {
        return Err(ClassifyError::DomainError);
    }
    let min_eig = |c2: f64| {
        let st = standard_form_state(&StandardFormParams::new(a, b, c1, c2));
        min_eig_with_form(st.cov(), &SymplecticForm::two_mode())
            .expect("standard-form matrices are Hermitian by construction")
    };
    let cap = (a * b).sqrt() + 1.0;
    let (peak_c2, peak) = golden_max(0.0, cap, 1e-11, min_eig);
    if peak < -PSD_TOL {
        return Err(ClassifyError::DomainError);
    }
    // The eigenvalue decreases past the peak and the cap is unphysical, so
    // the physicality predicate flips exactly once on [peak, cap].
    Ok(bisect_flip(peak_c2, cap, 1e-9, |c2| {
        min_eig(c2) >= -PSD_TOL
    }))
}

/// Dispatch a boundary curve by kind.
pub fn boundary_c2(kind: BoundaryKind, a: f64, b: f64, c1: f64) -> Result<f64, ClassifyError> {
    match kind {
        BoundaryKind::Physicality => boundary_c2_physical(a, b, c1),
        BoundaryKind::Separability => boundary_c2_separable(a, b, c1),
        BoundaryKind::NonsteerabilityBtoA => boundary_c2_nonsteer(a, b, c1),
    }
}
