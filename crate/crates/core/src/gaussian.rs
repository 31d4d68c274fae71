//! Covariance-matrix algebra for one- and two-mode Gaussian states.
//!
//! Conventions used throughout the crate: quadratures are x = (a + a†)/√2 and
//! p = (a − a†)/(i√2) with [x, p] = i, ordered R = (x_A, p_A, x_B, p_B). The
//! covariance matrix is Γ_ij = ⟨ΔR_i ΔR_j + ΔR_j ΔR_i⟩, so the vacuum has
//! Γ = I and measured quadrature statistics have second moments Γ/2. A single
//! mode carries energy ⟨a†a⟩ + 1/2 = (|r̄|² + Tr Γ/2)/2.

use nalgebra::{Complex, Matrix2, Matrix4, Vector2, Vector4};
use thiserror::Error;

/// A covariance matrix passes a positivity criterion when the minimum
/// eigenvalue of the associated Hermitian matrix is at least `-PSD_TOL`.
/// Boundary states are deliberately classified into the weaker class.
pub const PSD_TOL: f64 = 1e-9;

/// Maximum allowed asymmetry (or non-Hermiticity) in matrix inputs.
pub const SYM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GaussianError {
    #[error("matrix is not Hermitian within tolerance")]
    NonHermitianInput,
    #[error("covariance matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("conditioning matrix is singular")]
    SingularConditioning,
    #[error("measurement squeezing parameter must be in [0, inf]")]
    InvalidMeasurement,
}

/// Which mode of a two-mode state an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Standard-form parameters (a, b, c1, c2) of a two-mode covariance matrix
/// Γ = [[a, 0, c1, 0], [0, a, 0, c2], [c1, 0, b, 0], [0, c2, 0, b]]
/// (written here in 2x2 blocks; see [`standard_form_state`]).
///
/// Any two-mode Gaussian state can be brought to this form by local
/// symplectic operations, which change neither entanglement, steering, nor
/// locally extractable work. Nonphysical parameter sets are representable on
/// purpose: phase-diagram sweeps evaluate grid points beyond the physical
/// boundary and must be able to label them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardFormParams {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StandardFormParams {
    pub fn new(a: f64, b: f64, c1: f64, c2: f64) -> Self {
        Self { a, b, c1, c2 }
    }

    /// The symmetric slice a = b, c1 = c, c2 = -c.
    pub fn symmetric(a: f64, c: f64) -> Self {
        // 0.0 - c rather than -c so that c = 0 prints as plain zero.
        Self::new(a, a, c, 0.0 - c)
    }
}

/// A two-mode Gaussian state: mean vector and 4x4 covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl TwoModeState {
    /// Builds a state, rejecting covariance matrices that are not symmetric
    /// within [`SYM_TOL`]. Physicality is not enforced here; criteria that
    /// need it check explicitly.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self, GaussianError> {
        if !is_symmetric4(&cov) {
            return Err(GaussianError::NotSymmetric);
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> Vector4<f64> {
        self.mean
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    pub fn mean_of(&self, mode: Mode) -> Vector2<f64> {
        match mode {
            Mode::A => self.mean.fixed_rows::<2>(0).into_owned(),
            Mode::B => self.mean.fixed_rows::<2>(2).into_owned(),
        }
    }

    /// Diagonal covariance block of one mode.
    pub fn cov_of(&self, mode: Mode) -> Matrix2<f64> {
        match mode {
            Mode::A => self.cov.fixed_view::<2, 2>(0, 0).into_owned(),
            Mode::B => self.cov.fixed_view::<2, 2>(2, 2).into_owned(),
        }
    }

    /// Off-diagonal correlation block C (rows: mode A, columns: mode B).
    pub fn corr_block(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Marginal state of one mode (partial trace over the other).
    pub fn reduced(&self, mode: Mode) -> SingleModeState {
        SingleModeState {
            mean: self.mean_of(mode),
            cov: self.cov_of(mode),
        }
    }
}

/// A single-mode Gaussian state: mean vector and 2x2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeState {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl SingleModeState {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self, GaussianError> {
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > SYM_TOL {
            return Err(GaussianError::NotSymmetric);
        }
        Ok(Self { mean, cov })
    }

    /// Single-mode uncertainty relation: det Γ ≥ 1 (with trace > 0).
    pub fn is_physical(&self) -> bool {
        self.cov.determinant() >= 1.0 - PSD_TOL && self.cov.trace() > 0.0
    }
}

/// A Gaussian measurement of one mode, parameterized by the squeezing of the
/// measured Gaussian: Γ_m = diag(λ, 1/λ). λ = 0 is x-homodyne, λ = ∞ is
/// p-homodyne, λ = 1 is heterodyne.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    mode: Mode,
    lambda: f64,
}

impl MeasurementSpec {
    pub fn general(mode: Mode, lambda: f64) -> Result<Self, GaussianError> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(GaussianError::InvalidMeasurement);
        }
        Ok(Self { mode, lambda })
    }

    pub fn homodyne_x(mode: Mode) -> Self {
        Self { mode, lambda: 0.0 }
    }

    pub fn homodyne_p(mode: Mode) -> Self {
        Self {
            mode,
            lambda: f64::INFINITY,
        }
    }

    pub fn heterodyne(mode: Mode) -> Self {
        Self { mode, lambda: 1.0 }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// The symplectic form Ω = ⊕_modes [[0, 1], [-1, 0]] fixing [x, p] = i.
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn single_mode() -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, -1.0, 0.0)
    }

    pub fn two_mode() -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&Self::single_mode());
        m.fixed_view_mut::<2, 2>(2, 2)
            .copy_from(&Self::single_mode());
        m
    }

    /// diag(Ω_A, 0): the form entering the B→A steering criterion.
    pub fn mode_a_only() -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&Self::single_mode());
        m
    }

    /// diag(0, Ω_B): the form entering the A→B steering criterion.
    pub fn mode_b_only() -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(2, 2)
            .copy_from(&Self::single_mode());
        m
    }
}

fn is_symmetric4(m: &Matrix4<f64>) -> bool {
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (m[(i, j)] - m[(j, i)]).abs() > SYM_TOL {
                return false;
            }
        }
    }
    true
}

/// Zero-mean state with the standard-form covariance built from `params`.
pub fn standard_form_state(params: &StandardFormParams) -> TwoModeState {
    let &StandardFormParams { a, b, c1, c2 } = params;
    #[rustfmt::skip]
    let cov = Matrix4::new(
        a,   0.0, c1,  0.0,
        0.0, a,   0.0, c2,
        c1,  0.0, b,   0.0,
        0.0, c2,  0.0, b,
    );
    TwoModeState {
        mean: Vector4::zeros(),
        cov,
    }
}

/// Γ + iW for a real symmetric Γ and real antisymmetric W; the Hermitian
/// matrices whose positivity encodes physicality and steering criteria.
pub fn hermitian_part(cov: &Matrix4<f64>, form: &Matrix4<f64>) -> Matrix4<Complex<f64>> {
    Matrix4::from_fn(|i, j| Complex::new(cov[(i, j)], form[(i, j)]))
}

/// Minimum eigenvalue of a Hermitian 4x4 matrix.
///
/// Rejects inputs that deviate from Hermiticity by more than [`SYM_TOL`];
/// eigenvalues of a Hermitian matrix are real, so the minimum is well-defined.
pub fn min_hermitian_eigenvalue(m: &Matrix4<Complex<f64>>) -> Result<f64, GaussianError> {
    for i in 0..4 {
        for j in i..4 {
            let d = m[(i, j)] - m[(j, i)].conj();
            if d.norm() > SYM_TOL {
                return Err(GaussianError::NonHermitianInput);
            }
        }
    }
    let eig = m.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Symplectic eigenvalues (ν₋, ν₊) of a positive-definite two-mode covariance
/// matrix, from the symplectic invariants:
/// ν±² = (Δ ± sqrt(Δ² − 4 det Γ))/2 with Δ = det Γ_A + det Γ_B + 2 det C.
pub fn symplectic_eigenvalues(cov: &Matrix4<f64>) -> Result<(f64, f64), GaussianError> {
    if !is_symmetric4(cov) {
        return Err(GaussianError::NotSymmetric);
    }
    if nalgebra::Cholesky::new(*cov).is_none() {
        return Err(GaussianError::NotPositiveDefinite);
    }
    let det_a = cov.fixed_view::<2, 2>(0, 0).determinant();
    let det_b = cov.fixed_view::<2, 2>(2, 2).determinant();
    let det_c = cov.fixed_view::<2, 2>(0, 2).determinant();
    let det_g = cov.determinant();
    let delta = det_a + det_b + 2.0 * det_c;
    // Clamp float dust: both radicands are nonnegative for a PD matrix.
    let disc = (delta * delta - 4.0 * det_g).max(0.0);
    let lo = ((delta - disc.sqrt()) / 2.0).max(0.0);
    let hi = ((delta + disc.sqrt()) / 2.0).max(0.0);
    Ok((lo.sqrt(), hi.sqrt()))
}

/// Partial transposition on mode B: Γ̃ = Λ Γ Λ with Λ = diag(1, 1, 1, -1).
pub fn partial_transpose(cov: &Matrix4<f64>) -> Matrix4<f64> {
    let mut out = *cov;
    for k in 0..4 {
        if k != 3 {
            out[(3, k)] = -out[(3, k)];
            out[(k, 3)] = -out[(k, 3)];
        }
    }
    out
}

/// Uncertainty-relation test: Γ + iΩ ≥ 0 within [`PSD_TOL`].
///
/// Non-symmetric input never describes a state and reports false.
pub fn is_physical(cov: &Matrix4<f64>) -> bool {
    match min_hermitian_eigenvalue(&hermitian_part(cov, &SymplecticForm::two_mode())) {
        Ok(e) => e >= -PSD_TOL,
        Err(_) => false,
    }
}

/// Conditional state of the unmeasured mode after a Gaussian measurement of
/// the other mode with outcome `outcome`.
///
/// For finite λ the update is
///   mean → r̄ + C (Γ_m + Γ_meas)⁻¹ (r_m − r̄_meas),
///   cov  → Γ − C (Γ_m + Γ_meas)⁻¹ Cᵀ;
/// the homodyne limits λ → 0, ∞ are taken analytically by projecting onto the
/// measured quadrature and pseudo-inverting the 1x1 block, rather than by
/// substituting a large λ. The conditional covariance is outcome-independent.
pub fn conditional_update(
    state: &TwoModeState,
    meas: &MeasurementSpec,
    outcome: Vector2<f64>,
) -> Result<SingleModeState, GaussianError> {
    let kept = match meas.mode {
        Mode::A => Mode::B,
        Mode::B => Mode::A,
    };
    let gamma_kept = state.cov_of(kept);
    let gamma_meas = state.cov_of(meas.mode);
    // Correlation block with rows on the kept mode, columns on the measured one.
    let c = match meas.mode {
        Mode::B => state.corr_block(),
        Mode::A => state.corr_block().transpose(),
    };

    let kernel: Matrix2<f64> = if meas.lambda == 0.0 || meas.lambda.is_infinite() {
        // Project onto the measured quadrature (x for λ=0, p for λ=∞) and
        // pseudo-invert the surviving 1x1 block; the conjugate quadrature
        // carries infinite noise and drops out exactly.
        let q = if meas.lambda == 0.0 { 0 } else { 1 };
        let v = gamma_meas[(q, q)];
        if v.abs() < 1e-300 {
            return Err(GaussianError::SingularConditioning);
        }
        let mut p = Matrix2::zeros();
        p[(q, q)] = 1.0 / v;
        p
    } else {
        let m = gamma_meas + Matrix2::new(meas.lambda, 0.0, 0.0, 1.0 / meas.lambda);
        m.try_inverse().ok_or(GaussianError::SingularConditioning)?
    };

    let gain = c * kernel;
    let mean = state.mean_of(kept) + gain * (outcome - state.mean_of(meas.mode));
    let cov = gamma_kept - gain * c.transpose();
    // Symmetrize away float dust so downstream symmetry checks stay exact.
    let cov = (cov + cov.transpose()) / 2.0;
    Ok(SingleModeState { mean, cov })
}

/// Mean photon number plus 1/2 of a single-mode state:
/// ⟨a†a⟩ + 1/2 = (|r̄|² + Tr Γ/2)/2.
pub fn local_energy(state: &SingleModeState) -> f64 {
    0.5 * (state.mean.norm_squared() + 0.5 * state.cov.trace())
}
