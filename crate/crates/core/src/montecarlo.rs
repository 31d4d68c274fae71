//! Monte Carlo oracle for the conditional-state formulas and the protocol
//! work values.
//!
//! Quadrature samples are drawn from N(mean, Γ/2), the Wigner distribution of
//! a Gaussian state; Gaussian-measurement outcomes add independent noise with
//! covariance Γ_m/2 (zero for the measured homodyne quadrature). Ordinary
//! least squares of one mode's quadratures on the other's outcomes then
//! estimates the conditional-mean gain C (Γ_B + Γ_m)⁻¹ and, through the
//! residuals, the conditional covariance Γ'_A/2.
//!
//! Sampling is deterministic in the seed: quadrature points use stream 0 of a
//! ChaCha generator seeded with `seed`, outcome noise uses stream 1.

use crate::gaussian::{
    is_physical, standard_form_state, MeasurementSpec, Mode, StandardFormParams, TwoModeState,
};
use crate::protocols::{trajectory_unchecked, ProtocolError, ProtocolKind};
use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum McError {
    #[error("state is not physical")]
    NotPhysical,
    #[error("not enough samples for estimation")]
    InsufficientSamples,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Phase-space samples of a two-mode state, with pre-drawn unit-normal pairs
/// for simulating noisy (finite-λ) measurement outcomes.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    n: usize,
    seed: u64,
    points: Vec<Vector4<f64>>,
    noise: Vec<Vector2<f64>>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[Vector4<f64>] {
        &self.points
    }

    /// Unit-normal pairs; scale by sqrt(Γ_m/2) to model outcome noise.
    pub fn noise(&self) -> &[Vector2<f64>] {
        &self.noise
    }
}

/// Draws `n` phase-space samples of a physical state from N(mean, Γ/2).
pub fn sample_state(state: &TwoModeState, n: usize, seed: u64) -> Result<SampleBatch, McError> {
    if n == 0 {
        return Err(McError::InsufficientSamples);
    }
    if !is_physical(state.cov()) {
        return Err(McError::NotPhysical);
    }
    let chol = nalgebra::Cholesky::new(state.cov() / 2.0).ok_or(McError::NotPhysical)?;
    let l: Matrix4<f64> = chol.l();
    let mean = state.mean();

    let mut point_rng = ChaCha8Rng::seed_from_u64(seed);
    point_rng.set_stream(0);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);

    let mut points = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    for _ in 0..n {
        let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut point_rng));
        points.push(mean + l * z);
        noise.push(Vector2::from_fn(|_, _| {
            StandardNormal.sample(&mut noise_rng)
        }));
    }
    Ok(SampleBatch {
        n,
        seed,
        points,
        noise,
    })
}

/// Regression estimates of the conditional-state formulas.
///
/// `slope` maps outcome components (columns: x, p) to conditional-mean shifts
/// of the kept mode (rows: x, p); homodyne measurements populate only the
/// measured column. `conditional_cov` estimates Γ'/2 of the kept mode from
/// the regression residuals. The `*_stderr` fields hold matching standard
/// errors (zero in unused homodyne columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub slope: Matrix2<f64>,
    pub slope_stderr: Matrix2<f64>,
    pub conditional_cov: Matrix2<f64>,
    pub conditional_cov_stderr: Matrix2<f64>,
}

/// Ordinary least squares of the kept mode's quadratures on the measured
/// mode's outcome components, with intercept; residual covariance uses the
/// (n − 2) normalization.
pub fn estimate_conditional(
    batch: &SampleBatch,
    meas: &MeasurementSpec,
) -> Result<MomentEstimate, McError> {
    let n = batch.n;
    if n < 100 {
        return Err(McError::InsufficientSamples);
    }
    let (kept_off, meas_off) = match meas.mode() {
        Mode::B => (0, 2),
        Mode::A => (2, 0),
    };
    let lambda = meas.lambda();

    // Regressor columns and the slope columns they populate.
    let (n_reg, reg_cols): (usize, [usize; 2]) = if lambda == 0.0 {
        (1, [0, 0])
    } else if lambda.is_infinite() {
        (1, [1, 1])
    } else {
        (2, [0, 1])
    };
    let noise_scale = if lambda > 0.0 && lambda.is_finite() {
        [(lambda / 2.0).sqrt(), (0.5 / lambda).sqrt()]
    } else {
        [0.0, 0.0]
    };
    let outcome_of = |i: usize| -> [f64; 2] {
        let p = &batch.points[i];
        let z = &batch.noise[i];
        let mut y = [0.0; 2];
        for k in 0..n_reg {
            let q = reg_cols[k];
            y[k] = p[meas_off + q] + noise_scale[q] * z[q];
        }
        y
    };
    let response_of =
        |i: usize| -> [f64; 2] { [batch.points[i][kept_off], batch.points[i][kept_off + 1]] };

    // Pass 1: means.
    let mut ybar = [0.0; 2];
    let mut rbar = [0.0; 2];
    for i in 0..n {
        let y = outcome_of(i);
        let r = response_of(i);
        for k in 0..n_reg {
            ybar[k] += y[k];
        }
        for j in 0..2 {
            rbar[j] += r[j];
        }
    }
    for v in ybar.iter_mut().chain(rbar.iter_mut()) {
        *v /= n as f64;
    }

    // Pass 2: centered second moments.
    let mut syy = [[0.0; 2]; 2];
    let mut sry = [[0.0; 2]; 2];
    for i in 0..n {
        let y = outcome_of(i);
        let r = response_of(i);
        for k in 0..n_reg {
            let dk = y[k] - ybar[k];
            for l in 0..n_reg {
                syy[k][l] += dk * (y[l] - ybar[l]);
            }
            for j in 0..2 {
                sry[j][k] += (r[j] - rbar[j]) * dk;
            }
        }
    }

    // Invert the regressor Gram matrix (1x1 or 2x2).
    let mut inv_syy = [[0.0; 2]; 2];
    if n_reg == 1 {
        if syy[0][0] <= 0.0 {
            return Err(McError::InsufficientSamples);
        }
        inv_syy[0][0] = 1.0 / syy[0][0];
    } else {
        let det = syy[0][0] * syy[1][1] - syy[0][1] * syy[1][0];
        if det <= 0.0 {
            return Err(McError::InsufficientSamples);
        }
        inv_syy[0][0] = syy[1][1] / det;
        inv_syy[1][1] = syy[0][0] / det;
        inv_syy[0][1] = -syy[0][1] / det;
        inv_syy[1][0] = -syy[1][0] / det;
    }

    // Slope B = S_ry S_yy⁻¹ in regressor coordinates.
    let mut beta = [[0.0; 2]; 2];
    for j in 0..2 {
        for k in 0..n_reg {
            for l in 0..n_reg {
                beta[j][k] += sry[j][l] * inv_syy[l][k];
            }
        }
    }

    // Pass 3: residual covariance.
    let mut se = [[0.0; 2]; 2];
    for i in 0..n {
        let y = outcome_of(i);
        let r = response_of(i);
        let mut e = [0.0; 2];
        for j in 0..2 {
            e[j] = r[j] - rbar[j];
            for k in 0..n_reg {
                e[j] -= beta[j][k] * (y[k] - ybar[k]);
            }
        }
        for j in 0..2 {
            for jj in 0..2 {
                se[j][jj] += e[j] * e[jj];
            }
        }
    }
    let dof = (n - 2) as f64;
    let cond = Matrix2::from_fn(|j, jj| se[j][jj] / dof);

    let mut slope = Matrix2::zeros();
    let mut slope_se = Matrix2::zeros();
    for j in 0..2 {
        for k in 0..n_reg {
            let col = reg_cols[k];
            slope[(j, col)] = beta[j][k];
            slope_se[(j, col)] = (cond[(j, j)] * inv_syy[k][k]).sqrt();
        }
    }
    let cond_se = Matrix2::from_fn(|j, jj| {
        ((cond[(j, j)] * cond[(jj, jj)] + cond[(j, jj)] * cond[(j, jj)]) / dof).sqrt()
    });

    Ok(MomentEstimate {
        slope,
        slope_stderr: slope_se,
        conditional_cov: cond,
        conditional_cov_stderr: cond_se,
    })
}

/// Runs a protocol once per sampled outcome and returns (mean work, standard
/// error of the mean). The per-shot work is outcome-independent, so the
/// standard error collapses to float noise; this is the point being checked.
pub fn mc_work(
    params: &StandardFormParams,
    kind: ProtocolKind,
    n: usize,
    seed: u64,
) -> Result<(f64, f64), McError> {
    let state = standard_form_state(params);
    if !is_physical(state.cov()) {
        return Err(McError::NotPhysical);
    }
    let batch = sample_state(&state, n, seed)?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let p = &batch.points[i];
        let z = &batch.noise[i];
        let w = match kind {
            ProtocolKind::HomodyneX => {
                trajectory_unchecked(params, kind, Vector2::new(p[2], 0.0))?.work
            }
            ProtocolKind::HomodyneP => {
                trajectory_unchecked(params, kind, Vector2::new(0.0, p[3]))?.work
            }
            ProtocolKind::HomodyneAverage => {
                let wx =
                    trajectory_unchecked(params, ProtocolKind::HomodyneX, Vector2::new(p[2], 0.0))?
                        .work;
                let wp =
                    trajectory_unchecked(params, ProtocolKind::HomodyneP, Vector2::new(0.0, p[3]))?
                        .work;
                0.5 * (wx + wp)
            }
            ProtocolKind::Heterodyne => {
                let outcome = Vector2::new(p[2] + z[0] * inv_sqrt2, p[3] + z[1] * inv_sqrt2);
                trajectory_unchecked(params, kind, outcome)?.work
            }
        };
        let k = (i + 1) as f64;
        let d = w - mean;
        mean += d / k;
        m2 += d * (w - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{work_het, work_hom};

    fn params_5533() -> StandardFormParams {
        StandardFormParams::new(5.0, 5.0, 3.0, -3.0)
    }

    fn sample_cov(points: &[Vector4<f64>], i: usize, j: usize) -> f64 {
        let n = points.len() as f64;
        let mi: f64 = points.iter().map(|p| p[i]).sum::<f64>() / n;
        let mj: f64 = points.iter().map(|p| p[j]).sum::<f64>() / n;
        points
            .iter()
            .map(|p| (p[i] - mi) * (p[j] - mj))
            .sum::<f64>()
            / (n - 1.0)
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let st = standard_form_state(&params_5533());
        let b1 = sample_state(&st, 500, 42).unwrap();
        let b2 = sample_state(&st, 500, 42).unwrap();
        assert_eq!(b1.points(), b2.points());
        assert_eq!(b1.noise(), b2.noise());
        let b3 = sample_state(&st, 500, 43).unwrap();
        assert_ne!(b1.points()[0], b3.points()[0]);
    }

    #[test]
    fn vacuum_marginals_have_half_unit_variance() {
        let st = standard_form_state(&StandardFormParams::new(1.0, 1.0, 0.0, 0.0));
        let batch = sample_state(&st, 200_000, 7).unwrap();
        for q in 0..4 {
            let v = sample_cov(batch.points(), q, q);
            // var(sample var) ≈ 2σ⁴/n → σ ≈ 0.0016 at σ²=0.5, n=2e5.
            assert!((v - 0.5).abs() < 0.01, "quadrature {q}: variance {v}");
        }
    }

    #[test]
    fn correlated_state_reproduces_covariances() {
        let st = standard_form_state(&params_5533());
        let batch = sample_state(&st, 200_000, 11).unwrap();
        assert!((sample_cov(batch.points(), 0, 0) - 2.5).abs() < 0.05);
        assert!((sample_cov(batch.points(), 0, 2) - 1.5).abs() < 0.05);
        assert!((sample_cov(batch.points(), 1, 3) + 1.5).abs() < 0.05);
        assert!(sample_cov(batch.points(), 0, 1).abs() < 0.05);
    }

    #[test]
    fn sampling_rejects_nonphysical_states() {
        let st = standard_form_state(&StandardFormParams::symmetric(1.0, 0.5));
        assert_eq!(sample_state(&st, 10, 0).unwrap_err(), McError::NotPhysical);
    }

    #[test]
    fn estimation_needs_enough_samples() {
        let st = standard_form_state(&params_5533());
        let batch = sample_state(&st, 99, 0).unwrap();
        assert_eq!(
            estimate_conditional(&batch, &MeasurementSpec::homodyne_x(Mode::B)).unwrap_err(),
            McError::InsufficientSamples
        );
    }

    #[test]
    fn x_homodyne_regression_recovers_gain_and_conditional_cov() {
        let st = standard_form_state(&params_5533());
        let batch = sample_state(&st, 100_000, 1).unwrap();
        let est = estimate_conditional(&batch, &MeasurementSpec::homodyne_x(Mode::B)).unwrap();
        // Gain C (Γ_B + Γ_m)⁻¹ projects to c1/b = 0.6 on the x column.
        let slope = est.slope[(0, 0)];
        let se = est.slope_stderr[(0, 0)];
        assert!(se > 0.0 && se < 0.01);
        assert!((slope - 0.6).abs() < 3.0 * se, "slope {slope} ± {se}");
        assert!(est.slope[(1, 0)].abs() < 3.0 * est.slope_stderr[(1, 0)].max(1e-3));
        assert_eq!(est.slope[(0, 1)], 0.0, "p column unused for x-homodyne");
        // Conditional covariance estimates diag(3.2, 5)/2.
        for (j, want) in [(0, 1.6), (1, 2.5)] {
            let got = est.conditional_cov[(j, j)];
            let se = est.conditional_cov_stderr[(j, j)];
            assert!(
                (got - want).abs() < 5.0 * se,
                "cov[{j}]: {got} vs {want} ± {se}"
            );
        }
        assert!(est.conditional_cov[(0, 1)].abs() < 5.0 * est.conditional_cov_stderr[(0, 1)]);
    }

    #[test]
    fn heterodyne_regression_recovers_gain_matrix() {
        let st = standard_form_state(&params_5533());
        let batch = sample_state(&st, 100_000, 2).unwrap();
        let est = estimate_conditional(&batch, &MeasurementSpec::heterodyne(Mode::B)).unwrap();
        // Gain diag(c1, c2)/(b + 1) = diag(0.5, -0.5).
        for (j, k, want) in [(0, 0, 0.5), (1, 1, -0.5), (0, 1, 0.0), (1, 0, 0.0)] {
            let got = est.slope[(j, k)];
            let se = est.slope_stderr[(j, k)];
            assert!(
                (got - want).abs() < 4.0 * se,
                "slope[{j},{k}] = {got} vs {want} ± {se}"
            );
        }
        // Conditional covariance estimates diag(3.5, 3.5)/2.
        for j in 0..2 {
            let got = est.conditional_cov[(j, j)];
            let se = est.conditional_cov_stderr[(j, j)];
            assert!((got - 1.75).abs() < 5.0 * se);
        }
    }

    #[test]
    fn heterodyne_outcome_variance_includes_measurement_noise() {
        let st = standard_form_state(&params_5533());
        let batch = sample_state(&st, 100_000, 3).unwrap();
        // Reconstruct heterodyne outcomes the way estimate_conditional does.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xs: Vec<f64> = batch
            .points()
            .iter()
            .zip(batch.noise())
            .map(|(p, z)| p[2] + z[0] * s)
            .collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        // (Γ_B + I)/2 has xx entry (5 + 1)/2 = 3.
        assert!((v - 3.0).abs() < 0.06, "outcome variance {v}");
    }

    #[test]
    fn uncorrelated_modes_regress_to_zero_gain() {
        let st = standard_form_state(&StandardFormParams::new(3.0, 2.0, 0.0, 0.0));
        let batch = sample_state(&st, 100_000, 4).unwrap();
        let est = estimate_conditional(&batch, &MeasurementSpec::homodyne_x(Mode::B)).unwrap();
        let slope = est.slope[(0, 0)];
        assert!(
            slope.abs() < 4.0 * est.slope_stderr[(0, 0)],
            "slope {slope}"
        );
    }

    #[test]
    fn mc_work_matches_closed_forms() {
        let p = params_5533();
        let (w, se) = mc_work(&p, ProtocolKind::HomodyneAverage, 100_000, 5).unwrap();
        assert!(
            (w - work_hom(&p).unwrap()).abs() <= 4.0 * se + 1e-9,
            "w = {w}, se = {se}"
        );
        let (w, se) = mc_work(&p, ProtocolKind::Heterodyne, 100_000, 5).unwrap();
        assert!(
            (w - work_het(&p).unwrap()).abs() <= 4.0 * se + 1e-9,
            "w = {w}, se = {se}"
        );
        // Outcome independence shows up as a collapsed standard error.
        assert!(
            se < 1e-12,
            "per-shot work variance must be float noise, got {se}"
        );
    }

    #[test]
    fn mc_work_is_reproducible() {
        let p = params_5533();
        let r1 = mc_work(&p, ProtocolKind::Heterodyne, 10_000, 99).unwrap();
        let r2 = mc_work(&p, ProtocolKind::Heterodyne, 10_000, 99).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn mc_work_of_uncorrelated_state_is_zero() {
        let p = StandardFormParams::new(4.0, 2.0, 0.0, 0.0);
        let (w, se) = mc_work(&p, ProtocolKind::HomodyneAverage, 1_000, 0).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn conditional_cov_estimates_match_update_formula_on_random_states() {
        // kept as integration-scale check in tests/; here a single spot case
        // with a p-homodyne to cover the remaining branch.
        let st = standard_form_state(&StandardFormParams::new(4.0, 3.0, -1.5, 1.0));
        let batch = sample_state(&st, 100_000, 6).unwrap();
        let est = estimate_conditional(&batch, &MeasurementSpec::homodyne_p(Mode::B)).unwrap();
        // Gain on the p column: c2/b = 1/3.
        let slope = est.slope[(1, 1)];
        let se = est.slope_stderr[(1, 1)];
        assert!((slope - 1.0 / 3.0).abs() < 4.0 * se);
        // Conditional covariance diag(4, 4 − 1/3)/2.
        let want_pp = (4.0 - 1.0 / 3.0) / 2.0;
        assert!(
            (est.conditional_cov[(1, 1)] - want_pp).abs()
                < 5.0 * est.conditional_cov_stderr[(1, 1)]
        );
        assert!(
            (est.conditional_cov[(0, 0)] - 2.0).abs() < 5.0 * est.conditional_cov_stderr[(0, 0)]
        );
    }
}
