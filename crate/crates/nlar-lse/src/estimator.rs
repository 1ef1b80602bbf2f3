//! Recursive least squares with information-matrix tracking.
//!
//! The recursion maintains
//!   θ̂_{t+1} = θ̂_t + P_{t+1} φ_t (y_{t+1} − φ_tᵀ θ̂_t),
//!   P_{t+1} = P_t − (1 + φ_tᵀ P_t φ_t)⁻¹ P_t φ_t φ_tᵀ P_t,   P_0 = I_m,
//! together with the information matrix P_{t+1}⁻¹ = I_m + Σ φ_i φ_iᵀ kept
//! incrementally as `gram`. Eigenvalue extremes are read from `gram` (a
//! well-conditioned accumulation), never from inverting P.
//!
//! The truncated variant zeroes φ_t whenever the window leaves the ball of
//! radius C_φ, so estimation only consumes compact-set data. Under gaussian
//! noise and a standard-normal prior on θ, (θ̂_t, P_t) is exactly the
//! posterior mean and covariance.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, jacobi_eigen_extremes, Matrix};
use crate::models::{NoiseSpec, RegressorMap};
use crate::sim::Trajectory;

/// Convergence tolerance for the Jacobi eigensolver, relative to ‖gram‖_F.
pub const JACOBI_REL_TOL: f64 = 1e-12;

/// Running state of the recursive estimator.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    theta_hat: Vec<f64>,
    p: Matrix,
    gram: Matrix,
    t: usize,
    r_t: f64,
    c_phi: Option<f64>,
    theta_0: Vec<f64>,
}

impl EstimatorState {
    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn covariance(&self) -> &Matrix {
        &self.p
    }

    /// I_m + Σ φ_i φ_iᵀ, maintained incrementally.
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// Number of updates applied.
    pub fn step_count(&self) -> usize {
        self.t
    }

    /// 1 + Σ ‖φ_i‖², the scalar excitation clock.
    ///
    /// Differs from trace(gram) by exactly m − 1; both are exposed because
    /// the clock normalizes the eigenvalue diagnostics while the trace
    /// belongs to the matrix.
    pub fn r_t(&self) -> f64 {
        self.r_t
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.c_phi
    }

    pub fn theta_0(&self) -> &[f64] {
        &self.theta_0
    }

    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }
}

/// Eigenvalue extremes of the information matrix along a run.
///
/// Starts at λ_min = λ_max = 1 (the identity prior); both series are
/// non-decreasing because the matrix grows by rank-one increments.
#[derive(Debug, Clone, Default)]
pub struct EigenTrack {
    pub times: Vec<usize>,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
}

impl EigenTrack {
    pub fn push(&mut self, t: usize, lo: f64, hi: f64) {
        self.times.push(t);
        self.lambda_min.push(lo);
        self.lambda_max.push(hi);
    }

    /// Reads the extremes from the current state, verifies the checkpoint
    /// invariants (ordering, monotone growth, and P·gram staying inverse to
    /// within 1e-8·‖gram‖), and appends them.
    pub fn record(&mut self, t: usize, state: &EstimatorState) -> Result<(f64, f64)> {
        let (lo, hi) = gram_eigs(state)?;
        let grew = self
            .lambda_min
            .last()
            .map(|&prev_lo| lo >= prev_lo - 1e-9)
            .unwrap_or(true)
            && self
                .lambda_max
                .last()
                .map(|&prev_hi| hi >= prev_hi - 1e-9)
                .unwrap_or(true);
        if !(lo <= hi) || !grew {
            return Err(Error::Numeric {
                step: state.t,
                message: format!("eigenvalue extremes lost monotonicity ({lo}, {hi})"),
            });
        }
        let residual = state.p.inverse_pair_residual(&state.gram);
        if residual > 1e-8 * state.gram.inf_norm() {
            return Err(Error::Numeric {
                step: state.t,
                message: format!(
                    "covariance drifted from the information matrix inverse \
                                  (residual {residual:.3e})"
                ),
            });
        }
        self.push(t, lo, hi);
        Ok((lo, hi))
    }
}

/// Fresh estimator with θ̂ = θ_0 and P = gram = I_m.
pub fn rls_init(theta_0: &[f64], c_phi: Option<f64>) -> Result<EstimatorState> {
    if theta_0.is_empty() {
        return Err(Error::invalid("initial estimate must be non-empty"));
    }
    if !theta_0.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("initial estimate must be finite"));
    }
    if let Some(c) = c_phi {
        if !(c > 0.0) {
            return Err(Error::invalid("truncation radius must be positive"));
        }
    }
    let m = theta_0.len();
    Ok(EstimatorState {
        theta_hat: theta_0.to_vec(),
        p: Matrix::identity(m),
        gram: Matrix::identity(m),
        t: 0,
        r_t: 1.0,
        c_phi,
        theta_0: theta_0.to_vec(),
    })
}

/// One recursive update with regressor φ_t and target y_{t+1}.
///
/// P is re-symmetrized after the rank-one downdate; long horizons otherwise
/// accumulate asymmetry. The denominator 1 + φᵀPφ is at least 1, so the
/// update needs no degeneracy handling.
pub fn rls_step(state: &mut EstimatorState, phi_t: &[f64], y_next: f64) -> Result<()> {
    let m = state.dim();
    if phi_t.len() != m {
        return Err(Error::invalid(format!(
            "regressor length {} does not match dimension {m}",
            phi_t.len()
        )));
    }
    if !y_next.is_finite() || !phi_t.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("regressor and target must be finite"));
    }

    let p_phi = state.p.mat_vec(phi_t);
    let quad: f64 = phi_t.iter().zip(p_phi.iter()).map(|(a, b)| a * b).sum();
    let denom = 1.0 + quad;
    state.p.add_outer(-1.0 / denom, &p_phi);
    state.p.symmetrize();

    let innovation = y_next
        - phi_t
            .iter()
            .zip(state.theta_hat.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    let gain = state.p.mat_vec(phi_t);
    for (th, g) in state.theta_hat.iter_mut().zip(gain.iter()) {
        *th += g * innovation;
    }

    state.gram.add_outer(1.0, phi_t);
    state.r_t += phi_t.iter().map(|v| v * v).sum::<f64>();
    state.t += 1;

    if !state.p.is_finite() || !state.theta_hat.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric {
            step: state.t,
            message: "recursive update produced a non-finite value".into(),
        });
    }
    Ok(())
}

/// The truncated regressor 1{‖(y_t, …, y_{t−n+1})‖ ≤ C_φ}·φ(y_t, …, y_{t−n+1}).
///
/// Returns the zero vector when the window's Euclidean norm exceeds C_φ;
/// equality keeps the regressor (closed-ball indicator).
pub fn truncated_regressor(
    map: &RegressorMap,
    traj: &Trajectory,
    t: usize,
    c_phi: f64,
) -> Result<Vec<f64>> {
    if !(c_phi > 0.0) {
        return Err(Error::invalid("truncation radius must be positive"));
    }
    let window = traj.window_of_len(t, map.arity())?;
    let norm = window.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= c_phi {
        map.eval(&window)
    } else {
        Ok(vec![0.0; map.dim()])
    }
}

/// Direct solve of (I_m + Σ φ_i φ_iᵀ) θ = θ_0 + Σ φ_i y_{i+1}.
///
/// The regularized normal equations the recursion solves implicitly; used as
/// the batch oracle. The system matrix dominates the identity, so the
/// symmetric solve cannot fail on finite data.
pub fn batch_ls(regressors: &[Vec<f64>], targets: &[f64], theta_0: &[f64]) -> Result<Vec<f64>> {
    if regressors.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} regressors vs {} targets",
            regressors.len(),
            targets.len()
        )));
    }
    let m = theta_0.len();
    if m == 0 {
        return Err(Error::invalid("theta_0 must be non-empty"));
    }
    let mut gram = Matrix::identity(m);
    let mut rhs = theta_0.to_vec();
    for (phi, y) in regressors.iter().zip(targets.iter()) {
        if phi.len() != m {
            return Err(Error::invalid(format!(
                "regressor length {} does not match dimension {m}",
                phi.len()
            )));
        }
        gram.add_outer(1.0, phi);
        for (r, p) in rhs.iter_mut().zip(phi.iter()) {
            *r += p * y;
        }
    }
    cholesky_solve(&gram, &rhs)
}

/// Extreme eigenvalues of the information matrix via cyclic Jacobi rotations.
///
/// Sanity-checks λ_min ≥ 1 − 1e-9, which holds because gram dominates I_m.
pub fn gram_eigs(state: &EstimatorState) -> Result<(f64, f64)> {
    let (lo, hi) = jacobi_eigen_extremes(state.gram(), JACOBI_REL_TOL)?;
    if lo < 1.0 - 1e-9 {
        return Err(Error::Numeric {
            step: state.t,
            message: format!("information matrix lost the identity floor (lambda_min = {lo})"),
        });
    }
    Ok((lo, hi))
}

/// The conjugate gaussian posterior of θ given the data consumed so far.
///
/// Under standard-normal noise and the prior θ ~ N(θ_0, I_m), the recursion
/// maintains exactly the posterior mean θ̂_t and covariance P_t, so this is a
/// view, not a computation. Calling it under any other noise declaration is a
/// contract violation.
pub fn posterior(state: &EstimatorState, noise: &NoiseSpec) -> Result<(Vec<f64>, Matrix)> {
    if !noise.gaussian {
        return Err(Error::ContractViolation(format!(
            "posterior view requires standard-normal noise, got {}",
            noise.tag()
        )));
    }
    Ok((state.theta_hat.to_vec(), state.p.clone()))
}

/// Squared error and its comparison against the eigenvalue bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// ‖θ̂ − θ‖².
    pub err2: f64,
    /// err2 · λ_min / log(max(λ_max, e)); the clamp keeps the start of a run
    /// (λ_max = 1) from dividing by zero.
    pub bound_ratio: f64,
}

pub fn error_metrics(
    theta_hat: &[f64],
    theta_true: &[f64],
    lambda_min: f64,
    lambda_max: f64,
) -> ErrorMetrics {
    debug_assert_eq!(theta_hat.len(), theta_true.len());
    debug_assert!(lambda_min >= 1.0 - 1e-9);
    let err2: f64 = theta_hat
        .iter()
        .zip(theta_true.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let denom = lambda_max.max(std::f64::consts::E).ln();
    ErrorMetrics {
        err2,
        bound_ratio: err2 * lambda_min / denom,
    }
}
