//! Empirical moments, ridge readout, the ridge identity, the prediction
//! score, and the per-mode spectrum used to diagnose spectral pollution.

use serde::{Deserialize, Serialize};

use crate::error::{DarError, Result};
use crate::numerics::{solve_spd, sym_eig, Matrix, Vector};

/// Relative tolerance for the ridge identity
/// `training_error = target_energy - score`.
pub const RIDGE_IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance for the mode-sum identity
/// `sum_i contribution_i = score`.
pub const MODE_SUM_TOL: f64 = 1e-9;

/// Empirical second-moment matrix and state-target cross-covariance,
/// both computed with the `1/T` convention. When re-centering is
/// requested, the window means are subtracted first and recorded so the
/// readout can undo them at forecast time.
#[derive(Debug, Clone)]
pub struct Moments {
    pub sigma: Matrix,
    pub cross: Matrix,
    pub sample_count: usize,
    /// `(1/T) sum_n |y_n|^2` of the (possibly re-centered) targets.
    pub target_energy: f64,
    pub state_mean: Vector,
    pub target_mean: Vector,
}

/// Accumulates moments from sample columns: `states` is N x T,
/// `targets` is p x T, with column `n` of each forming the pair
/// `(x_n, y_n)`.
pub fn accumulate_moments(states: &Matrix, targets: &Matrix, recenter: bool) -> Result<Moments> {
    let t = states.ncols();
    if targets.ncols() != t {
        return Err(DarError::DimensionMismatch {
            context: format!("{} states vs {} targets", t, targets.ncols()),
        });
    }
    if t == 0 {
        return Err(DarError::Empty { context: "moment accumulation".into() });
    }
    let n = states.nrows();
    let p = targets.nrows();
    let tf = t as f64;

    let (xc, yc, state_mean, target_mean) = if recenter {
        let state_mean = states.column_mean();
        let target_mean = targets.column_mean();
        let mut xc = states.clone();
        let mut yc = targets.clone();
        for mut col in xc.column_iter_mut() {
            col -= &state_mean;
        }
        for mut col in yc.column_iter_mut() {
            col -= &target_mean;
        }
        (xc, yc, state_mean, target_mean)
    } else {
        (states.clone(), targets.clone(), Vector::zeros(n), Vector::zeros(p))
    };

    let sigma = &xc * xc.transpose() / tf;
    let cross = &xc * yc.transpose() / tf;
    let target_energy = yc.norm_squared() / tf;
    Ok(Moments { sigma, cross, sample_count: t, target_energy, state_mean, target_mean })
}

/// Linear readout solving `(Sigma + lambda I) W = C`, with the ridge
/// prediction score and the training error implied by the ridge
/// identity.
#[derive(Debug, Clone)]
pub struct RidgeReadout {
    pub weights: Matrix,
    pub lambda: f64,
    /// `trace(C^T (Sigma + lambda I)^{-1} C)`.
    pub score: f64,
    pub training_error: f64,
    pub state_mean: Vector,
    pub target_mean: Vector,
}

impl RidgeReadout {
    pub fn predict(&self, state: &Vector) -> Vector {
        self.weights.transpose() * (state - &self.state_mean) + &self.target_mean
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }
}

pub fn ridge_solve(moments: &Moments, lambda: f64) -> Result<RidgeReadout> {
    if lambda <= 0.0 {
        return Err(DarError::InvalidArgument { context: format!("lambda = {lambda} must be > 0") });
    }
    let n = moments.sigma.nrows();
    let regularized = &moments.sigma + Matrix::identity(n, n) * lambda;
    let weights = solve_spd(&regularized, &moments.cross)?;
    let score = (moments.cross.transpose() * &weights).trace();
    let training_error = moments.target_energy - score;
    Ok(RidgeReadout {
        weights,
        lambda,
        score,
        training_error,
        state_mean: moments.state_mean.clone(),
        target_mean: moments.target_mean.clone(),
    })
}

/// Residual of the ridge identity: recomputes the penalized empirical
/// loss directly from the raw data that built `moments` and compares it
/// with `target_energy - score`.
pub fn ridge_identity_check(
    moments: &Moments,
    readout: &RidgeReadout,
    states: &Matrix,
    targets: &Matrix,
) -> Result<f64> {
    let t = states.ncols();
    if t != moments.sample_count || targets.ncols() != t {
        return Err(DarError::DimensionMismatch {
            context: "identity check needs the same sample count that built the moments".into(),
        });
    }
    let tf = t as f64;
    let mut loss = 0.0;
    for j in 0..t {
        let x = states.column(j) - &moments.state_mean;
        let y = targets.column(j) - &moments.target_mean;
        let err = readout.weights.transpose() * x - y;
        loss += err.norm_squared();
    }
    loss /= tf;
    loss += readout.lambda * readout.weights.norm_squared();
    let implied = moments.target_energy - readout.score;
    Ok((loss - implied).abs())
}

/// One covariance eigendirection of the ridge spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeMode {
    pub eigenvalue: f64,
    /// `|q_i^T C|^2`.
    pub alignment_sq: f64,
    /// `|q_i^T C|^2 / (eigenvalue + lambda)`.
    pub contribution: f64,
}

/// Per-mode decomposition of the ridge prediction score. The
/// contributions are verified to sum to the trace formula.
pub fn ridge_modes(moments: &Moments, lambda: f64) -> Result<Vec<RidgeMode>> {
    if lambda <= 0.0 {
        return Err(DarError::InvalidArgument { context: format!("lambda = {lambda} must be > 0") });
    }
    let eig = sym_eig(&moments.sigma)?;
    let mut modes = Vec::with_capacity(eig.dim());
    let mut total = 0.0;
    for i in 0..eig.dim() {
        let q = eig.eigenvectors.column(i);
        let alignment = moments.cross.transpose() * q;
        let alignment_sq = alignment.norm_squared();
        let contribution = alignment_sq / (eig.eigenvalues[i] + lambda);
        total += contribution;
        modes.push(RidgeMode { eigenvalue: eig.eigenvalues[i], alignment_sq, contribution });
    }

    let score = ridge_solve(moments, lambda)?.score;
    if (total - score).abs() > MODE_SUM_TOL * score.abs().max(f64::MIN_POSITIVE) && score != 0.0 {
        return Err(DarError::ResidualTooLarge {
            residual: (total - score).abs(),
            tolerance: MODE_SUM_TOL * score.abs(),
        });
    }
    Ok(modes)
}

/// Shannon entropy (nats) of the normalized contribution distribution;
/// large values mean the score is spread across many weakly informative
/// modes.
pub fn contribution_entropy(modes: &[RidgeMode]) -> f64 {
    let total: f64 = modes.iter().map(|m| m.contribution).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for m in modes {
        let p = m.contribution / total;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h
}
