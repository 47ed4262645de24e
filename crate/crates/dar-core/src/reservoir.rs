//! Teacher-forced reservoir dynamics: linear and tanh state updates,
//! state trajectories, increments, and forcing increments.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{DarError, Result};
use crate::numerics::{orthogonality_defect, Matrix, RngStream, Vector};
use crate::signals::TimeSeries;

/// Orthogonality tolerance for the connectivity matrix, per dimension.
pub const CONNECTIVITY_ORTHO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Tanh,
}

/// Componentwise input feature map applied before the input matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMap {
    Identity,
    /// One polynomial per feature, coefficients in ascending powers,
    /// applied to every input channel: output width = channels * polys.
    Polynomials(Vec<Vec<f64>>),
}

impl FeatureMap {
    pub fn output_width(&self, input_width: usize) -> usize {
        match self {
            FeatureMap::Identity => input_width,
            FeatureMap::Polynomials(polys) => input_width * polys.len(),
        }
    }

    pub fn apply(&self, input: &[f64], out: &mut Vector) {
        match self {
            FeatureMap::Identity => {
                for (i, &u) in input.iter().enumerate() {
                    out[i] = u;
                }
            }
            FeatureMap::Polynomials(polys) => {
                for (c, &u) in input.iter().enumerate() {
                    for (p, poly) in polys.iter().enumerate() {
                        // Horner evaluation
                        let mut acc = 0.0;
                        for &coeff in poly.iter().rev() {
                            acc = acc * u + coeff;
                        }
                        out[c * polys.len() + p] = acc;
                    }
                }
            }
        }
    }
}

/// Fixed reservoir: input matrix `A`, orthogonal connectivity `B`,
/// feedback scale `beta`, activation, and input feature map.
///
/// The update is `x_{n+1} = act(A phi(u_n) + beta B x_n)`; the same
/// `beta` serves both the linear and the tanh dynamics.
#[derive(Debug, Clone)]
pub struct ReservoirParams {
    pub input: Matrix,
    pub connectivity: Matrix,
    pub beta: f64,
    pub activation: Activation,
    pub feature_map: FeatureMap,
}

impl ReservoirParams {
    /// # Errors
    /// Rejects `beta` outside `[0, 1)` and non-orthogonal connectivity.
    /// (`beta = 0` is the degenerate no-feedback case used in tests.)
    pub fn new(
        input: Matrix,
        connectivity: Matrix,
        beta: f64,
        activation: Activation,
        feature_map: FeatureMap,
    ) -> Result<Self> {
        let n = connectivity.nrows();
        if connectivity.ncols() != n {
            return Err(DarError::DimensionMismatch { context: "connectivity must be square".into() });
        }
        if input.nrows() != n {
            return Err(DarError::DimensionMismatch {
                context: format!("input matrix has {} rows, connectivity is {n}x{n}", input.nrows()),
            });
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(DarError::InvalidArgument {
                context: format!("beta = {beta} must lie in [0, 1) for fading memory"),
            });
        }
        let defect = orthogonality_defect(&connectivity);
        if defect > CONNECTIVITY_ORTHO_TOL * n as f64 {
            return Err(DarError::InvalidArgument {
                context: format!("connectivity is not orthogonal: defect {defect:.3e}"),
            });
        }
        Ok(Self { input, connectivity, beta, activation, feature_map })
    }

    pub fn state_dim(&self) -> usize {
        self.connectivity.nrows()
    }

    pub fn feature_width(&self) -> usize {
        self.input.ncols()
    }

    /// One state update from `x` under raw input `u`.
    pub fn step(&self, u: &[f64], x: &Vector, phi_buf: &mut Vector, out: &mut Vector) {
        self.feature_map.apply(u, phi_buf);
        out.gemv(self.beta, &self.connectivity, x, 0.0);
        out.gemv(1.0, &self.input, phi_buf, 1.0);
        if self.activation == Activation::Tanh {
            for v in out.iter_mut() {
                *v = v.tanh();
            }
        }
    }
}

/// State sequence of a teacher-forced run. Column `n` holds `x_n`;
/// `x_{n+1}` was produced by input `u_n`, so `states` has one more
/// column than the input had steps.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    states: Matrix,
}

impl StateTrajectory {
    pub fn from_states(states: Matrix) -> Self {
        Self { states }
    }

    pub fn state_count(&self) -> usize {
        self.states.ncols()
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn state(&self, n: usize) -> Vector {
        self.states.column(n).into_owned()
    }

    pub fn states(&self) -> &Matrix {
        &self.states
    }

    /// `x_{n+1} - x_n`; defined for `n < state_count() - 1`.
    pub fn increment(&self, n: usize) -> Vector {
        (self.states.column(n + 1) - self.states.column(n)).into_owned()
    }

    pub fn increment_count(&self) -> usize {
        self.state_count() - 1
    }

    /// Owned copy of state columns over `range` (state index = index of
    /// the target it is paired with during training).
    pub fn columns_owned(&self, range: Range<usize>) -> Matrix {
        self.states.columns(range.start, range.end - range.start).into_owned()
    }
}

/// Gaussian input matrix with i.i.d. `N(0, scale^2)` entries.
pub fn make_input_matrix(n: usize, m: usize, rng: &mut RngStream, scale: f64) -> Result<Matrix> {
    if n == 0 || m == 0 {
        return Err(DarError::InvalidArgument { context: "input matrix dimensions must be >= 1".into() });
    }
    Ok(Matrix::from_fn(n, m, |_, _| scale * rng.standard_normal()))
}

/// Teacher-forced run over the full input series, starting from `x0`.
pub fn drive(params: &ReservoirParams, input: &TimeSeries, x0: &Vector) -> Result<StateTrajectory> {
    if input.is_empty() {
        return Err(DarError::Empty { context: "drive input".into() });
    }
    if params.feature_width() != params.feature_map.output_width(input.width()) {
        return Err(DarError::DimensionMismatch {
            context: format!(
                "input matrix expects {} features, feature map yields {}",
                params.feature_width(),
                params.feature_map.output_width(input.width())
            ),
        });
    }
    let n = params.state_dim();
    if x0.len() != n {
        return Err(DarError::DimensionMismatch { context: "x0 dimension mismatch".into() });
    }

    let steps = input.len();
    let mut states = Matrix::zeros(n, steps + 1);
    states.set_column(0, x0);
    let mut x = x0.clone();
    let mut next = Vector::zeros(n);
    let mut phi = Vector::zeros(params.feature_width());
    for t in 0..steps {
        params.step(input.row(t), &x, &mut phi, &mut next);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(DarError::NonFiniteState { step: t });
        }
        states.set_column(t + 1, &next);
        std::mem::swap(&mut x, &mut next);
    }
    Ok(StateTrajectory { states })
}

/// Forcing increments `v_n = A (phi(u_{n+1}) - phi(u_n))`, the vectors
/// whose span defines the increment-spine.
pub fn forcing_increments(params: &ReservoirParams, input: &TimeSeries) -> Result<Vec<Vector>> {
    if input.len() < 2 {
        return Err(DarError::Empty { context: "forcing_increments needs at least 2 input steps".into() });
    }
    let fw = params.feature_width();
    if fw != params.feature_map.output_width(input.width()) {
        return Err(DarError::DimensionMismatch { context: "feature width mismatch".into() });
    }
    let mut out = Vec::with_capacity(input.len() - 1);
    let mut phi_a = Vector::zeros(fw);
    let mut phi_b = Vector::zeros(fw);
    params.feature_map.apply(input.row(0), &mut phi_a);
    for t in 0..input.len() - 1 {
        params.feature_map.apply(input.row(t + 1), &mut phi_b);
        let diff = &phi_b - &phi_a;
        out.push(&params.input * diff);
        std::mem::swap(&mut phi_a, &mut phi_b);
    }
    Ok(out)
}

/// Distance between two runs from different initial states after
/// `steps` identical inputs; measures washout, i.e. the uniform
/// attraction toward the input-determined trajectory.
pub fn washout_gap(
    params: &ReservoirParams,
    input: &TimeSeries,
    x0a: &Vector,
    x0b: &Vector,
    steps: usize,
) -> Result<f64> {
    if steps == 0 {
        return Err(DarError::InvalidArgument { context: "washout_gap requires steps >= 1".into() });
    }
    if input.len() < steps {
        return Err(DarError::InvalidArgument {
            context: format!("washout_gap needs {steps} input steps, series has {}", input.len()),
        });
    }
    let n = params.state_dim();
    let mut xa = x0a.clone();
    let mut xb = x0b.clone();
    let mut na = Vector::zeros(n);
    let mut nb = Vector::zeros(n);
    let mut phi = Vector::zeros(params.feature_width());
    for t in 0..steps {
        params.step(input.row(t), &xa, &mut phi, &mut na);
        params.step(input.row(t), &xb, &mut phi, &mut nb);
        std::mem::swap(&mut xa, &mut na);
        std::mem::swap(&mut xb, &mut nb);
    }
    Ok((xa - xb).norm())
}
