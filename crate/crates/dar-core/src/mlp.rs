//! One-hidden-layer tanh network readout trained with minibatch Adam on
//! mean-squared error. Inputs are z-scored per coordinate on the
//! training window; the offsets travel with the model for inference.

use serde::{Deserialize, Serialize};

use crate::error::{DarError, Result};
use crate::numerics::{Matrix, RngStream, Vector};

#[derive(Debug, Clone)]
pub struct MlpReadout {
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Matrix,
    pub b2: Vector,
    pub input_mean: Vector,
    pub input_scale: Vector,
}

impl MlpReadout {
    /// Fresh model with Gaussian weights of standard deviation
    /// `1/sqrt(fan_in)` and zero biases; identity input scaling.
    pub fn init(input_dim: usize, hidden: usize, output_dim: usize, rng: &mut RngStream) -> Self {
        let sd1 = 1.0 / (input_dim as f64).sqrt();
        let sd2 = 1.0 / (hidden as f64).sqrt();
        Self {
            w1: Matrix::from_fn(hidden, input_dim, |_, _| sd1 * rng.standard_normal()),
            b1: Vector::zeros(hidden),
            w2: Matrix::from_fn(output_dim, hidden, |_, _| sd2 * rng.standard_normal()),
            b2: Vector::zeros(output_dim),
            input_mean: Vector::zeros(input_dim),
            input_scale: Vector::from_element(input_dim, 1.0),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.w2.nrows()
    }

    fn standardize(&self, x: &Vector) -> Vector {
        Vector::from_fn(x.len(), |i, _| (x[i] - self.input_mean[i]) / self.input_scale[i])
    }

    /// `W2 tanh(W1 z + b1) + b2` on the z-scored input.
    pub fn forward(&self, x: &Vector) -> Vector {
        let z = self.standardize(x);
        let mut h = &self.w1 * z + &self.b1;
        for v in h.iter_mut() {
            *v = v.tanh();
        }
        &self.w2 * h + &self.b2
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn param(&self, idx: usize) -> f64 {
        let (n1, n2, n3) = (self.w1.len(), self.b1.len(), self.w2.len());
        if idx < n1 {
            self.w1.as_slice()[idx]
        } else if idx < n1 + n2 {
            self.b1[idx - n1]
        } else if idx < n1 + n2 + n3 {
            self.w2.as_slice()[idx - n1 - n2]
        } else {
            self.b2[idx - n1 - n2 - n3]
        }
    }

    fn param_mut(&mut self, idx: usize) -> &mut f64 {
        let (n1, n2, n3) = (self.w1.len(), self.b1.len(), self.w2.len());
        if idx < n1 {
            &mut self.w1.as_mut_slice()[idx]
        } else if idx < n1 + n2 {
            &mut self.b1[idx - n1]
        } else if idx < n1 + n2 + n3 {
            &mut self.w2.as_mut_slice()[idx - n1 - n2]
        } else {
            &mut self.b2[idx - n1 - n2 - n3]
        }
    }
}

/// Optimizer and schedule settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 600,
            batch_size: 256,
            learning_rate: 3e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LossSample {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
}

struct Grads {
    w1: Matrix,
    b1: Vector,
    w2: Matrix,
    b2: Vector,
}

/// Batched forward + backward pass on already-standardized inputs.
/// Loss is `(1/B) sum_b |yhat_b - y_b|^2`.
fn batch_grads(model: &MlpReadout, z: &Matrix, y: &Matrix) -> (f64, Grads) {
    let b = z.ncols() as f64;
    let ones = Vector::from_element(z.ncols(), 1.0);

    let mut h = &model.w1 * z; // H x B
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            h[(i, j)] = (h[(i, j)] + model.b1[i]).tanh();
        }
    }
    let mut yhat = &model.w2 * &h; // p x B
    for j in 0..yhat.ncols() {
        for i in 0..yhat.nrows() {
            yhat[(i, j)] += model.b2[i];
        }
    }
    let diff = &yhat - y;
    let loss = diff.norm_squared() / b;

    let d = diff * (2.0 / b); // p x B
    let g_w2 = &d * h.transpose();
    let g_b2 = &d * &ones;
    let mut d_pre = model.w2.transpose() * &d; // H x B
    for j in 0..d_pre.ncols() {
        for i in 0..d_pre.nrows() {
            d_pre[(i, j)] *= 1.0 - h[(i, j)] * h[(i, j)];
        }
    }
    let g_w1 = &d_pre * z.transpose();
    let g_b1 = &d_pre * &ones;
    (loss, Grads { w1: g_w1, b1: g_b1, w2: g_w2, b2: g_b2 })
}

fn batch_loss(model: &MlpReadout, z: &Matrix, y: &Matrix) -> f64 {
    let b = z.ncols() as f64;
    let mut h = &model.w1 * z;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            h[(i, j)] = (h[(i, j)] + model.b1[i]).tanh();
        }
    }
    let mut yhat = &model.w2 * &h;
    for j in 0..yhat.ncols() {
        for i in 0..yhat.nrows() {
            yhat[(i, j)] += model.b2[i];
        }
    }
    (yhat - y).norm_squared() / b
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(count: usize) -> Self {
        Self { m: vec![0.0; count], v: vec![0.0; count], t: 0 }
    }

    fn step(&mut self, model: &mut MlpReadout, grads: &Grads, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        let flat = grads
            .w1
            .as_slice()
            .iter()
            .chain(grads.b1.as_slice())
            .chain(grads.w2.as_slice())
            .chain(grads.b2.as_slice());
        for (idx, &g) in flat.enumerate() {
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *model.param_mut(idx) -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

/// Trains a readout on raw state columns (`states` is N x T, `targets`
/// p x T). Z-scoring offsets are computed on this window and stored in
/// the returned model. Data order is reshuffled every epoch from `rng`.
///
/// # Errors
/// A non-finite minibatch loss aborts training with the epoch index.
pub fn mlp_train(
    states: &Matrix,
    targets: &Matrix,
    hidden: usize,
    cfg: &TrainConfig,
    rng: &mut RngStream,
) -> Result<(MlpReadout, Vec<LossSample>)> {
    let t = states.ncols();
    if t == 0 || targets.ncols() != t {
        return Err(DarError::DimensionMismatch {
            context: format!("{} states vs {} targets", t, targets.ncols()),
        });
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(DarError::InvalidArgument { context: "epochs and batch_size must be >= 1".into() });
    }
    if cfg.learning_rate < 0.0 {
        return Err(DarError::InvalidArgument { context: "learning_rate must be >= 0".into() });
    }
    let n = states.nrows();
    let p = targets.nrows();

    let mut model = MlpReadout::init(n, hidden, p, rng);
    let mean = states.column_mean();
    let mut scale = Vector::zeros(n);
    for i in 0..n {
        let var = (0..t).map(|j| (states[(i, j)] - mean[i]).powi(2)).sum::<f64>() / t as f64;
        let sd = var.sqrt();
        scale[i] = if sd > 0.0 { sd } else { 1.0 };
    }
    model.input_mean = mean;
    model.input_scale = scale;

    let z_all = Matrix::from_fn(n, t, |i, j| (states[(i, j)] - model.input_mean[i]) / model.input_scale[i]);

    let mut adam = Adam::new(model.param_count());
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..t).collect();
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut step = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let z = Matrix::from_fn(n, chunk.len(), |i, j| z_all[(i, chunk[j])]);
            let y = Matrix::from_fn(p, chunk.len(), |i, j| targets[(i, chunk[j])]);
            let (loss, grads) = batch_grads(&model, &z, &y);
            if !loss.is_finite() {
                return Err(DarError::Diverged { epoch });
            }
            adam.step(&mut model, &grads, cfg);
            trace.push(LossSample { epoch, step, loss });
            step += 1;
        }
    }
    Ok((model, trace))
}

/// Compares analytic gradients with central finite differences (step
/// `1e-5`) over a random subset of parameters; returns the maximum
/// relative error, with the denominator floored at `1e-6` so that
/// zero-gradient coordinates compare absolutely.
pub fn gradient_check(
    model: &MlpReadout,
    states: &Matrix,
    targets: &Matrix,
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    let t = states.ncols();
    if t == 0 || targets.ncols() != t {
        return Err(DarError::Empty { context: "gradient check batch".into() });
    }
    let n = states.nrows();
    let z = Matrix::from_fn(n, t, |i, j| (states[(i, j)] - model.input_mean[i]) / model.input_scale[i]);
    let y = targets.clone();
    let (_, grads) = batch_grads(model, &z, &y);
    let flat: Vec<f64> = grads
        .w1
        .as_slice()
        .iter()
        .chain(grads.b1.as_slice())
        .chain(grads.w2.as_slice())
        .chain(grads.b2.as_slice())
        .copied()
        .collect();

    let count = model.param_count();
    let picks = if samples >= count {
        (0..count).collect::<Vec<_>>()
    } else {
        rng.sample_without_replacement(count, samples)
    };

    let h = 1e-5;
    let mut worst = 0.0_f64;
    for idx in picks {
        let mut plus = model.clone();
        *plus.param_mut(idx) = plus.param(idx) + h;
        let mut minus = model.clone();
        *minus.param_mut(idx) = minus.param(idx) - h;
        let numeric = (batch_loss(&plus, &z, &y) - batch_loss(&minus, &z, &y)) / (2.0 * h);
        let analytic = flat[idx];
        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}
