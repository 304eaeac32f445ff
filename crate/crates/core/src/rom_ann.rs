//! Non-intrusive surrogate: a two-hidden-layer sigmoid network regressing POD
//! projection coefficients on the parameter tuple.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{Field, InnerProduct, Model};
use crate::geometry::ParameterTuple;
use crate::pod::ReducedBasis;
use crate::sampling::{split_indices, ParameterRanges};

/// Layer widths `d → H → H → N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

impl NetworkConfig {
    pub fn new(inputs: usize, hidden: usize, outputs: usize) -> Result<Self> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::InvalidParameter(format!(
                "network widths must be positive, got {inputs} -> {hidden} -> {hidden} -> {outputs}"
            )));
        }
        Ok(NetworkConfig { inputs, hidden, outputs })
    }

    pub fn n_params(&self) -> usize {
        let (d, h, n) = (self.inputs, self.hidden, self.outputs);
        h * d + h + h * h + h + n * h + n
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights and biases of the three affine stages.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub config: NetworkConfig,
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub w3: DMatrix<f64>,
    pub b3: DVector<f64>,
}

impl NetworkParams {
    pub fn zeros(config: NetworkConfig) -> Self {
        let (d, h, n) = (config.inputs, config.hidden, config.outputs);
        NetworkParams {
            config,
            w1: DMatrix::zeros(h, d),
            b1: DVector::zeros(h),
            w2: DMatrix::zeros(h, h),
            b2: DVector::zeros(h),
            w3: DMatrix::zeros(n, h),
            b3: DVector::zeros(n),
        }
    }

    /// Uniform in `±1/√fan_in` for every weight and bias of a layer.
    pub fn init(config: NetworkConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros(config);
        let fan_in = [config.inputs, config.hidden, config.hidden];
        for (k, s) in p.slices_mut().into_iter().enumerate() {
            let a = 1.0 / (fan_in[k / 2] as f64).sqrt();
            s.iter_mut().for_each(|x| *x = rng.random_range(-a..a));
        }
        p
    }

    fn slices(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice(),
            self.b1.as_slice(),
            self.w2.as_slice(),
            self.b2.as_slice(),
            self.w3.as_slice(),
            self.b3.as_slice(),
        ]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            self.b2.as_mut_slice(),
            self.w3.as_mut_slice(),
            self.b3.as_mut_slice(),
        ]
    }

    /// All parameters in a fixed order (column-major within each matrix).
    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn from_flat(config: NetworkConfig, flat: &[f64]) -> Result<Self> {
        if flat.len() != config.n_params() {
            return Err(Error::DimensionMismatch { expected: config.n_params(), found: flat.len() });
        }
        let mut p = Self::zeros(config);
        let mut off = 0;
        for s in p.slices_mut() {
            s.copy_from_slice(&flat[off..off + s.len()]);
            off += s.len();
        }
        Ok(p)
    }

    /// One forward pass on a normalized input.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        // column-major axpy form: z = b + Σ_j W[:, j] a_j
        fn stage(w: &DMatrix<f64>, b: &DVector<f64>, a: &[f64]) -> Vec<f64> {
            let mut z = b.as_slice().to_vec();
            for (col, &aj) in w.as_slice().chunks_exact(w.nrows()).zip(a) {
                z.iter_mut().zip(col).for_each(|(zi, wij)| *zi += wij * aj);
            }
            z
        }
        let mut a1 = stage(&self.w1, &self.b1, x);
        a1.iter_mut().for_each(|v| *v = sigmoid(*v));
        let mut a2 = stage(&self.w2, &self.b2, &a1);
        a2.iter_mut().for_each(|v| *v = sigmoid(*v));
        stage(&self.w3, &self.b3, &a2)
    }

    /// Row-wise forward pass: `x` is `B×d`.
    fn forward_batch(&self, x: &DMatrix<f64>) -> [DMatrix<f64>; 3] {
        let affine = |a: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>| {
            let mut z = a * w.transpose();
            for mut row in z.row_iter_mut() {
                row += b.transpose();
            }
            z
        };
        let a1 = affine(x, &self.w1, &self.b1).map(sigmoid);
        let a2 = affine(&a1, &self.w2, &self.b2).map(sigmoid);
        let y = affine(&a2, &self.w3, &self.b3);
        [a1, a2, y]
    }

    /// Mean squared error over all entries of a batch.
    pub fn mse(&self, x: &DMatrix<f64>, target: &DMatrix<f64>) -> f64 {
        let [_, _, y] = self.forward_batch(x);
        (y - target).norm_squared() / target.len() as f64
    }

    /// Loss and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, x: &DMatrix<f64>, target: &DMatrix<f64>) -> (f64, NetworkParams) {
        let [a1, a2, y] = self.forward_batch(x);
        let diff = y - target;
        let loss = diff.norm_squared() / target.len() as f64;
        let dy = diff * (2.0 / target.len() as f64);
        let colsum = |m: &DMatrix<f64>| DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()));
        let mut g = NetworkParams::zeros(self.config);
        g.w3 = dy.transpose() * &a2;
        g.b3 = colsum(&dy);
        let dz2 = (&dy * &self.w3).component_mul(&a2.map(|a| a * (1.0 - a)));
        g.w2 = dz2.transpose() * &a1;
        g.b2 = colsum(&dz2);
        let dz1 = (&dz2 * &self.w2).component_mul(&a1.map(|a| a * (1.0 - a)));
        g.w1 = dz1.transpose() * x;
        g.b1 = colsum(&dz1);
        (loss, g)
    }
}

/// Optimizer and stopping settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Mini-batch size; `None` means full batch up to 500 training pairs and 64 beyond.
    pub batch_size: Option<usize>,
    pub max_epochs: usize,
    /// Epochs without a new best validation error before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 1e-3, batch_size: None, max_epochs: 5000, patience: 50, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.batch_size == Some(0) || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("batch size, max epochs and patience must be positive".into()));
        }
        Ok(())
    }

    pub fn batch_for(&self, n_train: usize) -> usize {
        self.batch_size.unwrap_or(if n_train <= 500 { n_train } else { 64 }).min(n_train).max(1)
    }
}

/// Affine maps between raw and network units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    pub output_mean: Vec<f64>,
    pub output_std: Vec<f64>,
}

impl Normalization {
    pub fn input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.input_min.iter().zip(&self.input_max)).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect()
    }

    pub fn output(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.output_mean.iter().zip(&self.output_std)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn output_inverse(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(self.output_mean.iter().zip(&self.output_std)).map(|(v, (m, s))| v * s + m).collect()
    }
}

/// Tuples with their projection coefficients and a fixed train/validation split.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub model: Model,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub normalization: Normalization,
}

impl Dataset {
    /// Targets are the `X`-orthogonal projections of `fields` onto `basis`.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        model: Model,
        ranges: &ParameterRanges,
        tuples: &[ParameterTuple],
        fields: &[Vec<f64>],
        basis: &ReducedBasis,
        ip: &InnerProduct,
        train_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        if tuples.len() != fields.len() {
            return Err(Error::DimensionMismatch { expected: tuples.len(), found: fields.len() });
        }
        let targets = fields.iter().map(|f| basis.project(ip, f).map(|c| c.0)).collect::<Result<Vec<_>>>()?;
        let inputs: Vec<Vec<f64>> = tuples.iter().map(|t| t.active_values()).collect();
        Self::from_pairs(model, ranges, inputs, targets, train_fraction, seed)
    }

    pub fn from_pairs(
        model: Model,
        ranges: &ParameterRanges,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
        train_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), found: targets.len() });
        }
        let d = ranges.active().len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        let n_out = targets.first().map_or(0, Vec::len);
        if n_out == 0 || targets.iter().any(|t| t.len() != n_out) {
            return Err(Error::InvalidData("targets must be nonempty and of equal length".into()));
        }
        let (train, validation) = split_indices(inputs.len(), train_fraction, seed)?;
        let mut mean = vec![0.0; n_out];
        for &i in &train {
            mean.iter_mut().zip(&targets[i]).for_each(|(m, v)| *m += v / train.len() as f64);
        }
        let mut std = vec![0.0; n_out];
        for &i in &train {
            std.iter_mut().zip(targets[i].iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m).powi(2));
        }
        let scale: f64 = mean.iter().map(|m| m.abs()).fold(0.0, f64::max);
        for s in &mut std {
            *s = (*s / train.len() as f64).sqrt();
            if !(*s > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
                *s = 1.0;
            }
        }
        let normalization = Normalization {
            input_min: ranges.bounds().iter().map(|b| b.0).collect(),
            input_max: ranges.bounds().iter().map(|b| b.1).collect(),
            output_mean: mean,
            output_std: std,
        };
        Ok(Dataset { model, inputs, targets, train, validation, normalization })
    }

    pub fn n_inputs(&self) -> usize {
        self.normalization.input_min.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.normalization.output_mean.len()
    }

    /// Normalized inputs and standardized targets of the given rows.
    pub fn matrices(&self, rows: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        let x = DMatrix::from_fn(rows.len(), self.n_inputs(), |r, c| {
            let n = &self.normalization;
            (self.inputs[rows[r]][c] - n.input_min[c]) / (n.input_max[c] - n.input_min[c])
        });
        let y = DMatrix::from_fn(rows.len(), self.n_outputs(), |r, c| {
            let n = &self.normalization;
            (self.targets[rows[r]][c] - n.output_mean[c]) / n.output_std[c]
        });
        (x, y)
    }
}

/// Per-epoch errors, in standardized units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
    /// Smallest training error so far.
    pub best_train_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub initial_train_mse: f64,
    pub initial_validation_mse: f64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters are returned, `0` meaning the initialization.
    pub best_epoch: usize,
    pub best_validation_mse: f64,
    pub stopped_early: bool,
}

impl TrainingHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_mse,validation_mse,best_train_mse\n");
        for e in &self.epochs {
            s.push_str(&format!("{},{:e},{:e},{:e}\n", e.epoch, e.train_mse, e.validation_mse, e.best_train_mse));
        }
        s
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut NetworkParams, grad: &NetworkParams, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let mut off = 0;
        for (p, g) in params.slices_mut().into_iter().zip(grad.slices()) {
            for (i, (x, &gi)) in p.iter_mut().zip(g).enumerate() {
                let m = &mut self.m[off + i];
                let v = &mut self.v[off + i];
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * gi;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * gi * gi;
                *x -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
            }
            off += g.len();
        }
    }
}

/// Adam on the training pairs with early stopping on the validation error; returns the best checkpoint.
pub fn train_network(config: NetworkConfig, tcfg: &TrainConfig, data: &Dataset) -> Result<(NetworkParams, TrainingHistory)> {
    tcfg.validate()?;
    if config.inputs != data.n_inputs() || config.outputs != data.n_outputs() {
        return Err(Error::DimensionMismatch { expected: config.inputs + config.outputs, found: data.n_inputs() + data.n_outputs() });
    }
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(Error::InvalidData("training needs nonempty training and validation splits".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut params = NetworkParams::init(config, rng.random());
    let (xt, yt) = data.matrices(&data.train);
    let (xv, yv) = data.matrices(&data.validation);
    let batch = tcfg.batch_for(data.train.len());
    let mut adam = Adam::new(config.n_params());
    let initial_train = params.mse(&xt, &yt);
    let initial_val = params.mse(&xv, &yv);
    let mut history = TrainingHistory {
        initial_train_mse: initial_train,
        initial_validation_mse: initial_val,
        epochs: Vec::new(),
        best_epoch: 0,
        best_validation_mse: initial_val,
        stopped_early: false,
    };
    let mut best = params.clone();
    let mut best_train = initial_train;
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut since_best = 0;
    for epoch in 1..=tcfg.max_epochs {
        if batch < order.len() {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            let (loss, grad) = if chunk.len() == order.len() {
                params.loss_and_gradient(&xt, &yt)
            } else {
                let xb = DMatrix::from_fn(chunk.len(), xt.ncols(), |r, c| xt[(chunk[r], c)]);
                let yb = DMatrix::from_fn(chunk.len(), yt.ncols(), |r, c| yt[(chunk[r], c)]);
                params.loss_and_gradient(&xb, &yb)
            };
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            adam.step(&mut params, &grad, tcfg.learning_rate);
        }
        let train_mse = params.mse(&xt, &yt);
        let validation_mse = params.mse(&xv, &yv);
        if !(train_mse.is_finite() && validation_mse.is_finite()) {
            return Err(Error::Diverged { epoch, loss: train_mse });
        }
        best_train = best_train.min(train_mse);
        history.epochs.push(EpochRecord { epoch, train_mse, validation_mse, best_train_mse: best_train });
        if validation_mse < history.best_validation_mse {
            history.best_validation_mse = validation_mse;
            history.best_epoch = epoch;
            best = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= tcfg.patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, history))
}

/// A trained network together with everything needed to evaluate it on raw tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnModel {
    pub model: Model,
    pub ranges: ParameterRanges,
    pub normalization: Normalization,
    pub params: NetworkParams,
    pub basis: ReducedBasis,
}

/// Network output for one tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnPrediction {
    pub coefficients: Vec<f64>,
    pub warnings: Vec<String>,
}

impl AnnModel {
    /// Coefficients at a tuple: normalize, one forward pass, de-standardize.
    pub fn predict(&self, tuple: &ParameterTuple) -> Result<AnnPrediction> {
        if tuple.active() != self.ranges.active() {
            return Err(Error::InvalidParameter("tuple activates different parameters than the network".into()));
        }
        let warnings = if self.ranges.contains(tuple) {
            Vec::new()
        } else {
            vec![format!("tuple {:?} lies outside the training box", tuple.active_values())]
        };
        let x = self.normalization.input(&tuple.active_values());
        let coefficients = self.normalization.output_inverse(&self.params.forward(&x));
        Ok(AnnPrediction { coefficients, warnings })
    }

    pub fn reconstruct(&self, coefficients: &[f64]) -> Field {
        Field::new(self.model.rank(), self.basis.reconstruct(coefficients))
    }
}
