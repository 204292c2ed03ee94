//! From-scratch multilayer perceptron.
//!
//! Rectified-linear hidden layers with inverted dropout, softmax output,
//! categorical cross-entropy fused with a log-sum-exp stable softmax, and
//! reverse-mode gradients. Training (Adam, early stopping) lives in
//! [`train`].

mod gradcheck;
mod train;

pub use gradcheck::numeric_gradient_check;
pub use train::{
    adam_step, evaluate_model, AdamHyper, AdamOptimizer, EarlyStopper, StopDecision, TrainConfig,
    TrainReport,
};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_distr::{Distribution, Normal};

use crate::linalg::{argmax, log_sum_exp, softmax_in_place, Matrix};
use crate::rng::rng_from_seed;

/// Architecture of one MLP base learner.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpConfig {
    pub input_dim: usize,
    /// 1–3 hidden layers, each 10–100 units wide.
    pub hidden: Vec<usize>,
    /// Dropout rate applied after each hidden activation; `0.0` disables it.
    pub dropout: f64,
    pub num_classes: usize,
    pub init_seed: u64,
}

pub const MIN_HIDDEN_LAYERS: usize = 1;
pub const MAX_HIDDEN_LAYERS: usize = 3;
pub const MIN_HIDDEN_WIDTH: usize = 10;
pub const MAX_HIDDEN_WIDTH: usize = 100;

impl MlpConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        if self.input_dim == 0 {
            return Err(MlpError::InvalidConfig("input dimension must be positive".into()));
        }
        if self.num_classes < 2 {
            return Err(MlpError::InvalidConfig("at least two classes required".into()));
        }
        let layers = self.hidden.len();
        if !(MIN_HIDDEN_LAYERS..=MAX_HIDDEN_LAYERS).contains(&layers) {
            return Err(MlpError::InvalidConfig(alloc::format!(
                "hidden layer count {layers} outside {MIN_HIDDEN_LAYERS}-{MAX_HIDDEN_LAYERS}"
            )));
        }
        for &w in &self.hidden {
            if !(MIN_HIDDEN_WIDTH..=MAX_HIDDEN_WIDTH).contains(&w) {
                return Err(MlpError::InvalidConfig(alloc::format!(
                    "hidden width {w} outside {MIN_HIDDEN_WIDTH}-{MAX_HIDDEN_WIDTH}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(MlpError::InvalidConfig("dropout must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Total number of trainable parameters.
    pub fn param_count(&self) -> usize {
        let mut total = 0;
        let mut fan_in = self.input_dim;
        for &w in &self.hidden {
            total += fan_in * w + w;
            fan_in = w;
        }
        total + fan_in * self.num_classes + self.num_classes
    }
}

/// One dense layer; also used as gradient storage with matching shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `(out, in)` row-major weights.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(out: usize, input: usize) -> Self {
        DenseLayer {
            weights: Matrix::zeros(out, input),
            bias: vec![0.0; out],
        }
    }
}

/// Gradients mirroring a model's layer shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGradients {
    pub layers: Vec<DenseLayer>,
}

/// Result of one loss/gradient evaluation over a batch.
#[derive(Clone, Debug)]
pub struct LossAndGradients {
    /// Mean categorical cross-entropy over the batch.
    pub loss: f64,
    pub gradients: MlpGradients,
    /// Per-sample softmax rows from the same forward pass.
    pub probabilities: Vec<Vec<f64>>,
}

/// Forward-pass mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForwardMode {
    Infer,
    /// Inverted dropout active, masks drawn deterministically from the seed.
    Train { dropout_seed: u64 },
}

/// A feed-forward network: hidden rectified-linear layers plus a softmax
/// output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    config: MlpConfig,
    layers: Vec<DenseLayer>,
}

/// Errors from model construction, evaluation, and training.
#[derive(Clone, Debug, PartialEq)]
pub enum MlpError {
    InvalidConfig(String),
    DimensionMismatch { expected: usize, got: usize },
    NonFiniteInput,
    InvalidLabel { label: usize, classes: usize },
    NonFiniteGradient { layer: usize },
    Diverged { epoch: usize },
    EmptySet,
    InvalidEpsilon,
}

impl fmt::Display for MlpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlpError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            MlpError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            MlpError::NonFiniteInput => write!(f, "non-finite input value"),
            MlpError::InvalidLabel { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            MlpError::NonFiniteGradient { layer } => {
                write!(f, "non-finite gradient in layer {layer}")
            }
            MlpError::Diverged { epoch } => write!(f, "training diverged at epoch {epoch}"),
            MlpError::EmptySet => write!(f, "empty sample set"),
            MlpError::InvalidEpsilon => write!(f, "step size must be positive and finite"),
        }
    }
}

impl core::error::Error for MlpError {}

/// Per-layer dropout scale factors for one batch: `0.0` for dropped units,
/// `1/(1 - rate)` for kept ones, indexed `[hidden_layer][sample][unit]`.
struct DropoutMasks {
    scales: Vec<Vec<Vec<f64>>>,
}

impl DropoutMasks {
    fn generate(config: &MlpConfig, batch_len: usize, seed: u64) -> Option<Self> {
        if config.dropout <= 0.0 {
            return None;
        }
        let rate = config.dropout;
        let keep_scale = 1.0 / (1.0 - rate);
        let mut rng = rng_from_seed(seed);
        let scales = config
            .hidden
            .iter()
            .map(|&width| {
                (0..batch_len)
                    .map(|_| {
                        (0..width)
                            .map(|_| {
                                use rand::Rng;
                                if rng.gen::<f64>() < rate {
                                    0.0
                                } else {
                                    keep_scale
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Some(DropoutMasks { scales })
    }
}

impl MlpModel {
    /// Initializes weights with zero-mean Gaussians scaled for
    /// rectified-linear layers (`sqrt(2/fan_in)`, output `sqrt(1/fan_in)`)
    /// and zero biases; deterministic in the config's seed.
    pub fn init(config: MlpConfig) -> Result<Self, MlpError> {
        config.validate()?;
        let mut rng = rng_from_seed(config.init_seed);
        let mut layers = Vec::with_capacity(config.hidden.len() + 1);
        let mut fan_in = config.input_dim;
        let widths: Vec<(usize, bool)> = config
            .hidden
            .iter()
            .map(|&w| (w, true))
            .chain(core::iter::once((config.num_classes, false)))
            .collect();
        for (out, is_hidden) in widths {
            let std = if is_hidden {
                libm::sqrt(2.0 / fan_in as f64)
            } else {
                libm::sqrt(1.0 / fan_in as f64)
            };
            let dist = Normal::new(0.0, std).expect("positive std");
            let data: Vec<f64> = (0..out * fan_in).map(|_| dist.sample(&mut rng)).collect();
            layers.push(DenseLayer {
                weights: Matrix::from_vec(out, fan_in, data),
                bias: vec![0.0; out],
            });
            fan_in = out;
        }
        Ok(MlpModel { config, layers })
    }

    /// Rebuilds a model from explicit layers, validating the shape chain.
    pub fn from_parts(config: MlpConfig, layers: Vec<DenseLayer>) -> Result<Self, MlpError> {
        config.validate()?;
        if layers.len() != config.hidden.len() + 1 {
            return Err(MlpError::InvalidConfig("layer count mismatch".into()));
        }
        let mut fan_in = config.input_dim;
        for (i, layer) in layers.iter().enumerate() {
            let out = if i < config.hidden.len() {
                config.hidden[i]
            } else {
                config.num_classes
            };
            if layer.weights.rows() != out
                || layer.weights.cols() != fan_in
                || layer.bias.len() != out
            {
                return Err(MlpError::InvalidConfig(alloc::format!(
                    "layer {i} shape mismatch"
                )));
            }
            if !layer.weights.iter_all_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(MlpError::InvalidConfig(alloc::format!(
                    "layer {i} has non-finite parameters"
                )));
            }
            fan_in = out;
        }
        Ok(MlpModel { config, layers })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.config.param_count()
    }

    pub fn zero_gradients(&self) -> MlpGradients {
        MlpGradients {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
        }
    }

    fn check_batch(&self, batch: &[Vec<f64>]) -> Result<(), MlpError> {
        if batch.is_empty() {
            return Err(MlpError::EmptySet);
        }
        for row in batch {
            if row.len() != self.config.input_dim {
                return Err(MlpError::DimensionMismatch {
                    expected: self.config.input_dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MlpError::NonFiniteInput);
            }
        }
        Ok(())
    }

    /// Logits for one sample; caches pre-activations and post-dropout
    /// activations when given.
    fn forward_sample(
        &self,
        x: &[f64],
        masks: Option<(&DropoutMasks, usize)>,
        mut cache: Option<(&mut Vec<Vec<f64>>, &mut Vec<Vec<f64>>)>,
    ) -> Vec<f64> {
        let hidden_count = self.config.hidden.len();
        let mut activation: Vec<f64> = x.to_vec();
        for l in 0..hidden_count {
            let layer = &self.layers[l];
            let mut z = vec![0.0; layer.weights.rows()];
            layer.weights.matvec(&activation, &mut z);
            for (zv, b) in z.iter_mut().zip(layer.bias.iter()) {
                *zv += b;
            }
            let mut h: Vec<f64> = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
            if let Some((m, sample)) = masks {
                for (hv, s) in h.iter_mut().zip(m.scales[l][sample].iter()) {
                    *hv *= s;
                }
            }
            if let Some((pre, post)) = cache.as_mut() {
                pre.push(z);
                post.push(h.clone());
            }
            activation = h;
        }
        let out = &self.layers[hidden_count];
        let mut logits = vec![0.0; out.weights.rows()];
        out.weights.matvec(&activation, &mut logits);
        for (lv, b) in logits.iter_mut().zip(out.bias.iter()) {
            *lv += b;
        }
        logits
    }

    /// Per-sample class-probability rows. Rows are strictly positive and sum
    /// to 1; dropout is active only in train mode (inverted scaling, so
    /// inference needs no rescale).
    pub fn forward(
        &self,
        batch: &[Vec<f64>],
        mode: ForwardMode,
    ) -> Result<Vec<Vec<f64>>, MlpError> {
        self.check_batch(batch)?;
        let masks = match mode {
            ForwardMode::Infer => None,
            ForwardMode::Train { dropout_seed } => {
                DropoutMasks::generate(&self.config, batch.len(), dropout_seed)
            }
        };
        let rows = batch
            .iter()
            .enumerate()
            .map(|(s, x)| {
                let mut logits = self.forward_sample(x, masks.as_ref().map(|m| (m, s)), None);
                softmax_in_place(&mut logits);
                logits
            })
            .collect();
        Ok(rows)
    }

    /// Mean cross-entropy of the batch without computing gradients.
    pub fn loss_only(&self, batch: &[Vec<f64>], labels: &[usize]) -> Result<f64, MlpError> {
        self.check_batch(batch)?;
        self.check_labels(batch, labels)?;
        let mut sum = 0.0;
        for (x, &y) in batch.iter().zip(labels.iter()) {
            let logits = self.forward_sample(x, None, None);
            sum += log_sum_exp(&logits) - logits[y];
        }
        Ok(sum / batch.len() as f64)
    }

    fn check_labels(&self, batch: &[Vec<f64>], labels: &[usize]) -> Result<(), MlpError> {
        if labels.len() != batch.len() {
            return Err(MlpError::DimensionMismatch {
                expected: batch.len(),
                got: labels.len(),
            });
        }
        for &y in labels {
            if y >= self.config.num_classes {
                return Err(MlpError::InvalidLabel {
                    label: y,
                    classes: self.config.num_classes,
                });
            }
        }
        Ok(())
    }

    /// Mean cross-entropy loss and reverse-mode gradients for the batch.
    ///
    /// `dropout_seed` switches on inverted dropout with deterministic masks;
    /// pass `None` for the no-dropout path used by gradient checks.
    pub fn loss_and_gradients(
        &self,
        batch: &[Vec<f64>],
        labels: &[usize],
        dropout_seed: Option<u64>,
    ) -> Result<LossAndGradients, MlpError> {
        self.check_batch(batch)?;
        self.check_labels(batch, labels)?;
        let n = batch.len();
        let hidden_count = self.config.hidden.len();
        let masks =
            dropout_seed.and_then(|seed| DropoutMasks::generate(&self.config, n, seed));

        let mut grads = self.zero_gradients();
        let mut loss_sum = 0.0;
        let mut probabilities = Vec::with_capacity(n);

        for (s, (x, &y)) in batch.iter().zip(labels.iter()).enumerate() {
            let mut pre = Vec::with_capacity(hidden_count);
            let mut post = Vec::with_capacity(hidden_count);
            let logits = self.forward_sample(
                x,
                masks.as_ref().map(|m| (m, s)),
                Some((&mut pre, &mut post)),
            );
            loss_sum += log_sum_exp(&logits) - logits[y];
            let mut probs = logits;
            softmax_in_place(&mut probs);

            // softmax cross-entropy: d(loss)/d(logit) = probs - one_hot
            let mut delta: Vec<f64> = probs.clone();
            delta[y] -= 1.0;
            probabilities.push(probs);

            for l in (0..=hidden_count).rev() {
                let input: &[f64] = if l == 0 { x } else { &post[l - 1] };
                grads.layers[l].weights.add_scaled_outer(&delta, input, 1.0);
                for (g, d) in grads.layers[l].bias.iter_mut().zip(delta.iter()) {
                    *g += d;
                }
                if l == 0 {
                    break;
                }
                let mut upstream = vec![0.0; self.layers[l].weights.cols()];
                self.layers[l].weights.matvec_transpose(&delta, &mut upstream);
                // back through dropout scaling, then the rectifier gate
                if let Some(m) = masks.as_ref() {
                    for (u, sc) in upstream.iter_mut().zip(m.scales[l - 1][s].iter()) {
                        *u *= sc;
                    }
                }
                for (u, z) in upstream.iter_mut().zip(pre[l - 1].iter()) {
                    if *z <= 0.0 {
                        *u = 0.0;
                    }
                }
                delta = upstream;
            }
        }

        let inv_n = 1.0 / n as f64;
        for layer in grads.layers.iter_mut() {
            for g in layer.weights.data_mut() {
                *g *= inv_n;
            }
            for g in layer.bias.iter_mut() {
                *g *= inv_n;
            }
        }
        Ok(LossAndGradients {
            loss: loss_sum * inv_n,
            gradients: grads,
            probabilities,
        })
    }

    /// Predicted class indices (argmax, lowest index on ties).
    pub fn predict_labels(&self, batch: &[Vec<f64>]) -> Result<Vec<usize>, MlpError> {
        Ok(self
            .forward(batch, ForwardMode::Infer)?
            .iter()
            .map(|row| argmax(row))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> MlpConfig {
        MlpConfig {
            input_dim: 4,
            hidden: vec![10],
            dropout: 0.0,
            num_classes: 3,
            init_seed: 1,
        }
    }

    fn batch(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn parameter_count_matches_shape_arithmetic() {
        let cfg = MlpConfig {
            input_dim: 11,
            hidden: vec![64],
            dropout: 0.0,
            num_classes: 6,
            init_seed: 0,
        };
        assert_eq!(cfg.param_count(), 11 * 64 + 64 + 64 * 6 + 6);
        assert_eq!(cfg.param_count(), 1222);
        let model = MlpModel::init(cfg).unwrap();
        assert_eq!(model.param_count(), 1222);
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = MlpModel::init(small_config()).unwrap();
        let b = MlpModel::init(small_config()).unwrap();
        assert_eq!(a, b);
        let mut cfg = small_config();
        cfg.init_seed = 2;
        let c = MlpModel::init(cfg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn config_bounds_are_enforced() {
        let mut cfg = small_config();
        cfg.hidden = vec![10, 10, 10, 10];
        assert!(MlpModel::init(cfg).is_err());
        let mut cfg = small_config();
        cfg.hidden = vec![9];
        assert!(MlpModel::init(cfg).is_err());
        let mut cfg = small_config();
        cfg.hidden = vec![101];
        assert!(MlpModel::init(cfg).is_err());
        let mut cfg = small_config();
        cfg.dropout = 1.0;
        assert!(MlpModel::init(cfg).is_err());
    }

    #[test]
    fn zero_weight_model_outputs_uniform_rows() {
        let cfg = small_config();
        let mut model = MlpModel::init(cfg).unwrap();
        for layer in model.layers_mut() {
            layer.weights.data_mut().fill(0.0);
            layer.bias.fill(0.0);
        }
        let rows = model.forward(&batch(5, 4, 9), ForwardMode::Infer).unwrap();
        for row in rows {
            for p in row {
                assert_eq!(p, 1.0 / 3.0);
            }
        }
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let model = MlpModel::init(small_config()).unwrap();
        let rows = model.forward(&batch(32, 4, 3), ForwardMode::Infer).unwrap();
        for row in rows {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn zero_dropout_in_train_mode_matches_inference() {
        let model = MlpModel::init(small_config()).unwrap();
        let xs = batch(8, 4, 5);
        let infer = model.forward(&xs, ForwardMode::Infer).unwrap();
        let train = model
            .forward(&xs, ForwardMode::Train { dropout_seed: 123 })
            .unwrap();
        assert_eq!(infer, train);
    }

    #[test]
    fn dropout_is_deterministic_per_seed_and_active_in_train_mode() {
        let mut cfg = small_config();
        cfg.dropout = 0.5;
        let model = MlpModel::init(cfg).unwrap();
        let xs = batch(16, 4, 7);
        let a = model.forward(&xs, ForwardMode::Train { dropout_seed: 1 }).unwrap();
        let b = model.forward(&xs, ForwardMode::Train { dropout_seed: 1 }).unwrap();
        assert_eq!(a, b);
        let c = model.forward(&xs, ForwardMode::Train { dropout_seed: 2 }).unwrap();
        assert_ne!(a, c);
        let infer = model.forward(&xs, ForwardMode::Infer).unwrap();
        assert_ne!(a, infer);
    }

    #[test]
    fn uniform_prediction_loss_is_log_class_count() {
        let mut model = MlpModel::init(small_config()).unwrap();
        for layer in model.layers_mut() {
            layer.weights.data_mut().fill(0.0);
            layer.bias.fill(0.0);
        }
        let xs = batch(6, 4, 11);
        let ys = vec![0, 1, 2, 0, 1, 2];
        let out = model.loss_and_gradients(&xs, &ys, None).unwrap();
        assert!((out.loss - libm::log(3.0)).abs() < 1e-12);
    }

    #[test]
    fn duplicated_batch_leaves_loss_and_gradients_unchanged() {
        let model = MlpModel::init(small_config()).unwrap();
        let xs = batch(5, 4, 13);
        let ys = vec![0, 1, 2, 1, 0];
        let single = model.loss_and_gradients(&xs, &ys, None).unwrap();
        let mut xs2 = xs.clone();
        xs2.extend_from_slice(&xs);
        let mut ys2 = ys.clone();
        ys2.extend_from_slice(&ys);
        let doubled = model.loss_and_gradients(&xs2, &ys2, None).unwrap();
        assert!((single.loss - doubled.loss).abs() < 1e-12);
        for (a, b) in single
            .gradients
            .layers
            .iter()
            .zip(doubled.gradients.layers.iter())
        {
            for (ga, gb) in a.weights.data().iter().zip(b.weights.data().iter()) {
                assert!((ga - gb).abs() < 1e-12);
            }
            for (ga, gb) in a.bias.iter().zip(b.bias.iter()) {
                assert!((ga - gb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let model = MlpModel::init(small_config()).unwrap();
        let xs = vec![vec![0.0, f64::INFINITY, 0.0, 0.0]];
        assert_eq!(
            model.forward(&xs, ForwardMode::Infer),
            Err(MlpError::NonFiniteInput)
        );
    }
}
