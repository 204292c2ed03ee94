//! Bootstrap pool of MLP base learners and the attention-weighted stacking
//! combiner.
//!
//! Pool training draws, for each learner, a bootstrap resample of the
//! training set and a randomly sampled architecture, then trains
//! independently; every per-learner seed derives from the pool's master
//! seed, so serial and concurrent execution produce identical pools.

mod asen;

pub use asen::{
    asen_forward, asen_loss_and_gradients, asen_numeric_gradient_check, train_asen, AsenForward,
    AsenGradients, AsenModel, AttentionTrace, ASEN_HIDDEN_WIDTH,
};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::dataset::bootstrap_sample;
use crate::mlp::{
    evaluate_model, train_mlp, ForwardMode, MlpConfig, MlpError, MlpModel, TrainConfig,
    TrainReport, MAX_HIDDEN_LAYERS, MAX_HIDDEN_WIDTH, MIN_HIDDEN_LAYERS, MIN_HIDDEN_WIDTH,
};
use crate::rng::{derive_seed, rng_from_seed};

/// Errors from pool construction, stacking, and combiner training.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleError {
    InvalidConfig(String),
    Mlp(MlpError),
    /// A learner diverged twice (original seed and one retry).
    LearnerFailed { index: usize },
    ShapeMismatch { expected: usize, got: usize },
    EmptyPool,
    NonFiniteValue,
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            EnsembleError::Mlp(e) => write!(f, "base learner error: {e}"),
            EnsembleError::LearnerFailed { index } => {
                write!(f, "learner {index} diverged after one retry")
            }
            EnsembleError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            EnsembleError::EmptyPool => write!(f, "pool contains no learners"),
            EnsembleError::NonFiniteValue => write!(f, "non-finite intermediate value"),
        }
    }
}

impl core::error::Error for EnsembleError {}

impl From<MlpError> for EnsembleError {
    fn from(e: MlpError) -> Self {
        EnsembleError::Mlp(e)
    }
}

/// Sampling ranges for base-learner architectures (inclusive bounds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArchRanges {
    pub layers: (usize, usize),
    pub width: (usize, usize),
    pub dropout: (f64, f64),
}

impl Default for ArchRanges {
    fn default() -> Self {
        ArchRanges {
            layers: (1, 3),
            width: (10, 100),
            dropout: (0.2, 0.6),
        }
    }
}

impl ArchRanges {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let (l_lo, l_hi) = self.layers;
        let (w_lo, w_hi) = self.width;
        let (d_lo, d_hi) = self.dropout;
        let ok = l_lo >= MIN_HIDDEN_LAYERS
            && l_hi <= MAX_HIDDEN_LAYERS
            && l_lo <= l_hi
            && w_lo >= MIN_HIDDEN_WIDTH
            && w_hi <= MAX_HIDDEN_WIDTH
            && w_lo <= w_hi
            && d_lo >= 0.2
            && d_hi <= 0.6
            && d_lo <= d_hi;
        if ok {
            Ok(())
        } else {
            Err(EnsembleError::InvalidConfig(
                "architecture ranges outside 1-3 layers / 10-100 width / 0.2-0.6 dropout".into(),
            ))
        }
    }
}

/// Uniformly samples an architecture within the ranges: layer count, then
/// one width per layer, then the dropout rate. The config's init seed is
/// derived from the same sampling seed.
pub fn sample_architecture(
    input_dim: usize,
    num_classes: usize,
    ranges: &ArchRanges,
    seed: u64,
) -> MlpConfig {
    let mut rng = rng_from_seed(seed);
    let layers = rng.gen_range(ranges.layers.0..=ranges.layers.1);
    let hidden: Vec<usize> = (0..layers)
        .map(|_| rng.gen_range(ranges.width.0..=ranges.width.1))
        .collect();
    let dropout = rng.gen_range(ranges.dropout.0..=ranges.dropout.1);
    MlpConfig {
        input_dim,
        hidden,
        dropout,
        num_classes,
        init_seed: derive_seed(seed, 0x494E4954), // "INIT"
    }
}

/// Pool-level configuration: learner count, sampling ranges, shared
/// training settings, and the master seed all sub-seeds derive from.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolConfig {
    pub num_learners: usize,
    pub ranges: ArchRanges,
    pub train: TrainConfig,
    pub master_seed: u64,
}

impl PoolConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.num_learners < 2 {
            return Err(EnsembleError::InvalidConfig(
                "pool needs at least two learners".into(),
            ));
        }
        self.ranges.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

/// One trained base learner with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedLearner {
    pub model: MlpModel,
    pub bootstrap_seed: u64,
    pub val_accuracy: f64,
    pub report: TrainReport,
}

/// A pool of trained base learners sharing input dimension and class count.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseLearnerPool {
    learners: Vec<TrainedLearner>,
    input_dim: usize,
    num_classes: usize,
}

impl BaseLearnerPool {
    pub fn from_learners(learners: Vec<TrainedLearner>) -> Result<Self, EnsembleError> {
        let first = learners.first().ok_or(EnsembleError::EmptyPool)?;
        let input_dim = first.model.config().input_dim;
        let num_classes = first.model.config().num_classes;
        for l in &learners {
            if l.model.config().input_dim != input_dim {
                return Err(EnsembleError::ShapeMismatch {
                    expected: input_dim,
                    got: l.model.config().input_dim,
                });
            }
            if l.model.config().num_classes != num_classes {
                return Err(EnsembleError::ShapeMismatch {
                    expected: num_classes,
                    got: l.model.config().num_classes,
                });
            }
        }
        Ok(BaseLearnerPool {
            learners,
            input_dim,
            num_classes,
        })
    }

    pub fn learners(&self) -> &[TrainedLearner] {
        &self.learners
    }

    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }
}

const LEARNER_STREAM: u64 = 0x504F_4F4C; // "POOL"
const BOOTSTRAP_SUBSTREAM: u64 = 1;
const ARCH_SUBSTREAM: u64 = 2;
const SHUFFLE_SUBSTREAM: u64 = 3;
const RETRY_SUBSTREAM: u64 = 0xDEAD;

fn attempt_learner(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    val_x: &[Vec<f64>],
    val_y: &[usize],
    cfg: &PoolConfig,
    learner_seed: u64,
) -> Result<TrainedLearner, EnsembleError> {
    let bootstrap_seed = derive_seed(learner_seed, BOOTSTRAP_SUBSTREAM);
    let draw = bootstrap_sample(train_x.len(), bootstrap_seed)
        .map_err(|_| EnsembleError::InvalidConfig("empty training set".into()))?;
    let boot_x: Vec<Vec<f64>> = draw.iter().map(|&i| train_x[i].clone()).collect();
    let boot_y: Vec<usize> = draw.iter().map(|&i| train_y[i]).collect();

    let arch_seed = derive_seed(learner_seed, ARCH_SUBSTREAM);
    let config = sample_architecture(
        train_x[0].len(),
        cfg.ranges_num_classes(val_y, train_y),
        &cfg.ranges,
        arch_seed,
    );
    let model = MlpModel::init(config)?;
    let train_cfg = TrainConfig {
        shuffle_seed: derive_seed(learner_seed, SHUFFLE_SUBSTREAM),
        ..cfg.train
    };
    let (model, report) = train_mlp(model, &boot_x, &boot_y, val_x, val_y, &train_cfg)?;
    let (_, val_accuracy) = evaluate_model(&model, val_x, val_y)?;
    Ok(TrainedLearner {
        model,
        bootstrap_seed,
        val_accuracy,
        report,
    })
}

impl PoolConfig {
    fn ranges_num_classes(&self, val_y: &[usize], train_y: &[usize]) -> usize {
        // class count is the highest label seen plus one
        train_y
            .iter()
            .chain(val_y.iter())
            .copied()
            .max()
            .map_or(2, |m| (m + 1).max(2))
    }
}

/// Trains learner `index` of the pool: derive its seed, draw its bootstrap
/// resample, sample its architecture, train against the shared validation
/// set. Divergence triggers one retry under a re-derived seed.
///
/// Pure in `(data, cfg, index)`, so learners may be trained concurrently
/// and assembled in index order with results identical to a serial run.
pub fn train_single_learner(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    val_x: &[Vec<f64>],
    val_y: &[usize],
    cfg: &PoolConfig,
    index: usize,
) -> Result<TrainedLearner, EnsembleError> {
    let learner_seed = derive_seed(derive_seed(cfg.master_seed, LEARNER_STREAM), index as u64);
    match attempt_learner(train_x, train_y, val_x, val_y, cfg, learner_seed) {
        Ok(l) => Ok(l),
        Err(EnsembleError::Mlp(MlpError::Diverged { .. })) => {
            let retry_seed = derive_seed(learner_seed, RETRY_SUBSTREAM);
            attempt_learner(train_x, train_y, val_x, val_y, cfg, retry_seed)
                .map_err(|_| EnsembleError::LearnerFailed { index })
        }
        Err(e) => Err(e),
    }
}

/// Serial pool training; see [`train_single_learner`] for the per-learner
/// contract.
pub fn train_pool(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    val_x: &[Vec<f64>],
    val_y: &[usize],
    cfg: &PoolConfig,
) -> Result<BaseLearnerPool, EnsembleError> {
    cfg.validate()?;
    if train_x.is_empty() || val_x.is_empty() {
        return Err(EnsembleError::InvalidConfig("empty split".into()));
    }
    let learners = (0..cfg.num_learners)
        .map(|i| train_single_learner(train_x, train_y, val_x, val_y, cfg, i))
        .collect::<Result<Vec<_>, _>>()?;
    BaseLearnerPool::from_learners(learners)
}

/// Stacked per-learner probability rows: `samples x learners x classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct StackedProbs {
    data: Vec<f64>,
    samples: usize,
    learners: usize,
    classes: usize,
}

impl StackedProbs {
    pub fn from_flat(
        data: Vec<f64>,
        samples: usize,
        learners: usize,
        classes: usize,
    ) -> Result<Self, EnsembleError> {
        if data.len() != samples * learners * classes {
            return Err(EnsembleError::ShapeMismatch {
                expected: samples * learners * classes,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(EnsembleError::NonFiniteValue);
        }
        Ok(StackedProbs {
            data,
            samples,
            learners,
            classes,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn learners(&self) -> usize {
        self.learners
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Learner `i`'s probability row for sample `s`.
    pub fn row(&self, s: usize, i: usize) -> &[f64] {
        let start = (s * self.learners + i) * self.classes;
        &self.data[start..start + self.classes]
    }
}

/// Runs every learner over the batch (inference mode) and stacks the
/// softmax rows into a `samples x learners x classes` tensor.
pub fn stack_predictions(
    pool: &BaseLearnerPool,
    batch: &[Vec<f64>],
) -> Result<StackedProbs, EnsembleError> {
    if pool.is_empty() {
        return Err(EnsembleError::EmptyPool);
    }
    let m = batch.len();
    let b = pool.len();
    let c = pool.num_classes();
    let mut data = alloc::vec![0.0; m * b * c];
    for (i, learner) in pool.learners().iter().enumerate() {
        let rows = learner.model.forward(batch, ForwardMode::Infer)?;
        for (s, row) in rows.iter().enumerate() {
            let start = (s * b + i) * c;
            data[start..start + c].copy_from_slice(row);
        }
    }
    StackedProbs::from_flat(data, m, b, c)
}

/// Grid of architectures for exhaustive hyperparameter search.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub layer_counts: Vec<usize>,
    pub widths: Vec<usize>,
    pub dropouts: Vec<f64>,
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub config: MlpConfig,
    pub val_accuracy: f64,
    pub val_loss: f64,
    pub param_count: usize,
}

/// Trains every `layers x width x dropout` combination once with a fixed
/// derived seed and ranks by validation accuracy, then lower validation
/// loss, then fewer parameters.
pub fn grid_search(
    grid: &GridSpec,
    train_x: &[Vec<f64>],
    train_y: &[usize],
    val_x: &[Vec<f64>],
    val_y: &[usize],
    base: &TrainConfig,
    num_classes: usize,
    seed: u64,
) -> Result<Vec<GridResult>, EnsembleError> {
    if grid.layer_counts.is_empty() || grid.widths.is_empty() || grid.dropouts.is_empty() {
        return Err(EnsembleError::InvalidConfig("empty grid".into()));
    }
    let mut results = Vec::new();
    let mut combo = 0u64;
    for &layers in &grid.layer_counts {
        for &width in &grid.widths {
            for &dropout in &grid.dropouts {
                let combo_seed = derive_seed(seed, combo);
                combo += 1;
                let config = MlpConfig {
                    input_dim: train_x[0].len(),
                    hidden: alloc::vec![width; layers],
                    dropout,
                    num_classes,
                    init_seed: derive_seed(combo_seed, 0x494E4954),
                };
                let model = MlpModel::init(config.clone())?;
                let cfg = TrainConfig {
                    shuffle_seed: derive_seed(combo_seed, SHUFFLE_SUBSTREAM),
                    ..*base
                };
                let (model, report) = train_mlp(model, train_x, train_y, val_x, val_y, &cfg)?;
                let (val_loss, val_accuracy) = evaluate_model(&model, val_x, val_y)?;
                let _ = report;
                results.push(GridResult {
                    param_count: config.param_count(),
                    config,
                    val_accuracy,
                    val_loss,
                });
            }
        }
    }
    results.sort_by(|a, b| {
        b.val_accuracy
            .partial_cmp(&a.val_accuracy)
            .unwrap()
            .then(a.val_loss.partial_cmp(&b.val_loss).unwrap())
            .then(a.param_count.cmp(&b.param_count))
    });
    Ok(results)
}
