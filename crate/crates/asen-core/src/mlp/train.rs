//! Training loop: Adam optimizer, mini-batches, early stopping on
//! validation loss with best-epoch weight restoration.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ForwardMode, MlpError, MlpGradients, MlpModel};
use crate::linalg::argmax;
use crate::rng::rng_from_seed;

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Optimizer and stopping settings shared by all trainable models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub adam: AdamHyper,
    /// Hard cap of 100 epochs.
    pub max_epochs: usize,
    /// Consecutive non-improving epochs tolerated before stopping.
    pub patience: usize,
    /// Validation loss must beat the best by more than this to count as an
    /// improvement.
    pub min_delta: f64,
    pub batch_size: usize,
    pub shuffle_seed: u64,
}

pub const MAX_EPOCH_CAP: usize = 100;

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            adam: AdamHyper::default(),
            max_epochs: MAX_EPOCH_CAP,
            patience: 3,
            min_delta: 1e-6,
            batch_size: 32,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        if self.max_epochs == 0 || self.max_epochs > MAX_EPOCH_CAP {
            return Err(MlpError::InvalidConfig(alloc::format!(
                "max_epochs must lie in 1-{MAX_EPOCH_CAP}"
            )));
        }
        if self.patience == 0 {
            return Err(MlpError::InvalidConfig("patience must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(MlpError::InvalidConfig("batch size must be at least 1".into()));
        }
        let h = &self.adam;
        if !(h.learning_rate > 0.0 && h.learning_rate.is_finite()) {
            return Err(MlpError::InvalidConfig("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&h.beta1) || !(0.0..1.0).contains(&h.beta2) {
            return Err(MlpError::InvalidConfig("betas must lie in [0, 1)".into()));
        }
        if !(h.epsilon > 0.0) || self.min_delta < 0.0 {
            return Err(MlpError::InvalidConfig("epsilon/min_delta invalid".into()));
        }
        Ok(())
    }
}

/// One bias-corrected Adam update over a flat parameter tensor.
///
/// `m` and `v` are the running first/second moments for the same tensor;
/// `step` counts updates starting at 1.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step: u64,
    hyper: &AdamHyper,
) -> Result<(), MlpError> {
    assert_eq!(params.len(), grads.len(), "adam_step shape mismatch");
    assert_eq!(params.len(), m.len(), "adam_step moment shape mismatch");
    assert_eq!(params.len(), v.len(), "adam_step moment shape mismatch");
    assert!(step >= 1, "adam_step counter starts at 1");
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(MlpError::NonFiniteGradient { layer: usize::MAX });
    }
    let b1 = hyper.beta1;
    let b2 = hyper.beta2;
    let bias1 = 1.0 - libm::pow(b1, step as f64);
    let bias2 = 1.0 - libm::pow(b2, step as f64);
    for i in 0..params.len() {
        m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= hyper.learning_rate * m_hat / (libm::sqrt(v_hat) + hyper.epsilon);
    }
    Ok(())
}

/// Adam state for a layered model: one moment pair per weight matrix and
/// bias vector, with a shared step counter.
#[derive(Clone, Debug)]
pub struct AdamOptimizer {
    hyper: AdamHyper,
    step: u64,
    moments: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>, // (m_w, v_w, m_b, v_b)
}

impl AdamOptimizer {
    pub fn new(model: &MlpModel, hyper: AdamHyper) -> Self {
        let moments = model
            .layers()
            .iter()
            .map(|l| {
                let nw = l.weights.data().len();
                let nb = l.bias.len();
                (vec![0.0; nw], vec![0.0; nw], vec![0.0; nb], vec![0.0; nb])
            })
            .collect();
        AdamOptimizer {
            hyper,
            step: 0,
            moments,
        }
    }

    pub fn apply(&mut self, model: &mut MlpModel, grads: &MlpGradients) -> Result<(), MlpError> {
        self.step += 1;
        for (l, layer) in model.layers_mut().iter_mut().enumerate() {
            let g = &grads.layers[l];
            if !g.weights.iter_all_finite() || g.bias.iter().any(|x| !x.is_finite()) {
                return Err(MlpError::NonFiniteGradient { layer: l });
            }
            let (m_w, v_w, m_b, v_b) = &mut self.moments[l];
            adam_step(
                layer.weights.data_mut(),
                g.weights.data(),
                m_w,
                v_w,
                self.step,
                &self.hyper,
            )?;
            adam_step(&mut layer.bias, &g.bias, m_b, v_b, self.step, &self.hyper)?;
        }
        Ok(())
    }
}

/// What the early stopper decided after seeing one validation loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Wait,
    Stop,
}

/// Tracks the best validation loss and counts non-improving epochs.
#[derive(Clone, Debug)]
pub struct EarlyStopper {
    patience: usize,
    min_delta: f64,
    best: f64,
    best_epoch: usize,
    wait: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize, min_delta: f64) -> Self {
        EarlyStopper {
            patience,
            min_delta,
            best: f64::INFINITY,
            best_epoch: 0,
            wait: 0,
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }

    pub fn observe(&mut self, epoch: usize, loss: f64) -> StopDecision {
        if loss < self.best - self.min_delta {
            self.best = loss;
            self.best_epoch = epoch;
            self.wait = 0;
            StopDecision::Improved
        } else {
            self.wait += 1;
            if self.wait >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Wait
            }
        }
    }
}

/// Per-epoch history plus which epoch's weights were kept.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub train_accuracy: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// Number of epochs actually run.
    pub stopped_epoch: usize,
    /// 1-based epoch whose weights the returned model carries.
    pub best_epoch: usize,
}

/// Mean cross-entropy and accuracy of the model on a labelled set
/// (inference mode, dropout off).
pub fn evaluate_model(
    model: &MlpModel,
    x: &[Vec<f64>],
    y: &[usize],
) -> Result<(f64, f64), MlpError> {
    let probs = model.forward(x, ForwardMode::Infer)?;
    if y.len() != x.len() {
        return Err(MlpError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (row, &label) in probs.iter().zip(y.iter()) {
        if label >= row.len() {
            return Err(MlpError::InvalidLabel {
                label,
                classes: row.len(),
            });
        }
        loss += -libm::log(row[label].max(f64::MIN_POSITIVE));
        if argmax(row) == label {
            correct += 1;
        }
    }
    let n = x.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Trains with mini-batch Adam and early stopping; the returned model
/// carries the weights of the best-validation epoch.
pub fn train_mlp(
    model: MlpModel,
    train_x: &[Vec<f64>],
    train_y: &[usize],
    val_x: &[Vec<f64>],
    val_y: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport), MlpError> {
    cfg.validate()?;
    if train_x.is_empty() || val_x.is_empty() {
        return Err(MlpError::EmptySet);
    }
    if train_x.len() != train_y.len() {
        return Err(MlpError::DimensionMismatch {
            expected: train_x.len(),
            got: train_y.len(),
        });
    }

    let mut model = model;
    let mut opt = AdamOptimizer::new(&model, cfg.adam);
    let mut stopper = EarlyStopper::new(cfg.patience, cfg.min_delta);
    let mut rng = rng_from_seed(cfg.shuffle_seed);
    let dropout_active = model.config().dropout > 0.0;

    let mut best_model = model.clone();
    let mut report = TrainReport {
        train_loss: Vec::new(),
        train_accuracy: Vec::new(),
        val_loss: Vec::new(),
        val_accuracy: Vec::new(),
        stopped_epoch: 0,
        best_epoch: 0,
    };

    let mut indices: Vec<usize> = (0..train_x.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            let batch_x: Vec<Vec<f64>> = chunk.iter().map(|&i| train_x[i].clone()).collect();
            let batch_y: Vec<usize> = chunk.iter().map(|&i| train_y[i]).collect();
            let dropout_seed = if dropout_active {
                Some(rng.gen::<u64>())
            } else {
                None
            };
            let out = model.loss_and_gradients(&batch_x, &batch_y, dropout_seed)?;
            if !out.loss.is_finite() {
                return Err(MlpError::Diverged { epoch });
            }
            loss_sum += out.loss * chunk.len() as f64;
            for (row, &label) in out.probabilities.iter().zip(batch_y.iter()) {
                if argmax(row) == label {
                    correct += 1;
                }
            }
            opt.apply(&mut model, &out.gradients)?;
        }
        let n = train_x.len() as f64;
        report.train_loss.push(loss_sum / n);
        report.train_accuracy.push(correct as f64 / n);

        let (val_loss, val_acc) = evaluate_model(&model, val_x, val_y)?;
        if !val_loss.is_finite() {
            return Err(MlpError::Diverged { epoch });
        }
        report.val_loss.push(val_loss);
        report.val_accuracy.push(val_acc);
        report.stopped_epoch = epoch;

        match stopper.observe(epoch, val_loss) {
            StopDecision::Improved => {
                best_model = model.clone();
                report.best_epoch = epoch;
            }
            StopDecision::Wait => {}
            StopDecision::Stop => break,
        }
    }

    Ok((best_model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::MlpConfig;

    #[test]
    fn adam_with_zero_gradients_leaves_parameters_unchanged() {
        let mut params = vec![1.0, -2.0, 3.0];
        let grads = vec![0.0; 3];
        let mut m = vec![0.0; 3];
        let mut v = vec![0.0; 3];
        adam_step(&mut params, &grads, &mut m, &mut v, 1, &AdamHyper::default()).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn first_adam_step_moves_by_learning_rate_against_gradient_sign() {
        let hyper = AdamHyper::default();
        for &g in &[0.5, -0.25, 2.0, -1e-3] {
            let mut params = vec![0.0];
            let mut m = vec![0.0];
            let mut v = vec![0.0];
            adam_step(&mut params, &[g], &mut m, &mut v, 1, &hyper).unwrap();
            // bias-corrected first step: lr * g / (|g| + eps) = lr * sign(g) up to eps
            let expected = -hyper.learning_rate * g.signum();
            assert!((params[0] - expected).abs() < hyper.learning_rate * 1e-4);
        }
    }

    #[test]
    fn adam_is_deterministic() {
        let hyper = AdamHyper::default();
        let run = || {
            let mut params = vec![0.3, -0.7];
            let mut m = vec![0.0; 2];
            let mut v = vec![0.0; 2];
            for step in 1..=10 {
                adam_step(&mut params, &[0.1, -0.2], &mut m, &mut v, step, &hyper).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut params = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        assert!(adam_step(
            &mut params,
            &[f64::NAN],
            &mut m,
            &mut v,
            1,
            &AdamHyper::default()
        )
        .is_err());
    }

    #[test]
    fn strictly_worsening_loss_stops_after_patience_and_keeps_first_epoch() {
        let mut stopper = EarlyStopper::new(3, 1e-6);
        assert_eq!(stopper.observe(1, 1.0), StopDecision::Improved);
        assert_eq!(stopper.observe(2, 1.1), StopDecision::Wait);
        assert_eq!(stopper.observe(3, 1.2), StopDecision::Wait);
        assert_eq!(stopper.observe(4, 1.3), StopDecision::Stop);
        assert_eq!(stopper.best_epoch(), 1);
    }

    #[test]
    fn jitter_below_min_delta_is_not_an_improvement() {
        let mut stopper = EarlyStopper::new(2, 1e-6);
        assert_eq!(stopper.observe(1, 1.0), StopDecision::Improved);
        assert_eq!(stopper.observe(2, 1.0 - 1e-9), StopDecision::Wait);
        assert_eq!(stopper.observe(3, 1.0 - 1e-9), StopDecision::Stop);
    }

    #[test]
    fn train_config_rejects_out_of_range_values() {
        let mut cfg = TrainConfig::default();
        cfg.max_epochs = 101;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.max_epochs = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.patience = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.batch_size = 0;
        assert!(cfg.validate().is_err());
    }

    fn two_blob_data(n_per: usize, seed: u64, gap: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n_per {
            xs.push(vec![
                gap + rng.gen_range(-0.5..0.5),
                gap + rng.gen_range(-0.5..0.5),
            ]);
            ys.push(0);
            xs.push(vec![
                -gap + rng.gen_range(-0.5..0.5),
                -gap + rng.gen_range(-0.5..0.5),
            ]);
            ys.push(1);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_problem_reaches_high_training_accuracy() {
        // the two blobs are separated by far more than their noise radius,
        // so the hyperplane x + y = 0 classifies every point: the data is
        // certifiably linearly separable
        let (xs, ys) = two_blob_data(100, 21, 2.0);
        for (x, &y) in xs.iter().zip(ys.iter()) {
            let side = x[0] + x[1] > 0.0;
            assert_eq!(side, y == 0);
        }
        let cfg = MlpConfig {
            input_dim: 2,
            hidden: vec![16],
            dropout: 0.0,
            num_classes: 2,
            init_seed: 3,
        };
        let model = MlpModel::init(cfg).unwrap();
        let (val_x, val_y) = two_blob_data(20, 22, 2.0);
        let (trained, report) =
            train_mlp(model, &xs, &ys, &val_x, &val_y, &TrainConfig::default()).unwrap();
        let (_, train_acc) = evaluate_model(&trained, &xs, &ys).unwrap();
        assert!(
            train_acc >= 0.99,
            "training accuracy {train_acc} below 0.99 after {} epochs",
            report.stopped_epoch
        );
        assert!(report.stopped_epoch <= 100);
    }

    #[test]
    fn training_is_deterministic() {
        let (xs, ys) = two_blob_data(40, 31, 1.5);
        let (vx, vy) = two_blob_data(10, 32, 1.5);
        let cfg = MlpConfig {
            input_dim: 2,
            hidden: vec![12],
            dropout: 0.4,
            num_classes: 2,
            init_seed: 5,
        };
        let run = || {
            train_mlp(
                MlpModel::init(cfg.clone()).unwrap(),
                &xs,
                &ys,
                &vx,
                &vy,
                &TrainConfig {
                    max_epochs: 12,
                    ..TrainConfig::default()
                },
            )
            .unwrap()
        };
        let (m1, r1) = run();
        let (m2, r2) = run();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn returned_model_is_the_best_validation_snapshot() {
        let (xs, ys) = two_blob_data(40, 41, 1.0);
        let (vx, vy) = two_blob_data(12, 42, 1.0);
        let cfg = MlpConfig {
            input_dim: 2,
            hidden: vec![10],
            dropout: 0.0,
            num_classes: 2,
            init_seed: 7,
        };
        let (trained, report) = train_mlp(
            MlpModel::init(cfg).unwrap(),
            &xs,
            &ys,
            &vx,
            &vy,
            &TrainConfig {
                max_epochs: 20,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let (val_loss, _) = evaluate_model(&trained, &vx, &vy).unwrap();
        let min_recorded = report
            .val_loss
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(val_loss, min_recorded);
        assert_eq!(report.val_loss[report.best_epoch - 1], min_recorded);
    }

    #[test]
    fn plain_gradient_descent_on_fixed_batch_is_non_increasing() {
        // full-batch steepest descent at a small step must not increase the
        // smooth cross-entropy loss
        let (xs, ys) = two_blob_data(20, 51, 1.0);
        let cfg = MlpConfig {
            input_dim: 2,
            hidden: vec![10],
            dropout: 0.0,
            num_classes: 2,
            init_seed: 9,
        };
        let mut model = MlpModel::init(cfg).unwrap();
        let lr = 1e-4;
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            let out = model.loss_and_gradients(&xs, &ys, None).unwrap();
            assert!(out.loss <= last + 1e-12, "loss increased: {last} -> {}", out.loss);
            last = out.loss;
            for (layer, grad) in model.layers_mut().iter_mut().zip(out.gradients.layers.iter()) {
                for (w, g) in layer.weights.data_mut().iter_mut().zip(grad.weights.data()) {
                    *w -= lr * g;
                }
                for (b, g) in layer.bias.iter_mut().zip(grad.bias.iter()) {
                    *b -= lr * g;
                }
            }
        }
    }
}
