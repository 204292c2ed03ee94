//! Central-finite-difference gradient verification.

use alloc::vec::Vec;

use super::{MlpError, MlpModel};

/// Relative disagreement between an analytic and a numeric derivative,
/// floored so near-zero gradient pairs do not blow up the ratio.
pub(crate) fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs()).max(1e-6);
    diff / scale
}

/// Compares analytic gradients against central finite differences over
/// every parameter and returns the maximum relative error.
///
/// Runs with dropout disabled; `epsilon` must be positive.
pub fn numeric_gradient_check(
    model: &MlpModel,
    batch: &[Vec<f64>],
    labels: &[usize],
    epsilon: f64,
) -> Result<f64, MlpError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(MlpError::InvalidEpsilon);
    }
    let analytic = model.loss_and_gradients(batch, labels, None)?.gradients;
    let mut probe = model.clone();
    let mut max_err = 0.0f64;

    let layer_count = model.layers().len();
    for l in 0..layer_count {
        let weight_len = model.layers()[l].weights.data().len();
        for k in 0..weight_len {
            let original = probe.layers()[l].weights.data()[k];
            probe.layers_mut()[l].weights.data_mut()[k] = original + epsilon;
            let plus = probe.loss_only(batch, labels)?;
            probe.layers_mut()[l].weights.data_mut()[k] = original - epsilon;
            let minus = probe.loss_only(batch, labels)?;
            probe.layers_mut()[l].weights.data_mut()[k] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            max_err = max_err.max(relative_error(analytic.layers[l].weights.data()[k], numeric));
        }
        let bias_len = model.layers()[l].bias.len();
        for k in 0..bias_len {
            let original = probe.layers()[l].bias[k];
            probe.layers_mut()[l].bias[k] = original + epsilon;
            let plus = probe.loss_only(batch, labels)?;
            probe.layers_mut()[l].bias[k] = original - epsilon;
            let minus = probe.loss_only(batch, labels)?;
            probe.layers_mut()[l].bias[k] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            max_err = max_err.max(relative_error(analytic.layers[l].bias[k], numeric));
        }
    }
    Ok(max_err)
}
