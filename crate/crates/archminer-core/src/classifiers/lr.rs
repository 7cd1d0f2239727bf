//! L2-regularized logistic regression trained by full-batch gradient
//! descent. The loss is the mean cross-entropy plus (lambda/2)|w|^2; the
//! bias is unregularized. Training fails with a non-finite-loss error if the
//! step size makes the objective diverge.

use super::{sparse_dot, Hyperparams, ModelParams};
use crate::error::{CoreError, Result};
use crate::features::FeatureVector;

/// Mean cross-entropy loss with L2 penalty, and its gradient with respect
/// to (weights, bias).
pub(super) fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    examples: &[FeatureVector],
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = examples.len() as f64;
    let mut loss = 0.0;
    let mut grad_w: Vec<f64> = weights.iter().map(|&w| lambda * w).collect();
    let mut grad_b = 0.0;
    for example in examples {
        let z = sparse_dot(weights, example) + bias;
        let y = f64::from(u8::from(example.label.expect("train set is labeled")));
        // Numerically stable cross-entropy: max(z,0) - z*y + ln(1 + e^-|z|).
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        let p = 1.0 / (1.0 + (-z).exp());
        let err = (p - y) / n;
        for (index, weight) in example.iter() {
            grad_w[index] += err * weight;
        }
        grad_b += err;
    }
    loss = loss / n + 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

pub(super) fn train(
    examples: &[FeatureVector],
    dim: usize,
    hp: &Hyperparams,
) -> Result<ModelParams> {
    let mut weights = vec![0.0f64; dim];
    let mut bias = 0.0f64;
    for _epoch in 0..hp.lr_epochs {
        let (loss, grad_w, grad_b) = loss_and_gradient(&weights, bias, examples, hp.lr_lambda);
        if !loss.is_finite() {
            return Err(CoreError::NonFiniteLoss {
                context: "logistic regression loss diverged".to_string(),
            });
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= hp.lr_learning_rate * g;
        }
        bias -= hp.lr_learning_rate * grad_b;
    }
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(CoreError::NonFiniteLoss {
            context: "logistic regression weights diverged".to_string(),
        });
    }
    Ok(ModelParams::Lr { weights, bias })
}
