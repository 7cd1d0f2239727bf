//! Linear SVM trained with the Pegasos stochastic subgradient schedule.
//!
//! Pegasos minimizes the L2-regularized hinge loss with step size
//! 1/(lambda * t). The weight vector is kept as `scale * v` so the
//! per-step shrink is O(1) and only margin violations touch the (sparse)
//! example coordinates. No bias term is trained; the decision threshold is a
//! raw margin at 0.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{signed, sparse_dot, Hyperparams, ModelParams};
use crate::error::{CoreError, Result};
use crate::features::FeatureVector;

pub(super) fn train(
    examples: &[FeatureVector],
    dim: usize,
    hp: &Hyperparams,
    seed: u64,
) -> Result<ModelParams> {
    let lambda = hp.svm_lambda;
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    // Starting the step counter at 2 keeps the first shrink factor
    // (1 - 1/t) away from zero.
    let mut t = 2u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for _epoch in 0..hp.svm_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let example = &examples[i];
            let y = signed(example.label.expect("train set is labeled"));
            let eta = 1.0 / (lambda * t as f64);
            let margin = scale * sparse_dot(&v, example);
            scale *= 1.0 - eta * lambda; // = 1 - 1/t
            if y * margin < 1.0 {
                let step = eta * y / scale;
                for (index, weight) in example.iter() {
                    v[index] += step * weight;
                }
            }
            if scale < 1e-100 {
                for w in &mut v {
                    *w *= scale;
                }
                scale = 1.0;
            }
            t += 1;
        }
        if !scale.is_finite() || v.iter().any(|w| !w.is_finite()) {
            return Err(CoreError::NonFiniteLoss {
                context: "svm weights diverged".to_string(),
            });
        }
    }

    let weights = v.into_iter().map(|w| w * scale).collect();
    Ok(ModelParams::Svm { weights })
}
