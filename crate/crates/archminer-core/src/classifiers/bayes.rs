//! Multinomial naive Bayes over TF-IDF feature weights.
//!
//! The classic formulation counts term occurrences; here the fractional
//! TF-IDF weights act as soft counts, with add-one smoothing over the
//! feature space. The model stores per-class log priors and per-feature
//! log likelihoods, so prediction is a sparse dot product.

use super::{Hyperparams, ModelParams};
use crate::error::Result;
use crate::features::FeatureVector;

pub(super) fn train(
    examples: &[FeatureVector],
    dim: usize,
    hp: &Hyperparams,
) -> Result<ModelParams> {
    let alpha = hp.bayes_smoothing;
    let mut class_count = [0usize; 2];
    let mut feature_sums = [vec![0.0f64; dim], vec![0.0f64; dim]];
    for example in examples {
        let class = usize::from(example.label.expect("train set is labeled"));
        class_count[class] += 1;
        for (index, weight) in example.iter() {
            feature_sums[class][index] += weight;
        }
    }

    let n = examples.len() as f64;
    let log_prior_neg = (class_count[0] as f64 / n).ln();
    let log_prior_pos = (class_count[1] as f64 / n).ln();

    let log_likelihood = |sums: &[f64]| -> Vec<f64> {
        let total: f64 = sums.iter().sum();
        let denominator = total + alpha * dim as f64;
        sums.iter()
            .map(|&s| ((s + alpha) / denominator).ln())
            .collect()
    };

    Ok(ModelParams::Bayes {
        log_prior_pos,
        log_prior_neg,
        log_likelihood_pos: log_likelihood(&feature_sums[1]),
        log_likelihood_neg: log_likelihood(&feature_sums[0]),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::fv;
    use super::super::{predict, train as train_model, Algorithm, Hyperparams, ModelParams};

    #[test]
    fn likelihoods_favor_class_evidence() {
        // Feature 0 marks positives, feature 1 marks negatives.
        let examples = vec![
            fv(&[(0, 1.0)], true),
            fv(&[(0, 1.0)], true),
            fv(&[(1, 1.0)], false),
            fv(&[(1, 1.0)], false),
        ];
        let model =
            train_model(Algorithm::Bayes, &examples, &Hyperparams::default(), 42).unwrap();
        let ModelParams::Bayes {
            log_likelihood_pos,
            log_likelihood_neg,
            ..
        } = &model.params
        else {
            panic!("bayes params");
        };
        assert!(log_likelihood_pos[0] > log_likelihood_pos[1]);
        assert!(log_likelihood_neg[1] > log_likelihood_neg[0]);

        let (label, score) = predict(&model, &fv(&[(0, 2.0)], true));
        assert!(label);
        assert!(score > 0.0);
        let (label, _) = predict(&model, &fv(&[(1, 2.0)], false));
        assert!(!label);
    }

    #[test]
    fn priors_reflect_class_imbalance_exactly() {
        let mut examples = vec![fv(&[(0, 1.0)], true); 3];
        examples.push(fv(&[(1, 1.0)], false));
        let model =
            train_model(Algorithm::Bayes, &examples, &Hyperparams::default(), 42).unwrap();
        let ModelParams::Bayes {
            log_prior_pos,
            log_prior_neg,
            ..
        } = &model.params
        else {
            panic!("bayes params");
        };
        assert!((log_prior_pos - (0.75f64).ln()).abs() < 1e-12);
        assert!((log_prior_neg - (0.25f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn smoothing_keeps_unseen_features_finite() {
        let examples = vec![fv(&[(0, 1.0)], true), fv(&[(1, 1.0)], false)];
        let model =
            train_model(Algorithm::Bayes, &examples, &Hyperparams::default(), 42).unwrap();
        // Feature 1 was never seen in the positive class; its likelihood must
        // still be finite thanks to add-one smoothing.
        let ModelParams::Bayes {
            log_likelihood_pos, ..
        } = &model.params
        else {
            panic!("bayes params");
        };
        assert!(log_likelihood_pos[1].is_finite());
    }
}
