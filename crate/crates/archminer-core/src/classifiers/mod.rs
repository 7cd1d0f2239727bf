//! Binary classifiers over sparse feature vectors.
//!
//! Six algorithms share one train/predict interface: a linear SVM trained
//! with the Pegasos subgradient schedule, multinomial naive Bayes, a
//! gain-ratio decision tree on feature presence, L2-regularized logistic
//! regression, a random forest, and bagged trees. Training is deterministic
//! given a seed; ensemble members draw from per-tree RNG streams so tree
//! training may run in parallel without changing results.

mod bayes;
mod lr;
mod svm;
mod tree;

pub use tree::TreeNode;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::features::FeatureVector;
use crate::sha256_hex;

/// On-disk model format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Svm,
    Bayes,
    Dt,
    Lr,
    Rf,
    Bagging,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Svm,
        Algorithm::Bayes,
        Algorithm::Dt,
        Algorithm::Lr,
        Algorithm::Rf,
        Algorithm::Bagging,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Svm => "svm",
            Algorithm::Bayes => "bayes",
            Algorithm::Dt => "dt",
            Algorithm::Lr => "lr",
            Algorithm::Rf => "rf",
            Algorithm::Bagging => "bagging",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(Algorithm::Svm),
            "bayes" => Ok(Algorithm::Bayes),
            "dt" => Ok(Algorithm::Dt),
            "lr" => Ok(Algorithm::Lr),
            "rf" => Ok(Algorithm::Rf),
            "bagging" => Ok(Algorithm::Bagging),
            other => Err(CoreError::invalid_data(
                "Algorithm",
                format!("unknown algorithm {other:?} (expected svm|bayes|dt|lr|rf|bagging)"),
            )),
        }
    }
}

/// Training hyperparameters for all six algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Pegasos regularization strength.
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    /// Naive Bayes add-one smoothing weight.
    pub bayes_smoothing: f64,
    /// Minimum examples a tree split may leave on either side.
    pub min_leaf: usize,
    /// Logistic regression L2 strength, step size, and epoch count.
    pub lr_lambda: f64,
    pub lr_learning_rate: f64,
    pub lr_epochs: usize,
    pub rf_trees: usize,
    pub bagging_trees: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            svm_lambda: 1e-4,
            svm_epochs: 50,
            bayes_smoothing: 1.0,
            min_leaf: 2,
            lr_lambda: 1e-4,
            lr_learning_rate: 2.0,
            lr_epochs: 200,
            rf_trees: 100,
            bagging_trees: 50,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("svm_lambda", self.svm_lambda),
            ("bayes_smoothing", self.bayes_smoothing),
            ("lr_lambda", self.lr_lambda),
            ("lr_learning_rate", self.lr_learning_rate),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CoreError::invalid_data(
                    "Hyperparams",
                    format!("{name} must be a positive finite number"),
                ));
            }
        }
        let counts = [
            ("svm_epochs", self.svm_epochs),
            ("min_leaf", self.min_leaf),
            ("lr_epochs", self.lr_epochs),
            ("rf_trees", self.rf_trees),
            ("bagging_trees", self.bagging_trees),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(CoreError::invalid_data(
                    "Hyperparams",
                    format!("{name} must be positive"),
                ));
            }
        }
        Ok(())
    }
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            seed: 42,
        }
    }
}

/// Seeded shuffle split: the first ceil(fraction x n) shuffled examples form
/// the training set. Requires labeled examples of both classes.
pub fn split_train_test(
    examples: Vec<FeatureVector>,
    config: &SplitConfig,
) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(CoreError::invalid_data(
            "SplitConfig",
            "train_fraction must be in (0, 1)",
        ));
    }
    check_labeled_both_classes(&examples)?;
    let mut indices: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    indices.shuffle(&mut rng);
    let train_len = (config.train_fraction * examples.len() as f64).ceil() as usize;
    let mut slots: Vec<Option<FeatureVector>> = examples.into_iter().map(Some).collect();
    let take = |slots: &mut Vec<Option<FeatureVector>>, idx: usize| {
        slots[idx].take().expect("each index taken once")
    };
    let train = indices[..train_len]
        .iter()
        .map(|&i| take(&mut slots, i))
        .collect();
    let test = indices[train_len..]
        .iter()
        .map(|&i| take(&mut slots, i))
        .collect();
    Ok((train, test))
}

fn check_labeled_both_classes(examples: &[FeatureVector]) -> Result<()> {
    if examples.len() < 2 {
        return Err(CoreError::invalid_data(
            "train set",
            "at least two labeled examples are required",
        ));
    }
    let mut saw = [false, false];
    for (i, example) in examples.iter().enumerate() {
        match example.label {
            Some(label) => saw[usize::from(label)] = true,
            None => {
                return Err(CoreError::invalid_data(
                    "train set",
                    format!("example {i} has no label"),
                ));
            }
        }
    }
    if !(saw[0] && saw[1]) {
        return Err(CoreError::DegenerateLabels);
    }
    Ok(())
}

/// Number of dense feature slots needed to cover every index in the set.
fn dimension(examples: &[FeatureVector]) -> usize {
    examples
        .iter()
        .flat_map(|e| e.weights.keys().next_back())
        .map(|&i| i + 1)
        .max()
        .unwrap_or(0)
}

/// Sparse-dense dot product; indices beyond the dense weights contribute 0.
fn sparse_dot(dense: &[f64], sparse: &FeatureVector) -> f64 {
    sparse
        .iter()
        .filter(|&(i, _)| i < dense.len())
        .map(|(i, w)| dense[i] * w)
        .sum()
}

/// Signed label convention used by the margin-based trainers.
fn signed(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

/// Learned parameters, by algorithm family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Svm {
        weights: Vec<f64>,
    },
    Bayes {
        log_prior_pos: f64,
        log_prior_neg: f64,
        log_likelihood_pos: Vec<f64>,
        log_likelihood_neg: Vec<f64>,
    },
    Tree {
        root: TreeNode,
    },
    Lr {
        weights: Vec<f64>,
        bias: f64,
    },
    Forest {
        trees: Vec<TreeNode>,
    },
}

/// A trained classifier: algorithm, parameters, the hyperparameters used,
/// and a fingerprint of exactly what it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub algorithm: Algorithm,
    pub hyperparams: Hyperparams,
    pub params: ModelParams,
    /// SHA-256 over (algorithm, hyperparams, seed, training examples).
    pub train_fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: ClassifierModel,
}

impl ClassifierModel {
    /// Serializes with the format version tag.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(CoreError::invalid_data(
                "ClassifierModel",
                format!(
                    "unsupported model format version {} (this build reads {})",
                    file.version, MODEL_FORMAT_VERSION
                ),
            ));
        }
        Ok(file.model)
    }

    /// Class probabilities (positive, negative) for naive Bayes models;
    /// `None` for other algorithms.
    pub fn class_probabilities(&self, example: &FeatureVector) -> Option<(f64, f64)> {
        let ModelParams::Bayes {
            log_prior_pos,
            log_prior_neg,
            log_likelihood_pos,
            log_likelihood_neg,
        } = &self.params
        else {
            return None;
        };
        let joint_pos = log_prior_pos + sparse_dot(log_likelihood_pos, example);
        let joint_neg = log_prior_neg + sparse_dot(log_likelihood_neg, example);
        let max = joint_pos.max(joint_neg);
        let e_pos = (joint_pos - max).exp();
        let e_neg = (joint_neg - max).exp();
        let z = e_pos + e_neg;
        Some((e_pos / z, e_neg / z))
    }
}

/// Canonical byte encoding of a training run, hashed into the model
/// fingerprint. Weights are encoded by exact bit pattern.
pub fn train_fingerprint(
    algorithm: Algorithm,
    examples: &[FeatureVector],
    hyperparams: &Hyperparams,
    seed: u64,
) -> String {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(algorithm.name().as_bytes());
    bytes.push(b'\n');
    bytes.extend_from_slice(seed.to_le_bytes().as_slice());
    bytes.extend_from_slice(
        serde_json::to_string(hyperparams)
            .expect("hyperparams serialize")
            .as_bytes(),
    );
    bytes.push(b'\n');
    for example in examples {
        for (index, weight) in example.iter() {
            bytes.extend_from_slice(&index.to_le_bytes());
            bytes.extend_from_slice(&weight.to_bits().to_le_bytes());
        }
        bytes.push(match example.label {
            Some(true) => b'+',
            Some(false) => b'-',
            None => b'?',
        });
        bytes.push(b'\n');
    }
    sha256_hex(&bytes)
}

/// Trains one classifier on a labeled set.
pub fn train(
    algorithm: Algorithm,
    train_set: &[FeatureVector],
    hyperparams: &Hyperparams,
    seed: u64,
) -> Result<ClassifierModel> {
    hyperparams.validate()?;
    check_labeled_both_classes(train_set)?;
    let dim = dimension(train_set);
    let params = match algorithm {
        Algorithm::Svm => svm::train(train_set, dim, hyperparams, seed)?,
        Algorithm::Bayes => bayes::train(train_set, dim, hyperparams)?,
        Algorithm::Dt => tree::train_single(train_set, hyperparams)?,
        Algorithm::Lr => lr::train(train_set, dim, hyperparams)?,
        Algorithm::Rf => tree::train_forest(train_set, hyperparams, seed, true)?,
        Algorithm::Bagging => tree::train_forest(train_set, hyperparams, seed, false)?,
    };
    Ok(ClassifierModel {
        algorithm,
        hyperparams: hyperparams.clone(),
        params,
        train_fingerprint: train_fingerprint(algorithm, train_set, hyperparams, seed),
    })
}

/// Predicted label and score. Scores are the SVM margin, the Bayes and
/// logistic-regression log-odds, the tree leaf probability, or the ensemble
/// positive-vote fraction; the label thresholds the score at 0 (margin-type
/// scores) or 0.5 (probability-type scores), with ties going negative.
pub fn predict(model: &ClassifierModel, example: &FeatureVector) -> (bool, f64) {
    match &model.params {
        ModelParams::Svm { weights } => {
            let score = sparse_dot(weights, example);
            (score > 0.0, score)
        }
        ModelParams::Lr { weights, bias } => {
            let score = sparse_dot(weights, example) + bias;
            (score > 0.0, score)
        }
        ModelParams::Bayes { .. } => {
            let (pos, neg) = model
                .class_probabilities(example)
                .expect("bayes params produce probabilities");
            let score = pos.ln() - neg.ln();
            (score > 0.0, score)
        }
        ModelParams::Tree { root } => {
            let score = tree::leaf_probability(root, example);
            (score > 0.5, score)
        }
        ModelParams::Forest { trees } => {
            let votes = trees
                .iter()
                .filter(|t| tree::leaf_probability(t, example) > 0.5)
                .count();
            let score = votes as f64 / trees.len() as f64;
            (score > 0.5, score)
        }
    }
}

/// Batch prediction, preserving input order.
pub fn predict_batch(model: &ClassifierModel, examples: &[FeatureVector]) -> Vec<(bool, f64)> {
    examples.iter().map(|e| predict(model, e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    pub(crate) fn fv(pairs: &[(usize, f64)], label: bool) -> FeatureVector {
        FeatureVector {
            weights: pairs.iter().copied().collect::<BTreeMap<usize, f64>>(),
            label: Some(label),
        }
    }

    /// A linearly separable two-feature set: positives load feature 0,
    /// negatives load feature 1.
    pub(crate) fn separable_set(n_per_class: usize) -> Vec<FeatureVector> {
        let mut out = Vec::new();
        for i in 0..n_per_class {
            let jitter = 0.05 * (i % 5) as f64;
            out.push(fv(&[(0, 0.6 + jitter), (2, 0.1)], true));
            out.push(fv(&[(1, 0.6 + jitter), (2, 0.1)], false));
        }
        out
    }

    #[test]
    fn split_respects_fraction_and_seed() {
        let examples = separable_set(10); // 20 examples
        let config = SplitConfig::default();
        let (train_a, test_a) = split_train_test(examples.clone(), &config).unwrap();
        assert_eq!(train_a.len(), 14); // ceil(0.7 * 20)
        assert_eq!(test_a.len(), 6);
        let (train_b, test_b) = split_train_test(examples.clone(), &config).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        let other = SplitConfig {
            seed: 7,
            ..SplitConfig::default()
        };
        let (train_c, _) = split_train_test(examples, &other).unwrap();
        assert_ne!(train_a, train_c);
    }

    #[test]
    fn split_rejects_bad_input() {
        let one_class: Vec<FeatureVector> =
            (0..4).map(|i| fv(&[(i, 1.0)], true)).collect();
        assert!(matches!(
            split_train_test(one_class, &SplitConfig::default()),
            Err(CoreError::DegenerateLabels)
        ));
        let unlabeled = vec![
            FeatureVector {
                weights: BTreeMap::new(),
                label: None,
            },
            fv(&[(0, 1.0)], true),
        ];
        assert!(split_train_test(unlabeled, &SplitConfig::default()).is_err());
        let bad_fraction = SplitConfig {
            train_fraction: 1.5,
            ..SplitConfig::default()
        };
        assert!(split_train_test(separable_set(5), &bad_fraction).is_err());
    }

    #[test]
    fn every_algorithm_separates_the_easy_set() {
        let examples = separable_set(50);
        let hp = Hyperparams::default();
        for algorithm in Algorithm::ALL {
            let model = train(algorithm, &examples, &hp, 42).unwrap();
            let mut correct = 0;
            for example in &examples {
                let (label, _) = predict(&model, example);
                if label == example.label.unwrap() {
                    correct += 1;
                }
            }
            assert!(
                correct == examples.len(),
                "{algorithm} got {correct}/{}",
                examples.len()
            );
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let examples = separable_set(20);
        let hp = Hyperparams {
            rf_trees: 10,
            bagging_trees: 10,
            svm_epochs: 5,
            lr_epochs: 20,
            ..Hyperparams::default()
        };
        for algorithm in Algorithm::ALL {
            let a = train(algorithm, &examples, &hp, 42).unwrap();
            let b = train(algorithm, &examples, &hp, 42).unwrap();
            assert_eq!(a.to_json(), b.to_json(), "{algorithm} not reproducible");
        }
        // A different seed must change the stochastic models.
        let a = train(Algorithm::Rf, &examples, &hp, 1).unwrap();
        let b = train(Algorithm::Rf, &examples, &hp, 2).unwrap();
        assert_ne!(a.params, b.params);
    }

    #[test]
    fn fingerprint_tracks_inputs() {
        let examples = separable_set(5);
        let hp = Hyperparams::default();
        let base = train_fingerprint(Algorithm::Svm, &examples, &hp, 42);
        assert_eq!(base, train_fingerprint(Algorithm::Svm, &examples, &hp, 42));
        assert_ne!(base, train_fingerprint(Algorithm::Svm, &examples, &hp, 43));
        assert_ne!(base, train_fingerprint(Algorithm::Lr, &examples, &hp, 42));
        let mut altered = examples.clone();
        altered[0].weights.insert(9, 0.123);
        assert_ne!(base, train_fingerprint(Algorithm::Svm, &altered, &hp, 42));
    }

    #[test]
    fn bayes_posteriors_sum_to_one() {
        let examples = separable_set(10);
        let model = train(Algorithm::Bayes, &examples, &Hyperparams::default(), 42).unwrap();
        for example in &examples {
            let (pos, neg) = model.class_probabilities(example).unwrap();
            assert!((pos + neg - 1.0).abs() < 1e-9);
            assert!(pos >= 0.0 && neg >= 0.0);
        }
        let svm = train(Algorithm::Svm, &examples, &Hyperparams::default(), 42).unwrap();
        assert!(svm.class_probabilities(&examples[0]).is_none());
    }

    #[test]
    fn forest_score_is_a_vote_recount() {
        let examples = separable_set(30);
        let hp = Hyperparams {
            rf_trees: 100,
            ..Hyperparams::default()
        };
        let model = train(Algorithm::Rf, &examples, &hp, 42).unwrap();
        let ModelParams::Forest { trees } = &model.params else {
            panic!("rf trains a forest");
        };
        assert_eq!(trees.len(), 100);
        for example in examples.iter().take(10) {
            let (_, score) = predict(&model, example);
            let votes = trees
                .iter()
                .filter(|t| tree::leaf_probability(t, example) > 0.5)
                .count();
            assert!((score - votes as f64 / 100.0).abs() < 1e-12);
            // With 100 trees the score is always a multiple of 0.01.
            assert!((score * 100.0 - (score * 100.0).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn model_json_round_trip() {
        let examples = separable_set(10);
        let hp = Hyperparams {
            rf_trees: 5,
            bagging_trees: 5,
            svm_epochs: 5,
            lr_epochs: 20,
            ..Hyperparams::default()
        };
        for algorithm in Algorithm::ALL {
            let model = train(algorithm, &examples, &hp, 42).unwrap();
            let back = ClassifierModel::from_json(&model.to_json()).unwrap();
            assert_eq!(model, back, "{algorithm} round trip");
            // Predictions agree after the round trip.
            let (l1, s1) = predict(&model, &examples[0]);
            let (l2, s2) = predict(&back, &examples[0]);
            assert_eq!(l1, l2);
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn model_version_is_enforced() {
        let examples = separable_set(5);
        let model = train(Algorithm::Bayes, &examples, &Hyperparams::default(), 42).unwrap();
        let json = model.to_json().replace("\"version\": 1", "\"version\": 99");
        assert!(ClassifierModel::from_json(&json).is_err());
    }

    #[test]
    fn divergent_training_reports_non_finite_loss() {
        let examples = separable_set(10);
        let hp = Hyperparams {
            lr_learning_rate: 1e12,
            ..Hyperparams::default()
        };
        assert!(matches!(
            train(Algorithm::Lr, &examples, &hp, 42),
            Err(CoreError::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for algorithm in Algorithm::ALL {
            assert_eq!(algorithm.name().parse::<Algorithm>().unwrap(), algorithm);
        }
        assert!("perceptron".parse::<Algorithm>().is_err());
    }

    #[test]
    fn ties_predict_negative() {
        // A zero-weight model scores exactly 0; the label must be negative.
        let model = ClassifierModel {
            algorithm: Algorithm::Svm,
            hyperparams: Hyperparams::default(),
            params: ModelParams::Svm {
                weights: vec![0.0, 0.0],
            },
            train_fingerprint: String::new(),
        };
        let (label, score) = predict(&model, &fv(&[(0, 1.0)], true));
        assert_eq!(score, 0.0);
        assert!(!label);
    }
}
