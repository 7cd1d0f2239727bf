//! Gain-ratio decision trees on feature presence, and the bootstrap
//! ensembles (random forest, bagging) built from them.
//!
//! Trees split on whether a feature's weight is positive, choosing the
//! split by the same gain-ratio criterion the dictionary uses, and grow
//! until leaves are pure or too small; there is no pruning. Each node
//! stores the gain ratio of its chosen split, so the criterion can be
//! re-audited against the training data after the fact.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Hyperparams, ModelParams};
use crate::dictionary::presence_gain_ratio;
use crate::error::Result;
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Fraction of training examples at this leaf that are positive.
        prob_positive: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        /// Gain ratio of this split over the node's training subset.
        gain_ratio: f64,
        present: Box<TreeNode>,
        absent: Box<TreeNode>,
    },
}

/// Routes an example down the tree; returns the leaf's positive fraction.
pub(super) fn leaf_probability(node: &TreeNode, example: &FeatureVector) -> f64 {
    let mut node = node;
    loop {
        match node {
            TreeNode::Leaf { prob_positive, .. } => return *prob_positive,
            TreeNode::Split {
                feature,
                present,
                absent,
                ..
            } => {
                node = if example.get(*feature) > 0.0 {
                    present
                } else {
                    absent
                };
            }
        }
    }
}

/// Per-split feature subsampling state for random-forest trees.
struct FeatureSampler<'a> {
    rng: ChaCha8Rng,
    pool: &'a [usize],
    mtry: usize,
}

impl FeatureSampler<'_> {
    fn sample(&mut self) -> Vec<usize> {
        let mut picked: Vec<usize> = self
            .pool
            .choose_multiple(&mut self.rng, self.mtry)
            .copied()
            .collect();
        picked.sort_unstable();
        picked
    }
}

/// Features whose presence varies across the given examples (constant
/// features can never split them).
fn varying_features(examples: &[FeatureVector], idxs: &[usize]) -> Vec<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &i in idxs {
        for (feature, weight) in examples[i].iter() {
            if weight > 0.0 {
                *counts.entry(feature).or_insert(0usize) += 1;
            }
        }
    }
    counts
        .into_iter()
        .filter(|&(_, count)| count > 0 && count < idxs.len())
        .map(|(feature, _)| feature)
        .collect()
}

fn leaf(labels: &[bool]) -> TreeNode {
    let positives = labels.iter().filter(|&&l| l).count();
    TreeNode::Leaf {
        prob_positive: positives as f64 / labels.len() as f64,
        samples: labels.len(),
    }
}

fn grow(
    examples: &[FeatureVector],
    idxs: &[usize],
    min_leaf: usize,
    sampler: &mut Option<FeatureSampler<'_>>,
) -> TreeNode {
    let labels: Vec<bool> = idxs
        .iter()
        .map(|&i| examples[i].label.expect("train set is labeled"))
        .collect();
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() || idxs.len() < 2 * min_leaf {
        return leaf(&labels);
    }

    let candidates = match sampler {
        Some(s) => s.sample(),
        None => varying_features(examples, idxs),
    };

    let mut best: Option<(usize, f64, Vec<bool>)> = None;
    for feature in candidates {
        let presence: Vec<bool> = idxs
            .iter()
            .map(|&i| examples[i].get(feature) > 0.0)
            .collect();
        let on_side = presence.iter().filter(|&&p| p).count();
        if on_side < min_leaf || idxs.len() - on_side < min_leaf {
            continue;
        }
        let gr = presence_gain_ratio(&presence, &labels);
        if gr <= 0.0 {
            continue;
        }
        // Strict improvement keeps the lowest feature index on ties, since
        // candidates arrive in ascending order.
        if best.as_ref().is_none_or(|(_, best_gr, _)| gr > *best_gr) {
            best = Some((feature, gr, presence));
        }
    }

    let Some((feature, gain_ratio, presence)) = best else {
        return leaf(&labels);
    };
    let mut present_idxs = Vec::new();
    let mut absent_idxs = Vec::new();
    for (&idx, &p) in idxs.iter().zip(&presence) {
        if p {
            present_idxs.push(idx);
        } else {
            absent_idxs.push(idx);
        }
    }
    TreeNode::Split {
        feature,
        gain_ratio,
        present: Box::new(grow(examples, &present_idxs, min_leaf, sampler)),
        absent: Box::new(grow(examples, &absent_idxs, min_leaf, sampler)),
    }
}

pub(super) fn train_single(examples: &[FeatureVector], hp: &Hyperparams) -> Result<ModelParams> {
    let idxs: Vec<usize> = (0..examples.len()).collect();
    let root = grow(examples, &idxs, hp.min_leaf, &mut None);
    Ok(ModelParams::Tree { root })
}

/// Trains a bootstrap ensemble. With `sample_features` each split considers
/// a random sqrt-sized feature subset (random forest); without it every
/// varying feature competes (bagging). Per-tree RNG streams are derived
/// from (seed, tree index), so the parallel loop is deterministic.
pub(super) fn train_forest(
    examples: &[FeatureVector],
    hp: &Hyperparams,
    seed: u64,
    sample_features: bool,
) -> Result<ModelParams> {
    let n_trees = if sample_features {
        hp.rf_trees
    } else {
        hp.bagging_trees
    };
    let everywhere: Vec<usize> = (0..examples.len()).collect();
    let pool = varying_features(examples, &everywhere);
    let mtry = (pool.len() as f64).sqrt().ceil().max(1.0) as usize;

    let trees: Vec<TreeNode> = (0..n_trees)
        .into_par_iter()
        .map(|tree_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(tree_index as u64);
            let bootstrap: Vec<usize> = (0..examples.len())
                .map(|_| rng.gen_range(0..examples.len()))
                .collect();
            let mut sampler = sample_features.then(|| FeatureSampler {
                rng,
                pool: &pool,
                mtry,
            });
            grow(examples, &bootstrap, hp.min_leaf, &mut sampler)
        })
        .collect();
    Ok(ModelParams::Forest { trees })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{fv, separable_set};
    use super::super::{predict, train as train_model, Algorithm, Hyperparams, ModelParams};
    use super::*;

    fn training_set() -> Vec<FeatureVector> {
        vec![
            fv(&[(0, 0.5), (3, 0.2)], true),
            fv(&[(0, 0.5), (4, 0.2)], true),
            fv(&[(0, 0.5), (1, 0.3)], true),
            fv(&[(1, 0.5), (3, 0.2)], false),
            fv(&[(1, 0.5), (4, 0.2)], false),
            fv(&[(2, 0.5), (4, 0.2)], false),
        ]
    }

    /// Walks every split and recomputes its gain ratio from the very
    /// training subset that reached it.
    fn audit_splits(node: &TreeNode, examples: &[FeatureVector], idxs: &[usize]) {
        let TreeNode::Split {
            feature,
            gain_ratio,
            present,
            absent,
        } = node
        else {
            return;
        };
        let labels: Vec<bool> = idxs.iter().map(|&i| examples[i].label.unwrap()).collect();
        let presence: Vec<bool> = idxs
            .iter()
            .map(|&i| examples[i].get(*feature) > 0.0)
            .collect();
        let recomputed = presence_gain_ratio(&presence, &labels);
        assert!(
            (gain_ratio - recomputed).abs() < 1e-9,
            "stored {gain_ratio} vs recomputed {recomputed}"
        );
        let present_idxs: Vec<usize> = idxs
            .iter()
            .zip(&presence)
            .filter(|&(_, &p)| p)
            .map(|(&i, _)| i)
            .collect();
        let absent_idxs: Vec<usize> = idxs
            .iter()
            .zip(&presence)
            .filter(|&(_, &p)| !p)
            .map(|(&i, _)| i)
            .collect();
        audit_splits(present, examples, &present_idxs);
        audit_splits(absent, examples, &absent_idxs);
    }

    #[test]
    fn stored_split_scores_match_recomputation() {
        let examples = training_set();
        let hp = Hyperparams {
            min_leaf: 1,
            ..Hyperparams::default()
        };
        let model = train_model(Algorithm::Dt, &examples, &hp, 42).unwrap();
        let ModelParams::Tree { root } = &model.params else {
            panic!("dt trains a tree");
        };
        let idxs: Vec<usize> = (0..examples.len()).collect();
        audit_splits(root, &examples, &idxs);
    }

    #[test]
    fn root_picks_the_strongest_feature() {
        // Feature 0 splits perfectly; features 3/4 are noise.
        let examples = training_set();
        let hp = Hyperparams {
            min_leaf: 1,
            ..Hyperparams::default()
        };
        let model = train_model(Algorithm::Dt, &examples, &hp, 42).unwrap();
        let ModelParams::Tree { root } = &model.params else {
            panic!("dt trains a tree");
        };
        let TreeNode::Split { feature, .. } = root else {
            panic!("root must split");
        };
        assert_eq!(*feature, 0);
        for example in &examples {
            let (label, _) = predict(&model, example);
            assert_eq!(label, example.label.unwrap());
        }
    }

    #[test]
    fn min_leaf_blocks_small_splits() {
        // Only 1 positive: any split isolating it leaves a 1-example side,
        // so min_leaf = 2 forces a single leaf.
        let examples = vec![
            fv(&[(0, 1.0)], true),
            fv(&[(1, 1.0)], false),
            fv(&[(1, 1.0)], false),
            fv(&[(1, 1.0)], false),
        ];
        let model = train_model(Algorithm::Dt, &examples, &Hyperparams::default(), 42).unwrap();
        let ModelParams::Tree { root } = &model.params else {
            panic!("dt trains a tree");
        };
        assert!(matches!(root, TreeNode::Leaf { samples: 4, .. }));
    }

    #[test]
    fn pure_nodes_become_leaves() {
        let examples = separable_set(10);
        let hp = Hyperparams {
            min_leaf: 1,
            ..Hyperparams::default()
        };
        let model = train_model(Algorithm::Dt, &examples, &hp, 42).unwrap();
        let ModelParams::Tree { root } = &model.params else {
            panic!("dt trains a tree");
        };
        fn check(node: &TreeNode) {
            match node {
                TreeNode::Leaf { prob_positive, .. } => {
                    assert!(*prob_positive == 0.0 || *prob_positive == 1.0);
                }
                TreeNode::Split {
                    present, absent, ..
                } => {
                    check(present);
                    check(absent);
                }
            }
        }
        check(root);
    }

    #[test]
    fn ensembles_train_and_classify() {
        let examples = separable_set(30);
        let hp = Hyperparams {
            rf_trees: 20,
            bagging_trees: 20,
            ..Hyperparams::default()
        };
        let rf = train_model(Algorithm::Rf, &examples, &hp, 42).unwrap();
        let bagging = train_model(Algorithm::Bagging, &examples, &hp, 42).unwrap();
        let (ModelParams::Forest { trees: rf_trees }, ModelParams::Forest { trees: bag_trees }) =
            (&rf.params, &bagging.params)
        else {
            panic!("ensembles train forests");
        };
        assert_eq!(rf_trees.len(), 20);
        assert_eq!(bag_trees.len(), 20);
        // Both ensembles classify the training set correctly.
        for example in examples.iter().take(20) {
            let (rf_label, _) = predict(&rf, example);
            let (bag_label, _) = predict(&bagging, example);
            assert_eq!(rf_label, example.label.unwrap());
            assert_eq!(bag_label, example.label.unwrap());
        }
    }
}
