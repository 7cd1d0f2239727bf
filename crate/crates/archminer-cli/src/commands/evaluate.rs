//! `evaluate`: held-out metrics for trained models, the
//! with/without-dictionary ablation, and inter-annotator agreement.
//!
//! Metrics are computed on the test side of the same seeded split `train`
//! used; each model's fingerprint is checked against that split so metrics
//! are never reported for a model trained on different data.

use std::collections::BTreeMap;

use archminer_core::classifiers::{self, Algorithm};
use archminer_core::dictionary::Dictionary;
use archminer_core::evaluation::{self, ConfusionMatrix, Metrics};
use archminer_core::features::{
    augment_with_dictionary, fit_tfidf, select_features, FeatureVector,
};
use archminer_core::preprocess::TokenizedDoc;
use serde::Serialize;

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Serialize)]
struct AlgorithmReport {
    precision: f64,
    recall: f64,
    f_measure: f64,
    confusion: ConfusionMatrix,
}

fn test_truth(test_set: &[FeatureVector]) -> Vec<bool> {
    test_set
        .iter()
        .map(|fv| fv.label.expect("split keeps labels"))
        .collect()
}

fn evaluate_model(
    model: &classifiers::ClassifierModel,
    test_set: &[FeatureVector],
    truth: &[bool],
) -> Result<(ConfusionMatrix, Metrics)> {
    let predicted: Vec<bool> = classifiers::predict_batch(model, test_set)
        .into_iter()
        .map(|(label, _)| label)
        .collect();
    let cm = evaluation::confusion(&predicted, truth)?;
    Ok((cm, evaluation::metrics(&cm)))
}

fn metrics_markdown(reports: &BTreeMap<String, AlgorithmReport>, notes: &[String]) -> String {
    let mut out = String::from("| algorithm | precision | recall | F-measure |\n|---|---|---|---|\n");
    for (name, report) in reports {
        out.push_str(&format!(
            "| {name} | {:.3} | {:.3} | {:.3} |\n",
            report.precision, report.recall, report.f_measure
        ));
    }
    for note in notes {
        out.push_str(&format!("\n> {note}\n"));
    }
    out
}

pub fn run_metrics(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let labels_path = cfg.paths.labels.clone().ok_or_else(|| {
        CliError::usage("evaluate needs ground-truth labels: set paths.labels in the config")
    })?;

    let mut builder = ManifestBuilder::new(
        "evaluate",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let labeled = data::require_labeled_docs(&mut builder, out, &labels_path)?;
    let vec_json = builder.require_input(out, artifacts::VECTORIZER, "vectorize")?;
    let vectorizer = archminer_core::features::Vectorizer::from_json(
        std::str::from_utf8(&vec_json)
            .map_err(|e| CliError::data(format!("{}: {e}", artifacts::VECTORIZER)))?,
    )?;

    let examples = vectorizer.transform_labeled(&labeled.docs, &labeled.labels)?;
    let (train_set, test_set) = classifiers::split_train_test(examples, &cfg.split)?;
    let truth = test_truth(&test_set);

    let mut reports: BTreeMap<String, AlgorithmReport> = BTreeMap::new();
    for algorithm in Algorithm::ALL {
        let name = artifacts::model_file(algorithm);
        let Some(json) = builder.optional_input(out, &name)? else {
            continue;
        };
        let model = classifiers::ClassifierModel::from_json(
            std::str::from_utf8(&json).map_err(|e| CliError::data(format!("{name}: {e}")))?,
        )?;
        let expected =
            classifiers::train_fingerprint(algorithm, &train_set, &cfg.hyperparams, cfg.seed);
        if model.train_fingerprint != expected {
            return Err(CliError::StaleArtifact {
                path: name,
                producer: "train",
                reason: "the model was trained on a different corpus, vectorizer, or seed"
                    .to_string(),
            });
        }
        let (cm, metrics) = evaluate_model(&model, &test_set, &truth)?;
        reports.insert(
            algorithm.name().to_string(),
            AlgorithmReport {
                precision: metrics.precision,
                recall: metrics.recall,
                f_measure: metrics.f_measure,
                confusion: cm,
            },
        );
    }
    if reports.is_empty() {
        return Err(CliError::MissingArtifact {
            path: out.join(artifacts::model_file(Algorithm::Svm)),
            producer: "train",
        });
    }

    let mut notes = Vec::new();
    if let Some(warning) = evaluation::imbalance_warning(&truth) {
        notes.push(warning);
    }
    if !truth.iter().any(|&l| l) {
        notes.push("the held-out set has no positive posts; recall is 0 by convention".to_string());
    }

    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    builder.write_output(out, artifacts::METRICS_JSON, json.as_bytes())?;
    let markdown = metrics_markdown(&reports, &notes);
    builder.write_output(out, artifacts::METRICS_MD, markdown.as_bytes())?;
    builder.finish(out)?;

    println!(
        "held-out metrics over {} test posts ({} train):",
        test_set.len(),
        train_set.len()
    );
    print!("{markdown}");
    Ok(())
}

/// Trains and scores all six algorithms in one arm of the ablation.
fn ablation_arm(
    docs: &[TokenizedDoc],
    labels: &[bool],
    dict: Option<&Dictionary>,
    resolved: &ResolvedConfig,
) -> Result<BTreeMap<Algorithm, Metrics>> {
    let cfg = &resolved.config;
    let fitted = fit_tfidf(docs)?;
    let base = match dict {
        Some(dict) => augment_with_dictionary(&fitted, dict),
        None => fitted,
    };
    let selected = select_features(&base, docs, labels, cfg.selection)?;
    let examples = selected.transform_labeled(docs, labels)?;
    let (train_set, test_set) = classifiers::split_train_test(examples, &cfg.split)?;
    let truth = test_truth(&test_set);

    let mut arm = BTreeMap::new();
    for algorithm in Algorithm::ALL {
        let model = classifiers::train(algorithm, &train_set, &cfg.hyperparams, cfg.seed)?;
        let (_, metrics) = evaluate_model(&model, &test_set, &truth)?;
        arm.insert(algorithm, metrics);
    }
    Ok(arm)
}

pub fn run_ablation(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let labels_path = cfg.paths.labels.clone().ok_or_else(|| {
        CliError::usage("evaluate needs ground-truth labels: set paths.labels in the config")
    })?;

    let mut builder = ManifestBuilder::new(
        "evaluate-ablation",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let labeled = data::require_labeled_docs(&mut builder, out, &labels_path)?;
    let dict_json = builder.require_input(out, artifacts::DICTIONARY, "dict-expand")?;
    let dict = Dictionary::from_json(
        std::str::from_utf8(&dict_json)
            .map_err(|e| CliError::data(format!("{}: {e}", artifacts::DICTIONARY)))?,
    )?;

    // Both arms rebuild the feature space from scratch so the only
    // difference is dictionary augmentation; the split seed is shared, so
    // both arms hold out the same posts.
    let without = ablation_arm(&labeled.docs, &labeled.labels, None, resolved)?;
    let with = ablation_arm(&labeled.docs, &labeled.labels, Some(&dict), resolved)?;
    let report = evaluation::ablation_report(&without, &with)?;

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    builder.write_output(out, artifacts::ABLATION_JSON, json.as_bytes())?;
    let markdown = report.to_markdown();
    builder.write_output(out, artifacts::ABLATION_MD, markdown.as_bytes())?;
    builder.finish(out)?;

    print!("{markdown}");
    if report.any_regressions() {
        println!("warning: at least one algorithm regressed with the dictionary");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct KappaReport {
    annotator_a: String,
    annotator_b: String,
    common_posts: usize,
    kappa: f64,
}

pub fn run_kappa(
    resolved: &ResolvedConfig,
    epoch: Option<u64>,
    annotator_a: &str,
    annotator_b: &str,
) -> Result<()> {
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "evaluate-kappa",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let verdict_bytes = builder.require_input(out, artifacts::VERDICTS, "review")?;
    let log = evaluation::VerdictLog::from_jsonl(verdict_bytes.as_slice())?;
    let (a, b) = log.kappa_labels(annotator_a, annotator_b);
    if a.len() < 2 {
        return Err(CliError::data(format!(
            "annotators {annotator_a} and {annotator_b} share only {} reviewed posts; \
             at least two are needed",
            a.len()
        )));
    }
    let kappa = evaluation::cohen_kappa(&a, &b)?;
    let report = KappaReport {
        annotator_a: annotator_a.to_string(),
        annotator_b: annotator_b.to_string(),
        common_posts: a.len(),
        kappa,
    };

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    builder.write_output(out, artifacts::KAPPA_JSON, json.as_bytes())?;
    builder.finish(out)?;

    println!(
        "kappa({annotator_a}, {annotator_b}) over {} posts: {:.3}",
        report.common_posts, kappa
    );
    Ok(())
}
