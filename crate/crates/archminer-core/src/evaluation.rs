//! Evaluation: confusion-matrix metrics, the confirmed-share performance
//! figure, inter-annotator agreement, human verdict logs, and the
//! with/without-dictionary ablation report.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::classifiers::Algorithm;
use crate::corpus::PostId;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(predictions: &[bool], truth: &[bool]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(CoreError::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(CoreError::invalid_data(
            "confusion",
            "at least one prediction is required",
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        match (p, t) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Precision, recall, and F-measure with the zero-denominator conventions:
/// precision is 0 when nothing was predicted positive, recall is 0 when
/// nothing is truly positive, and F is 0 when both are 0.
pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let precision = if cm.tp + cm.fp == 0 {
        0.0
    } else {
        cm.tp as f64 / (cm.tp + cm.fp) as f64
    };
    let recall = if cm.tp + cm.fn_ == 0 {
        0.0
    } else {
        cm.tp as f64 / (cm.tp + cm.fn_) as f64
    };
    Metrics {
        precision,
        recall,
        f_measure: f_measure(precision, recall),
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Share of mined instances that human review confirmed, as a percentage.
/// Reported to one decimal place.
pub fn performance(confirmed: u64, total_mined: u64) -> Result<f64> {
    if total_mined == 0 || confirmed > total_mined {
        return Err(CoreError::InvalidTotal {
            confirmed,
            total: total_mined,
        });
    }
    Ok(100.0 * confirmed as f64 / total_mined as f64)
}

/// Rounds to the given number of decimal places (used by report rendering:
/// three places for metrics, one for the performance percentage).
pub fn round_decimal(value: f64, places: u32) -> f64 {
    let factor = 10f64.powi(places as i32);
    (value * factor).round() / factor
}

/// Cohen's kappa between two annotators' binary labels over the same items:
/// (p_o - p_e) / (1 - p_e). Full agreement with degenerate marginals (p_e =
/// 1) is defined as 1.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CoreError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(CoreError::invalid_data(
            "cohen_kappa",
            "at least two items are required",
        ));
    }
    let n = a.len() as f64;
    let agreements = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let p_o = agreements / n;
    let a_yes = a.iter().filter(|&&x| x).count() as f64 / n;
    let b_yes = b.iter().filter(|&&x| x).count() as f64 / n;
    let p_e = a_yes * b_yes + (1.0 - a_yes) * (1.0 - b_yes);
    if (1.0 - p_e).abs() < 1e-12 {
        // Both annotators are constant; kappa is 1 exactly when they agree.
        return Ok(if (p_o - 1.0).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Flags a class imbalance beyond 60/40 in a labeled training set.
pub fn imbalance_warning(labels: &[bool]) -> Option<String> {
    if labels.is_empty() {
        return None;
    }
    let positive = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
    if !(0.4..=0.6).contains(&positive) {
        Some(format!(
            "class imbalance: {:.1}% positive / {:.1}% negative exceeds 60/40; \
             precision and recall may be skewed",
            100.0 * positive,
            100.0 * (1.0 - positive)
        ))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Human verdicts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    ConfirmedQaAt,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub post_id: PostId,
    pub verdict: VerdictKind,
    pub annotator: String,
    pub timestamp: String,
}

/// How multiple annotators' verdicts combine into a confirmation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmationPolicy {
    /// Confirmed only when at least one annotator confirmed and none
    /// rejected.
    Conservative,
    /// Confirmed when confirmations outnumber rejections.
    Majority,
}

/// An append-only log of human verdicts, at most one per (post, annotator).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerdictLog {
    verdicts: Vec<Verdict>,
    seen: BTreeSet<(u64, String)>,
}

impl VerdictLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, verdict: Verdict) -> Result<()> {
        let key = (verdict.post_id.get(), verdict.annotator.clone());
        if !self.seen.insert(key) {
            return Err(CoreError::invalid_data(
                "VerdictLog",
                format!(
                    "annotator {:?} already gave a verdict for post {}",
                    verdict.annotator, verdict.post_id
                ),
            ));
        }
        self.verdicts.push(verdict);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter()
    }

    pub fn has_verdict(&self, post_id: PostId, annotator: &str) -> bool {
        self.seen.contains(&(post_id.get(), annotator.to_string()))
    }

    pub fn annotators(&self) -> BTreeSet<&str> {
        self.verdicts.iter().map(|v| v.annotator.as_str()).collect()
    }

    /// Posts counted as confirmed under the given policy.
    pub fn confirmed_posts(&self, policy: ConfirmationPolicy) -> BTreeSet<PostId> {
        let mut tally: BTreeMap<PostId, (u64, u64)> = BTreeMap::new();
        for verdict in &self.verdicts {
            let entry = tally.entry(verdict.post_id).or_insert((0, 0));
            match verdict.verdict {
                VerdictKind::ConfirmedQaAt => entry.0 += 1,
                VerdictKind::Rejected => entry.1 += 1,
            }
        }
        tally
            .into_iter()
            .filter(|&(_, (confirmed, rejected))| match policy {
                ConfirmationPolicy::Conservative => confirmed > 0 && rejected == 0,
                ConfirmationPolicy::Majority => confirmed > rejected,
            })
            .map(|(post_id, _)| post_id)
            .collect()
    }

    /// Paired labels (confirmed = true) over the posts both annotators
    /// verdicted, ordered by post id — the input shape Cohen's kappa wants.
    pub fn kappa_labels(&self, annotator_a: &str, annotator_b: &str) -> (Vec<bool>, Vec<bool>) {
        let by_annotator = |name: &str| -> BTreeMap<PostId, bool> {
            self.verdicts
                .iter()
                .filter(|v| v.annotator == name)
                .map(|v| (v.post_id, v.verdict == VerdictKind::ConfirmedQaAt))
                .collect()
        };
        let a = by_annotator(annotator_a);
        let b = by_annotator(annotator_b);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (post_id, &label_a) in &a {
            if let Some(&label_b) = b.get(post_id) {
                left.push(label_a);
                right.push(label_b);
            }
        }
        (left, right)
    }

    /// Parses a JSONL verdict file, re-validating the one-per-pair rule.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut log = VerdictLog::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let verdict: Verdict = serde_json::from_str(&line).map_err(|e| {
                CoreError::malformed(format!("verdict line {}", idx + 1), e.to_string())
            })?;
            log.record(verdict)?;
        }
        Ok(log)
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for verdict in &self.verdicts {
            append_verdict_jsonl(verdict, &mut writer)?;
        }
        Ok(())
    }
}

/// Appends one verdict line; used for crash-safe incremental logging.
pub fn append_verdict_jsonl<W: Write>(verdict: &Verdict, mut writer: W) -> Result<()> {
    serde_json::to_writer(&mut writer, verdict)?;
    writer.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub algorithm: Algorithm,
    pub f_without: f64,
    pub f_with: f64,
    pub delta: f64,
    /// 100 x delta / f_without; absent when the baseline F is 0.
    pub relative_improvement_pct: Option<f64>,
    pub regressed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

/// Side-by-side F-measures with and without dictionary augmentation, per
/// algorithm. Both maps must cover the same algorithms.
pub fn ablation_report(
    without: &BTreeMap<Algorithm, Metrics>,
    with: &BTreeMap<Algorithm, Metrics>,
) -> Result<AblationReport> {
    let keys_without: Vec<Algorithm> = without.keys().copied().collect();
    let keys_with: Vec<Algorithm> = with.keys().copied().collect();
    if keys_without != keys_with {
        return Err(CoreError::invalid_data(
            "ablation_report",
            "the two arms cover different algorithms",
        ));
    }
    let rows = keys_without
        .into_iter()
        .map(|algorithm| {
            let f_without = without[&algorithm].f_measure;
            let f_with = with[&algorithm].f_measure;
            let delta = f_with - f_without;
            AblationRow {
                algorithm,
                f_without,
                f_with,
                delta,
                relative_improvement_pct: (f_without > 0.0).then(|| 100.0 * delta / f_without),
                regressed: f_with < f_without,
            }
        })
        .collect();
    Ok(AblationReport { rows })
}

impl AblationReport {
    pub fn any_regressions(&self) -> bool {
        self.rows.iter().any(|r| r.regressed)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| algorithm | F without dictionary | F with dictionary | delta | relative |\n\
             |---|---|---|---|---|\n",
        );
        for row in &self.rows {
            let relative = match row.relative_improvement_pct {
                Some(pct) => format!("{:+.1}%", round_decimal(pct, 1)),
                None => "n/a".to_string(),
            };
            let flag = if row.regressed { " (regressed)" } else { "" };
            out.push_str(&format!(
                "| {} | {:.3} | {:.3} | {:+.3} | {}{} |\n",
                row.algorithm,
                round_decimal(row.f_without, 3),
                round_decimal(row.f_with, 3),
                round_decimal(row.delta, 3),
                relative,
                flag,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_counts_each_quadrant() {
        let predictions = [true, true, false, false, true];
        let truth = [true, false, true, false, true];
        let cm = confusion(&predictions, &truth).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 2,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        assert_eq!(cm.total(), 5);
        assert!(confusion(&[true], &[]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn metric_conventions_on_zero_denominators() {
        // Nothing predicted positive.
        let m = metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 5,
        });
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f_measure, 0.0);
        // Nothing truly positive.
        let m = metrics(&ConfusionMatrix {
            tp: 0,
            fp: 2,
            fn_: 0,
            tn: 5,
        });
        assert_eq!(m.recall, 0.0);
    }

    #[test]
    fn pinned_metric_values() {
        // F from precision .976 and recall .778.
        let f = f_measure(0.976, 0.778);
        assert!((f - 0.865).abs() < 0.001, "f = {f}");

        // Recall from a full confusion matrix.
        let m = metrics(&ConfusionMatrix {
            tp: 903,
            fp: 20,
            fn_: 259,
            tn: 1400,
        });
        assert!((m.recall - 0.777).abs() < 0.001);
        assert!((m.precision - 903.0 / 923.0).abs() < 1e-12);

        // The harmonic-mean identity holds wherever P + R > 0.
        assert!(
            (m.f_measure - 2.0 * m.precision * m.recall / (m.precision + m.recall)).abs() < 1e-12
        );
    }

    #[test]
    fn performance_percentage() {
        let p = performance(4195, 5103).unwrap();
        assert!((p - 82.2).abs() < 0.05, "performance = {p}");
        assert_eq!(round_decimal(p, 1), 82.2);
        assert_eq!(performance(0, 10).unwrap(), 0.0);
        assert_eq!(performance(10, 10).unwrap(), 100.0);
        assert!(matches!(
            performance(1, 0),
            Err(CoreError::InvalidTotal { .. })
        ));
        assert!(matches!(
            performance(11, 10),
            Err(CoreError::InvalidTotal { .. })
        ));
    }

    #[test]
    fn kappa_pinned_table() {
        // Agreement table [[20, 5], [10, 15]]: 20 joint yes, 15 joint no,
        // 5 A-yes/B-no, 10 A-no/B-yes.
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..20 {
            a.push(true);
            b.push(true);
        }
        for _ in 0..5 {
            a.push(true);
            b.push(false);
        }
        for _ in 0..10 {
            a.push(false);
            b.push(true);
        }
        for _ in 0..15 {
            a.push(false);
            b.push(false);
        }
        let kappa = cohen_kappa(&a, &b).unwrap();
        assert!((kappa - 0.400).abs() < 1e-9, "kappa = {kappa}");
        // Symmetry.
        assert_eq!(kappa, cohen_kappa(&b, &a).unwrap());
    }

    #[test]
    fn kappa_edge_cases() {
        // Identical constant labels: chance agreement is total, defined as 1.
        assert_eq!(cohen_kappa(&[true, true], &[true, true]).unwrap(), 1.0);
        // Perfect agreement with varied labels.
        let a = [true, false, true, false];
        assert!((cohen_kappa(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        // Perfect disagreement with constant marginals on each side.
        let kappa = cohen_kappa(&[true, false], &[false, true]).unwrap();
        assert!(kappa < 0.0);
        assert!(cohen_kappa(&[true], &[true]).is_err());
        assert!(matches!(
            cohen_kappa(&[true, false], &[true]),
            Err(CoreError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn imbalance_warnings() {
        let balanced: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        assert!(imbalance_warning(&balanced).is_none());
        let mut skewed = vec![true; 7];
        skewed.extend([false; 3]);
        let warning = imbalance_warning(&skewed).unwrap();
        assert!(warning.contains("imbalance"));
        assert!(imbalance_warning(&[]).is_none());
    }

    fn verdict(post: u64, kind: VerdictKind, who: &str) -> Verdict {
        Verdict {
            post_id: PostId::new(post),
            verdict: kind,
            annotator: who.to_string(),
            timestamp: "2020-06-01T00:00:00Z".to_string(),
        }
    }

    #[test]
    fn verdict_log_enforces_one_per_pair() {
        let mut log = VerdictLog::new();
        log.record(verdict(1, VerdictKind::ConfirmedQaAt, "ann1")).unwrap();
        log.record(verdict(1, VerdictKind::Rejected, "ann2")).unwrap();
        assert!(log.record(verdict(1, VerdictKind::Rejected, "ann1")).is_err());
        assert_eq!(log.len(), 2);
        assert!(log.has_verdict(PostId::new(1), "ann1"));
        assert!(!log.has_verdict(PostId::new(2), "ann1"));
    }

    #[test]
    fn confirmation_policies() {
        let mut log = VerdictLog::new();
        // Post 1: confirmed by both.
        log.record(verdict(1, VerdictKind::ConfirmedQaAt, "ann1")).unwrap();
        log.record(verdict(1, VerdictKind::ConfirmedQaAt, "ann2")).unwrap();
        // Post 2: split 2-1 in favor.
        log.record(verdict(2, VerdictKind::ConfirmedQaAt, "ann1")).unwrap();
        log.record(verdict(2, VerdictKind::ConfirmedQaAt, "ann3")).unwrap();
        log.record(verdict(2, VerdictKind::Rejected, "ann2")).unwrap();
        // Post 3: rejected outright.
        log.record(verdict(3, VerdictKind::Rejected, "ann1")).unwrap();

        let conservative = log.confirmed_posts(ConfirmationPolicy::Conservative);
        assert_eq!(conservative, [PostId::new(1)].into_iter().collect());
        let majority = log.confirmed_posts(ConfirmationPolicy::Majority);
        assert_eq!(
            majority,
            [PostId::new(1), PostId::new(2)].into_iter().collect()
        );
    }

    #[test]
    fn verdict_jsonl_round_trip() {
        let mut log = VerdictLog::new();
        log.record(verdict(10, VerdictKind::ConfirmedQaAt, "ann1")).unwrap();
        log.record(verdict(11, VerdictKind::Rejected, "ann1")).unwrap();
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        let back = VerdictLog::from_jsonl(buf.as_slice()).unwrap();
        assert_eq!(log, back);
        // A duplicated line must be rejected on load.
        let mut doubled = buf.clone();
        doubled.extend_from_slice(&buf);
        assert!(VerdictLog::from_jsonl(doubled.as_slice()).is_err());
    }

    #[test]
    fn kappa_labels_align_on_common_posts() {
        let mut log = VerdictLog::new();
        log.record(verdict(1, VerdictKind::ConfirmedQaAt, "ann1")).unwrap();
        log.record(verdict(1, VerdictKind::ConfirmedQaAt, "ann2")).unwrap();
        log.record(verdict(2, VerdictKind::Rejected, "ann1")).unwrap();
        log.record(verdict(2, VerdictKind::ConfirmedQaAt, "ann2")).unwrap();
        log.record(verdict(3, VerdictKind::ConfirmedQaAt, "ann1")).unwrap(); // ann2 missing
        let (a, b) = log.kappa_labels("ann1", "ann2");
        assert_eq!(a, vec![true, false]);
        assert_eq!(b, vec![true, true]);
    }

    fn flat_metrics(f: f64) -> Metrics {
        Metrics {
            precision: f,
            recall: f,
            f_measure: f,
        }
    }

    #[test]
    fn ablation_rows_and_flags() {
        let mut without = BTreeMap::new();
        let mut with = BTreeMap::new();
        for algorithm in Algorithm::ALL {
            without.insert(algorithm, flat_metrics(0.72));
            with.insert(algorithm, flat_metrics(0.865));
        }
        without.insert(Algorithm::Dt, flat_metrics(0.80));
        with.insert(Algorithm::Dt, flat_metrics(0.75)); // a regression
        without.insert(Algorithm::Lr, flat_metrics(0.0));

        let report = ablation_report(&without, &with).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report.any_regressions());

        let svm = report
            .rows
            .iter()
            .find(|r| r.algorithm == Algorithm::Svm)
            .unwrap();
        assert!((svm.delta - 0.145).abs() < 1e-12);
        let pct = svm.relative_improvement_pct.unwrap();
        assert!((pct - 19.9).abs() < 0.5, "relative = {pct}");
        assert!(!svm.regressed);

        let dt = report.rows.iter().find(|r| r.algorithm == Algorithm::Dt).unwrap();
        assert!(dt.regressed);

        let lr = report.rows.iter().find(|r| r.algorithm == Algorithm::Lr).unwrap();
        assert_eq!(lr.relative_improvement_pct, None);

        let markdown = report.to_markdown();
        assert!(markdown.contains("| svm | 0.720 | 0.865 | +0.145 |"));
        assert!(markdown.contains("(regressed)"));
        assert!(markdown.contains("n/a"));
    }

    #[test]
    fn ablation_requires_matching_algorithms() {
        let mut without = BTreeMap::new();
        without.insert(Algorithm::Svm, flat_metrics(0.5));
        let with = BTreeMap::new();
        assert!(ablation_report(&without, &with).is_err());
    }

    #[test]
    fn rounding_conventions() {
        assert_eq!(round_decimal(0.86584, 3), 0.866);
        assert_eq!(round_decimal(82.20654, 1), 82.2);
        assert_eq!(round_decimal(0.7775, 3), 0.778);
    }
}
