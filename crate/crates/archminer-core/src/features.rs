//! TF-IDF vectorization, gain-ratio feature selection, and dictionary
//! augmentation of the feature space.
//!
//! A [`Vectorizer`] is fit once on a training corpus and then reused to
//! transform any document into a sparse feature vector. Selection narrows the
//! active features to the most label-informative terms, but dictionary terms
//! are always kept active: the augmentation step is what lets dictionary
//! knowledge reach the classifiers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dictionary::{presence_gain_ratio, Dictionary};
use crate::error::{CoreError, Result};
use crate::preprocess::TokenizedDoc;

/// Default number of features retained by top-k selection.
pub const DEFAULT_TOP_K: usize = 2000;

/// How [`select_features`] picks the active feature set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Keep the k highest-gain-ratio terms (ties broken lexicographically).
    TopK(usize),
    /// Keep every term whose gain ratio is strictly above the threshold.
    Threshold(f64),
}

impl Default for SelectionRule {
    fn default() -> Self {
        SelectionRule::TopK(DEFAULT_TOP_K)
    }
}

/// A sparse feature vector: feature index -> weight, plus an optional label.
/// Zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub weights: BTreeMap<usize, f64>,
    pub label: Option<bool>,
}

impl FeatureVector {
    pub fn get(&self, index: usize) -> f64 {
        self.weights.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(&i, &w)| (i, w))
    }
}

/// TF-IDF vocabulary, learned document frequencies, and the active-feature
/// mask. Feature indices are stable for the lifetime of the vectorizer:
/// fitting assigns lexicographic indices and augmentation only appends.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectorizer {
    /// Term -> feature index.
    vocab: BTreeMap<String, usize>,
    /// Feature index -> term (inverse of `vocab`).
    terms: Vec<String>,
    /// Feature index -> inverse document frequency, ln(N / df).
    idf: Vec<f64>,
    /// Feature index -> participates in transforms.
    selected: Vec<bool>,
    /// Terms force-kept by dictionary augmentation.
    dictionary_terms: BTreeSet<String>,
    /// Number of documents the vectorizer was fit on.
    doc_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VectorizerJson {
    terms: Vec<String>,
    idf: Vec<f64>,
    selected: Vec<bool>,
    dictionary_terms: Vec<String>,
    doc_count: usize,
}

/// Fits TF-IDF statistics on a corpus. The vocabulary is every distinct
/// token, indexed lexicographically; every feature starts selected.
pub fn fit_tfidf(docs: &[TokenizedDoc]) -> Result<Vectorizer> {
    if docs.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for term in doc.token_counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let n = docs.len() as f64;
    let mut vocab = BTreeMap::new();
    let mut terms = Vec::with_capacity(df.len());
    let mut idf = Vec::with_capacity(df.len());
    for (index, (term, count)) in df.into_iter().enumerate() {
        vocab.insert(term.to_string(), index);
        terms.push(term.to_string());
        idf.push((n / count as f64).ln());
    }
    let selected = vec![true; terms.len()];
    Ok(Vectorizer {
        vocab,
        terms,
        idf,
        selected,
        dictionary_terms: BTreeSet::new(),
        doc_count: docs.len(),
    })
}

impl Vectorizer {
    pub fn vocab_len(&self) -> usize {
        self.terms.len()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocab.get(term).copied()
    }

    pub fn term_at(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.selected.get(index).copied().unwrap_or(false)
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn dictionary_terms(&self) -> &BTreeSet<String> {
        &self.dictionary_terms
    }

    /// IDF of a term, falling back to the smoothed unseen-term value
    /// ln(doc_count + 1) for out-of-vocabulary terms.
    pub fn idf_or_unseen(&self, term: &str) -> f64 {
        match self.vocab.get(term) {
            Some(&index) => self.idf[index],
            None => self.unseen_idf(),
        }
    }

    fn unseen_idf(&self) -> f64 {
        (self.doc_count as f64 + 1.0).ln()
    }

    /// Transforms a document into a sparse TF-IDF vector over the active
    /// features: weight = (tf / doc length) x idf. Inactive terms,
    /// out-of-vocabulary terms, and zero weights are omitted.
    pub fn transform(&self, doc: &TokenizedDoc) -> FeatureVector {
        let mut weights = BTreeMap::new();
        for (term, &count) in &doc.token_counts {
            let Some(&index) = self.vocab.get(term) else {
                continue;
            };
            if !self.selected[index] {
                continue;
            }
            let weight = f64::from(count) / doc.length as f64 * self.idf[index];
            if weight != 0.0 {
                weights.insert(index, weight);
            }
        }
        FeatureVector {
            weights,
            label: None,
        }
    }

    /// Transforms a labeled batch.
    pub fn transform_labeled(&self, docs: &[TokenizedDoc], labels: &[bool]) -> Result<Vec<FeatureVector>> {
        if docs.len() != labels.len() {
            return Err(CoreError::LengthMismatch {
                left: docs.len(),
                right: labels.len(),
            });
        }
        Ok(docs
            .iter()
            .zip(labels)
            .map(|(doc, &label)| {
                let mut fv = self.transform(doc);
                fv.label = Some(label);
                fv
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let doc = VectorizerJson {
            terms: self.terms.clone(),
            idf: self.idf.clone(),
            selected: self.selected.clone(),
            dictionary_terms: self.dictionary_terms.iter().cloned().collect(),
            doc_count: self.doc_count,
        };
        serde_json::to_string_pretty(&doc).expect("vectorizer serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: VectorizerJson = serde_json::from_str(text)?;
        if doc.terms.len() != doc.idf.len() || doc.terms.len() != doc.selected.len() {
            return Err(CoreError::invalid_data(
                "Vectorizer",
                "terms/idf/selected lengths disagree",
            ));
        }
        let mut vocab = BTreeMap::new();
        for (index, term) in doc.terms.iter().enumerate() {
            if vocab.insert(term.clone(), index).is_some() {
                return Err(CoreError::invalid_data("Vectorizer", "duplicate term"));
            }
        }
        Ok(Vectorizer {
            vocab,
            terms: doc.terms,
            idf: doc.idf,
            selected: doc.selected,
            dictionary_terms: doc.dictionary_terms.into_iter().collect(),
            doc_count: doc.doc_count,
        })
    }
}

/// Narrows the active features by per-term label gain ratio. Dictionary
/// terms already present in the vocabulary stay selected regardless of rank.
pub fn select_features(
    vectorizer: &Vectorizer,
    docs: &[TokenizedDoc],
    labels: &[bool],
    rule: SelectionRule,
) -> Result<Vectorizer> {
    if docs.len() != labels.len() {
        return Err(CoreError::LengthMismatch {
            left: docs.len(),
            right: labels.len(),
        });
    }
    if docs.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(CoreError::DegenerateLabels);
    }

    let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(vectorizer.terms.len());
    for (index, term) in vectorizer.terms.iter().enumerate() {
        let presence: Vec<bool> = docs.iter().map(|d| d.contains(term)).collect();
        ranked.push((index, presence_gain_ratio(&presence, labels)));
    }
    // Rank by gain ratio descending; ties fall back to the lexicographic
    // index order, so selection never inverts the ranking.
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("gain ratios are finite")
            .then_with(|| a.0.cmp(&b.0))
    });

    let mut selected = vec![false; vectorizer.terms.len()];
    match rule {
        SelectionRule::TopK(k) => {
            for &(index, _) in ranked.iter().take(k) {
                selected[index] = true;
            }
        }
        SelectionRule::Threshold(threshold) => {
            for &(index, gr) in &ranked {
                if gr > threshold {
                    selected[index] = true;
                }
            }
        }
    }
    for term in &vectorizer.dictionary_terms {
        if let Some(&index) = vectorizer.vocab.get(term) {
            selected[index] = true;
        }
    }

    let mut out = vectorizer.clone();
    out.selected = selected;
    Ok(out)
}

/// Adds every dictionary term to the vectorizer: terms already in the
/// vocabulary are marked selected; absent terms are appended with the
/// smoothed unseen-term IDF. Existing indices never change, and augmenting
/// twice with the same dictionary is a no-op.
pub fn augment_with_dictionary(vectorizer: &Vectorizer, dict: &Dictionary) -> Vectorizer {
    let mut out = vectorizer.clone();
    for entry in dict.entries() {
        match out.vocab.get(&entry.term) {
            Some(&index) => {
                out.selected[index] = true;
            }
            None => {
                let index = out.terms.len();
                out.vocab.insert(entry.term.clone(), index);
                out.terms.push(entry.term.clone());
                out.idf.push(out.unseen_idf());
                out.selected.push(true);
            }
        }
        out.dictionary_terms.insert(entry.term.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PostId;
    use crate::dictionary::{DictEntry, Dictionary, TermOrigin};

    fn doc(id: u64, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc::new(PostId::new(id), tokens.iter().map(|s| s.to_string()).collect())
            .unwrap()
    }

    fn small_corpus() -> Vec<TokenizedDoc> {
        vec![
            doc(1, &["heartbeat", "monitor", "latency"]),
            doc(2, &["heartbeat", "failover"]),
            doc(3, &["monitor", "monitor", "throughput"]),
            doc(4, &["latency", "throughput"]),
        ]
    }

    fn dict_of(terms: &[&str]) -> Dictionary {
        let entries = terms
            .iter()
            .map(|t| DictEntry {
                term: t.to_string(),
                gain_ratio: 0.5,
                origin: TermOrigin::Seed,
                iteration_added: 0,
            })
            .collect();
        Dictionary::from_parts(entries, vec![]).unwrap()
    }

    #[test]
    fn fit_assigns_lexicographic_indices_and_idf() {
        let v = fit_tfidf(&small_corpus()).unwrap();
        assert_eq!(v.vocab_len(), 5);
        assert_eq!(v.term_at(0), Some("failover"));
        assert_eq!(v.term_at(1), Some("heartbeat"));
        assert_eq!(v.term_at(4), Some("throughput"));
        // df(heartbeat) = 2 over 4 docs.
        let idx = v.index_of("heartbeat").unwrap();
        assert!((v.idf[idx] - (4.0f64 / 2.0).ln()).abs() < 1e-12);
        // df(failover) = 1.
        let idx = v.index_of("failover").unwrap();
        assert!((v.idf[idx] - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_empty_corpus() {
        assert!(matches!(fit_tfidf(&[]), Err(CoreError::EmptyCorpus)));
    }

    #[test]
    fn fit_is_deterministic() {
        let a = fit_tfidf(&small_corpus()).unwrap();
        let b = fit_tfidf(&small_corpus()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transform_weights_and_omits_zeros() {
        let corpus = small_corpus();
        let v = fit_tfidf(&corpus).unwrap();
        let fv = v.transform(&corpus[2]); // monitor x2, throughput
        let monitor = v.index_of("monitor").unwrap();
        let throughput = v.index_of("throughput").unwrap();
        assert!((fv.get(monitor) - 2.0 / 3.0 * (4.0f64 / 2.0).ln()).abs() < 1e-12);
        assert!((fv.get(throughput) - 1.0 / 3.0 * (4.0f64 / 2.0).ln()).abs() < 1e-12);
        assert_eq!(fv.weights.len(), 2);

        // A term present in every doc has idf 0 and must be omitted.
        let all = vec![
            doc(1, &["common", "alpha"]),
            doc(2, &["common", "beta"]),
        ];
        let v = fit_tfidf(&all).unwrap();
        let fv = v.transform(&all[0]);
        assert_eq!(fv.get(v.index_of("common").unwrap()), 0.0);
        assert!(fv.weights.contains_key(&v.index_of("alpha").unwrap()));
    }

    #[test]
    fn transform_ignores_unknown_terms() {
        let corpus = small_corpus();
        let v = fit_tfidf(&corpus).unwrap();
        let outside = doc(9, &["unknownterm", "heartbeat"]);
        let fv = v.transform(&outside);
        assert_eq!(fv.weights.len(), 1);
        assert!(fv.weights.contains_key(&v.index_of("heartbeat").unwrap()));
    }

    #[test]
    fn selection_keeps_informative_terms() {
        let docs = vec![
            doc(1, &["signal", "noise"]),
            doc(2, &["signal", "filler"]),
            doc(3, &["noise", "filler"]),
            doc(4, &["filler", "other"]),
        ];
        let labels = vec![true, true, false, false];
        let v = fit_tfidf(&docs).unwrap();
        let selected = select_features(&v, &docs, &labels, SelectionRule::TopK(1)).unwrap();
        // "signal" splits the labels perfectly and must be the single pick.
        assert!(selected.is_selected(selected.index_of("signal").unwrap()));
        assert_eq!(selected.selected_count(), 1);

        let thresholded =
            select_features(&v, &docs, &labels, SelectionRule::Threshold(0.9)).unwrap();
        assert!(thresholded.is_selected(thresholded.index_of("signal").unwrap()));
        assert_eq!(thresholded.selected_count(), 1);
    }

    #[test]
    fn selection_rejects_degenerate_labels() {
        let docs = vec![doc(1, &["aaa"]), doc(2, &["bbb"])];
        let v = fit_tfidf(&docs).unwrap();
        let err = select_features(&v, &docs, &[true, true], SelectionRule::TopK(1));
        assert!(matches!(err, Err(CoreError::DegenerateLabels)));
    }

    #[test]
    fn dictionary_terms_survive_selection() {
        let docs = vec![
            doc(1, &["signal", "heartbeat"]),
            doc(2, &["signal", "filler"]),
            doc(3, &["filler", "heartbeat"]),
            doc(4, &["noise", "filler"]),
        ];
        let labels = vec![true, true, false, false];
        let v = fit_tfidf(&docs).unwrap();
        let v = augment_with_dictionary(&v, &dict_of(&["heartbeat"]));
        // "heartbeat" has zero gain ratio here, yet selection must keep it.
        let selected = select_features(&v, &docs, &labels, SelectionRule::TopK(1)).unwrap();
        assert!(selected.is_selected(selected.index_of("heartbeat").unwrap()));
        assert!(selected.is_selected(selected.index_of("signal").unwrap()));
    }

    #[test]
    fn augmentation_appends_without_moving_indices() {
        let corpus = small_corpus();
        let v = fit_tfidf(&corpus).unwrap();
        let before: Vec<Option<usize>> =
            ["failover", "heartbeat", "monitor"].iter().map(|t| v.index_of(t)).collect();
        let augmented = augment_with_dictionary(&v, &dict_of(&["timeout", "heartbeat"]));
        let after: Vec<Option<usize>> =
            ["failover", "heartbeat", "monitor"].iter().map(|t| augmented.index_of(t)).collect();
        assert_eq!(before, after);
        let timeout = augmented.index_of("timeout").unwrap();
        assert_eq!(timeout, v.vocab_len());
        assert!(augmented.is_selected(timeout));
        assert!((augmented.idf[timeout] - (4.0f64 + 1.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn augmentation_is_idempotent() {
        let v = fit_tfidf(&small_corpus()).unwrap();
        let dict = dict_of(&["timeout", "heartbeat"]);
        let once = augment_with_dictionary(&v, &dict);
        let twice = augment_with_dictionary(&once, &dict);
        assert_eq!(once, twice);
    }

    #[test]
    fn json_round_trip() {
        let corpus = small_corpus();
        let labels = vec![true, false, true, false];
        let v = fit_tfidf(&corpus).unwrap();
        let v = select_features(&v, &corpus, &labels, SelectionRule::TopK(3)).unwrap();
        let v = augment_with_dictionary(&v, &dict_of(&["timeout"]));
        let back = Vectorizer::from_json(&v.to_json()).unwrap();
        assert_eq!(v, back);
        // Transforms agree after the round trip.
        let fv_a = v.transform(&corpus[0]);
        let fv_b = back.transform(&corpus[0]);
        assert_eq!(fv_a, fv_b);
    }

    #[test]
    fn from_json_rejects_inconsistent_lengths() {
        let bad = r#"{"terms":["aaa"],"idf":[0.1,0.2],"selected":[true],"dictionary_terms":[],"doc_count":1}"#;
        assert!(Vectorizer::from_json(bad).is_err());
    }
}
