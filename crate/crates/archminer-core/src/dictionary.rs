//! Seed lexicon and embedding-driven dictionary expansion.
//!
//! The seed lexicon maps 21 architecture-tactic names and 8 quality-attribute
//! names to their related term phrases. Expansion grows that lexicon into a
//! semantic network: per iteration, each corpus document nominates its
//! highest-scoring unseen terms (weighted similarity against the current
//! dictionary, capped by the theta * doc-length rule), and a nominee is
//! admitted when its best pairwise embedding similarity to a dictionary term
//! exceeds `sim_threshold` and its label gain ratio exceeds
//! `gain_ratio_threshold`. Admitted terms immediately participate in the same
//! iteration's admission checks, and every admission records
//! similarity-weighted edges, yielding the exportable term network.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::error::{CoreError, Result};
use crate::features::Vectorizer;
use crate::preprocess::{self, PreprocessOptions, StopList, TokenizedDoc};

/// Canonical architecture-tactic names, in presentation order.
pub const AT_NAMES: [&str; 21] = [
    "Heartbeat",
    "Audit trail",
    "Resource pooling",
    "Authentication",
    "Checkpoint",
    "Rollback",
    "Spare",
    "Redundancy replication",
    "Voting",
    "Shadow operation",
    "Secure session",
    "Time out",
    "Time stamp",
    "Sanity checking",
    "Functional redundancy",
    "Scheduling",
    "FIFO",
    "Analytical redundancy",
    "Resisting attacks",
    "Maintain data confidentiality",
    "Recovery from attacks",
];

/// Canonical quality-attribute names, in presentation order.
pub const QA_NAMES: [&str; 8] = [
    "Performance",
    "Maintainability",
    "Compatibility",
    "Usability",
    "Reliability",
    "Functional Suitability",
    "Security",
    "Portability",
];

/// One seed phrase in its raw and stemmed forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPhrase {
    /// Verbatim phrase from the lexicon file.
    pub raw: String,
    /// Stemmed token sequence with stopwords kept — the shape used for
    /// contiguous phrase matching over a post's full token stream.
    pub match_tokens: Vec<String>,
    /// Pipeline-filtered stemmed tokens (stopwords and short tokens removed)
    /// — the single-word shapes that participate in embedding expansion.
    pub content_tokens: Vec<String>,
}

impl SeedPhrase {
    fn new(raw: &str, stoplist: &StopList) -> Result<Self> {
        let match_tokens = preprocess::match_stream(raw);
        if match_tokens.is_empty() {
            return Err(CoreError::invalid_data(
                "SeedLexicon",
                format!("phrase {raw:?} has no alphabetic tokens"),
            ));
        }
        Ok(SeedPhrase {
            raw: raw.to_string(),
            content_tokens: preprocess::pipeline_tokens(
                raw,
                stoplist,
                &PreprocessOptions::default(),
            ),
            match_tokens,
        })
    }
}

/// The shipped tactic/attribute term lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLexicon {
    /// Tactic name -> phrases; exactly the 21 canonical keys.
    pub at_terms: BTreeMap<String, Vec<SeedPhrase>>,
    /// Attribute name -> phrases; exactly the 8 canonical keys.
    pub qa_terms: BTreeMap<String, Vec<SeedPhrase>>,
}

#[derive(Deserialize)]
struct SeedFile {
    at: BTreeMap<String, SeedGroup>,
    qa: BTreeMap<String, SeedGroup>,
}

#[derive(Deserialize)]
struct SeedGroup {
    terms: Vec<String>,
}

impl SeedLexicon {
    /// Parses and validates a seed lexicon from TOML text.
    pub fn parse(toml_text: &str) -> Result<Self> {
        let file: SeedFile = toml::from_str(toml_text)?;
        let stoplist = StopList::standard();
        let at_terms = Self::build_groups(file.at, &AT_NAMES, "at", &stoplist)?;
        let qa_terms = Self::build_groups(file.qa, &QA_NAMES, "qa", &stoplist)?;
        Ok(SeedLexicon { at_terms, qa_terms })
    }

    fn build_groups(
        groups: BTreeMap<String, SeedGroup>,
        expected: &[&str],
        section: &str,
        stoplist: &StopList,
    ) -> Result<BTreeMap<String, Vec<SeedPhrase>>> {
        let found: BTreeSet<&str> = groups.keys().map(String::as_str).collect();
        let wanted: BTreeSet<&str> = expected.iter().copied().collect();
        if found != wanted {
            let missing: Vec<&&str> = wanted.difference(&found).collect();
            let extra: Vec<&&str> = found.difference(&wanted).collect();
            return Err(CoreError::invalid_data(
                "SeedLexicon",
                format!("[{section}] keys mismatch; missing {missing:?}, unexpected {extra:?}"),
            ));
        }
        let mut out = BTreeMap::new();
        for (name, group) in groups {
            if group.terms.is_empty() {
                return Err(CoreError::invalid_data(
                    "SeedLexicon",
                    format!("[{section}.{name:?}] has no terms"),
                ));
            }
            let mut phrases = Vec::new();
            let mut seen = BTreeSet::new();
            for raw in &group.terms {
                if raw.trim().is_empty() {
                    return Err(CoreError::invalid_data(
                        "SeedLexicon",
                        format!("[{section}.{name:?}] contains an empty phrase"),
                    ));
                }
                // Source tables repeat a few phrases; keep the first.
                if seen.insert(raw.as_str()) {
                    phrases.push(SeedPhrase::new(raw, stoplist)?);
                }
            }
            out.insert(name, phrases);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The lexicon shipped with the library.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../data/seeds.toml")).expect("shipped lexicon is valid")
    }

    /// All (category name, phrase) pairs, tactics first.
    pub fn phrases(&self) -> impl Iterator<Item = (Category<'_>, &SeedPhrase)> {
        let ats = self
            .at_terms
            .iter()
            .flat_map(|(name, ps)| ps.iter().map(move |p| (Category::At(name), p)));
        let qas = self
            .qa_terms
            .iter()
            .flat_map(|(name, ps)| ps.iter().map(move |p| (Category::Qa(name), p)));
        ats.chain(qas)
    }

    /// Distinct stemmed content tokens across every phrase — the single-word
    /// seed terms that enter dictionary expansion.
    pub fn content_token_set(&self) -> BTreeSet<String> {
        self.phrases()
            .flat_map(|(_, p)| p.content_tokens.iter().cloned())
            .collect()
    }

    /// Every category whose phrase list involves the given stemmed content
    /// token. Shared vocabulary (e.g. "processor") maps to several.
    pub fn categories_of_content_token(&self, token: &str) -> Vec<Category<'_>> {
        let mut cats = Vec::new();
        for (name, phrases) in &self.at_terms {
            if phrases.iter().any(|p| p.content_tokens.iter().any(|t| t == token)) {
                cats.push(Category::At(name));
            }
        }
        for (name, phrases) in &self.qa_terms {
            if phrases.iter().any(|p| p.content_tokens.iter().any(|t| t == token)) {
                cats.push(Category::Qa(name));
            }
        }
        cats
    }
}

/// A seed category reference: tactic or attribute, by canonical name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category<'a> {
    At(&'a str),
    Qa(&'a str),
}

impl fmt::Display for Category<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::At(n) => write!(f, "AT:{n}"),
            Category::Qa(n) => write!(f, "QA:{n}"),
        }
    }
}

/// A document with normalized per-term weights (the weights sum to 1), the
/// unit that similarity scoring runs over.
#[derive(Debug, Clone)]
pub struct WeightedDoc {
    pub doc: TokenizedDoc,
    pub weights: BTreeMap<String, f64>,
}

/// Builds a [`WeightedDoc`] from TF-IDF weights normalized to sum 1. Terms
/// unknown to the vectorizer get the smoothed unseen-term IDF. When every
/// weight is zero (all terms have zero IDF) the fallback is plain
/// term-frequency normalization.
pub fn weight_doc(doc: &TokenizedDoc, vectorizer: &Vectorizer) -> Result<WeightedDoc> {
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for (term, &count) in &doc.token_counts {
        let tf = f64::from(count) / doc.length as f64;
        weights.insert(term.clone(), tf * vectorizer.idf_or_unseen(term));
    }
    let total: f64 = weights.values().sum();
    if total > 0.0 {
        for w in weights.values_mut() {
            *w /= total;
        }
    } else {
        for (term, w) in weights.iter_mut() {
            *w = f64::from(doc.count(term)) / doc.length as f64;
        }
    }
    Ok(WeightedDoc {
        doc: doc.clone(),
        weights,
    })
}

/// Weighted similarity between a whole document and a term: the sum over the
/// document's distinct terms of weight x cosine(term, query). Document terms
/// outside the embedding vocabulary contribute zero.
pub fn post_term_similarity(
    wdoc: &WeightedDoc,
    term: &str,
    model: &EmbeddingModel,
) -> Result<f64> {
    if !model.contains(term) {
        return Err(CoreError::UnknownTerm(term.to_string()));
    }
    let mut total = 0.0;
    for (doc_term, &weight) in &wdoc.weights {
        if model.contains(doc_term) {
            total += weight * model.similarity(doc_term, term)?;
        }
    }
    Ok(total)
}

/// Like [`post_term_similarity`] but summing only over document terms that
/// are currently in the dictionary — the score used to harvest expansion
/// candidates, so that scores strengthen as the dictionary grows.
fn dictionary_affinity(
    wdoc: &WeightedDoc,
    term: &str,
    model: &EmbeddingModel,
    entries: &BTreeMap<String, DictEntry>,
) -> Result<f64> {
    let mut total = 0.0;
    for (doc_term, &weight) in &wdoc.weights {
        if entries.contains_key(doc_term) && model.contains(doc_term) {
            total += weight * model.similarity(doc_term, term)?;
        }
    }
    Ok(total)
}

/// How many candidate terms one document may nominate per iteration:
/// floor(theta x doc length).
pub fn candidate_count(doc: &TokenizedDoc, theta: f64) -> usize {
    (theta * doc.length as f64).floor() as usize
}

/// Gain ratio of a binary presence split described directly by per-example
/// presence flags: information gain over split information, base-2, with the
/// convention that a degenerate split (all present or all absent) scores 0.
pub fn presence_gain_ratio(presence: &[bool], labels: &[bool]) -> f64 {
    debug_assert_eq!(presence.len(), labels.len());
    let n = labels.len() as f64;
    let mut with = (0u64, 0u64); // (positive, negative) where present
    let mut without = (0u64, 0u64);
    for (&p, &l) in presence.iter().zip(labels) {
        let bucket = if p { &mut with } else { &mut without };
        if l {
            bucket.0 += 1;
        } else {
            bucket.1 += 1;
        }
    }
    let n_with = (with.0 + with.1) as f64;
    let n_without = (without.0 + without.1) as f64;
    if n_with == 0.0 || n_without == 0.0 {
        return 0.0;
    }
    let total_pos = (with.0 + without.0) as f64;
    let parent = binary_entropy(total_pos / n);
    let children = n_with / n * binary_entropy(with.0 as f64 / n_with)
        + n_without / n * binary_entropy(without.0 as f64 / n_without);
    let gain = parent - children;
    let split_info = binary_entropy(n_with / n);
    if split_info == 0.0 {
        return 0.0;
    }
    (gain / split_info).clamp(0.0, 1.0)
}

fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h
}

/// Gain ratio of splitting the labeled corpus on the presence of `term`.
pub fn gain_ratio(term: &str, docs: &[TokenizedDoc], labels: &[bool]) -> Result<f64> {
    if docs.len() != labels.len() {
        return Err(CoreError::LengthMismatch {
            left: docs.len(),
            right: labels.len(),
        });
    }
    if docs.len() < 2 {
        return Err(CoreError::invalid_data(
            "gain_ratio",
            "at least two labeled documents are required",
        ));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(CoreError::DegenerateLabels);
    }
    let presence: Vec<bool> = docs.iter().map(|d| d.contains(term)).collect();
    Ok(presence_gain_ratio(&presence, labels))
}

/// Expansion thresholds and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    /// Pairwise embedding-similarity admission/edge threshold (strict >).
    pub sim_threshold: f64,
    /// Gain-ratio admission threshold (strict >).
    pub gain_ratio_threshold: f64,
    /// Per-document candidate cap factor: a document nominates at most
    /// floor(theta x length) terms per iteration.
    pub theta: f64,
    pub max_iterations: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            sim_threshold: 0.35,
            gain_ratio_threshold: 0.300,
            theta: 0.1,
            max_iterations: 10,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sim_threshold > 0.0 && self.sim_threshold < 1.0) {
            return Err(CoreError::invalid_data(
                "ExpansionConfig",
                "sim_threshold must be in (0, 1)",
            ));
        }
        if !(0.0..=1.0).contains(&self.gain_ratio_threshold) {
            return Err(CoreError::invalid_data(
                "ExpansionConfig",
                "gain_ratio_threshold must be in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(CoreError::invalid_data(
                "ExpansionConfig",
                "theta must be in [0, 1]",
            ));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::invalid_data(
                "ExpansionConfig",
                "max_iterations must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrigin {
    Seed,
    Expanded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictEntry {
    pub term: String,
    pub gain_ratio: f64,
    pub origin: TermOrigin,
    pub iteration_added: u32,
}

/// The expanded dictionary: gain-ratio-weighted terms plus the
/// similarity-weighted edges of the semantic network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    entries: BTreeMap<String, DictEntry>,
    /// Canonical form: endpoint pair sorted lexicographically, list sorted.
    edges: Vec<(String, String, f64)>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryJson {
    entries: Vec<DictEntry>,
    edges: Vec<(String, String, f64)>,
}

impl Dictionary {
    pub fn from_parts(entries: Vec<DictEntry>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for entry in entries {
            if map.insert(entry.term.clone(), entry).is_some() {
                return Err(CoreError::invalid_data("Dictionary", "duplicate term"));
            }
        }
        let mut canonical: Vec<(String, String, f64)> = edges
            .into_iter()
            .map(|(a, b, sim)| if a <= b { (a, b, sim) } else { (b, a, sim) })
            .collect();
        canonical.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        canonical.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        for (a, b, _) in &canonical {
            if !map.contains_key(a) || !map.contains_key(b) {
                return Err(CoreError::invalid_data(
                    "Dictionary",
                    format!("edge ({a}, {b}) references a missing entry"),
                ));
            }
        }
        Ok(Dictionary {
            entries: map,
            edges: canonical,
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictEntry> {
        self.entries.values()
    }

    pub fn get(&self, term: &str) -> Option<&DictEntry> {
        self.entries.get(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn edges(&self) -> &[(String, String, f64)] {
        &self.edges
    }

    /// Terms of expanded origin only.
    pub fn expanded_terms(&self) -> impl Iterator<Item = &DictEntry> {
        self.entries
            .values()
            .filter(|e| e.origin == TermOrigin::Expanded)
    }

    /// Edges incident to `term` as (neighbor, sim), strongest first, ties by
    /// neighbor name.
    pub fn neighbors(&self, term: &str) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self
            .edges
            .iter()
            .filter_map(|(a, b, sim)| {
                if a == term {
                    Some((b.as_str(), *sim))
                } else if b == term {
                    Some((a.as_str(), *sim))
                } else {
                    None
                }
            })
            .collect();
        out.sort_by(|x, y| {
            y.1.partial_cmp(&x.1)
                .expect("similarities are finite")
                .then_with(|| x.0.cmp(y.0))
        });
        out
    }

    /// Structural checks: edge endpoints are entries, expanded entries clear
    /// the gain-ratio gate, seed entries sit at iteration 0.
    pub fn validate(&self, config: &ExpansionConfig) -> Result<()> {
        for entry in self.entries.values() {
            match entry.origin {
                TermOrigin::Seed if entry.iteration_added != 0 => {
                    return Err(CoreError::invalid_data(
                        "Dictionary",
                        format!("seed entry {:?} has nonzero iteration", entry.term),
                    ));
                }
                TermOrigin::Expanded if entry.gain_ratio <= config.gain_ratio_threshold => {
                    return Err(CoreError::invalid_data(
                        "Dictionary",
                        format!("expanded entry {:?} is below the gain-ratio gate", entry.term),
                    ));
                }
                _ => {}
            }
        }
        for (a, b, sim) in &self.edges {
            if !self.entries.contains_key(a) || !self.entries.contains_key(b) {
                return Err(CoreError::invalid_data("Dictionary", "dangling edge"));
            }
            if *sim <= config.sim_threshold {
                return Err(CoreError::invalid_data(
                    "Dictionary",
                    format!("edge ({a}, {b}) similarity {sim} is not above the threshold"),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = DictionaryJson {
            entries: self.entries.values().cloned().collect(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("dictionary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DictionaryJson = serde_json::from_str(text)?;
        Self::from_parts(doc.entries, doc.edges)
    }
}

/// Ranked expanded terms: gain ratio descending, ties lexicographic, top k.
pub fn rank_unseen_terms(dict: &Dictionary, k: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = dict
        .expanded_terms()
        .map(|e| (e.term.clone(), e.gain_ratio))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("gain ratios are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(k);
    ranked
}

/// Grows the seed lexicon into a [`Dictionary`] over the corpus.
///
/// `corpus_docs` is the (noun-filtered) dictionary-training corpus that
/// nominates candidates; `labeled_docs`/`labels` is the labeled classifier
/// corpus that grounds the gain-ratio gate; `vectorizer` supplies the TF-IDF
/// weights behind the document similarity scores.
pub fn expand_dictionary(
    seeds: &SeedLexicon,
    model: &EmbeddingModel,
    corpus_docs: &[TokenizedDoc],
    labeled_docs: &[TokenizedDoc],
    labels: &[bool],
    vectorizer: &Vectorizer,
    config: &ExpansionConfig,
) -> Result<Dictionary> {
    config.validate()?;
    if labeled_docs.len() != labels.len() {
        return Err(CoreError::LengthMismatch {
            left: labeled_docs.len(),
            right: labels.len(),
        });
    }

    let mut entries: BTreeMap<String, DictEntry> = BTreeMap::new();
    for term in seeds.content_token_set() {
        let gr = gain_ratio(&term, labeled_docs, labels)?;
        entries.insert(
            term.clone(),
            DictEntry {
                term,
                gain_ratio: gr,
                origin: TermOrigin::Seed,
                iteration_added: 0,
            },
        );
    }

    let mut edges: Vec<(String, String, f64)> = Vec::new();
    // Seed-to-seed edges.
    let seed_terms: Vec<&str> = entries.keys().map(String::as_str).collect();
    for (i, a) in seed_terms.iter().enumerate() {
        if !model.contains(a) {
            continue;
        }
        for b in &seed_terms[i + 1..] {
            if !model.contains(b) {
                continue;
            }
            let sim = model.similarity(a, b)?;
            if sim > config.sim_threshold {
                edges.push((a.to_string(), b.to_string(), sim));
            }
        }
    }

    let wdocs: Vec<WeightedDoc> = corpus_docs
        .iter()
        .map(|d| weight_doc(d, vectorizer))
        .collect::<Result<_>>()?;

    for iteration in 1..=config.max_iterations as u32 {
        // Harvest: each document nominates its top-N unseen in-vocabulary
        // terms by affinity to the current dictionary.
        let mut nominees: BTreeSet<String> = BTreeSet::new();
        for wdoc in &wdocs {
            let cap = candidate_count(&wdoc.doc, config.theta);
            if cap == 0 {
                continue;
            }
            let mut scored: Vec<(&String, f64)> = Vec::new();
            for term in wdoc.doc.token_counts.keys() {
                if entries.contains_key(term) || !model.contains(term) {
                    continue;
                }
                let score = dictionary_affinity(wdoc, term, model, &entries)?;
                if score > 0.0 {
                    scored.push((term, score));
                }
            }
            scored.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("scores are finite")
                    .then_with(|| a.0.cmp(b.0))
            });
            nominees.extend(scored.into_iter().take(cap).map(|(t, _)| t.clone()));
        }

        // Admission, in lexicographic order; admitted terms join the
        // dictionary immediately and strengthen later checks this iteration.
        let mut admitted_any = false;
        for candidate in nominees {
            let mut best_sim = f64::NEG_INFINITY;
            for term in entries.keys() {
                if model.contains(term) {
                    best_sim = best_sim.max(model.similarity(term, &candidate)?);
                }
            }
            if !(best_sim > config.sim_threshold) {
                continue;
            }
            let gr = gain_ratio(&candidate, labeled_docs, labels)?;
            if !(gr > config.gain_ratio_threshold) {
                continue;
            }
            for term in entries.keys() {
                if !model.contains(term) {
                    continue;
                }
                let sim = model.similarity(term, &candidate)?;
                if sim > config.sim_threshold {
                    edges.push((term.clone(), candidate.clone(), sim));
                }
            }
            entries.insert(
                candidate.clone(),
                DictEntry {
                    term: candidate,
                    gain_ratio: gr,
                    origin: TermOrigin::Expanded,
                    iteration_added: iteration,
                },
            );
            admitted_any = true;
        }
        if !admitted_any {
            break;
        }
    }

    let dict = Dictionary::from_parts(entries.into_values().collect(), edges)?;
    dict.validate(config)?;
    Ok(dict)
}

// ---------------------------------------------------------------------------
// Network exports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    Gexf,
    Dot,
    Json,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the dictionary's semantic network in the requested format. Nodes
/// carry gain_ratio / origin / iteration_added attributes; edges carry the
/// similarity as their weight.
pub fn export_network(dict: &Dictionary, format: NetworkFormat) -> String {
    match format {
        NetworkFormat::Json => dict.to_json(),
        NetworkFormat::Dot => export_dot(dict),
        NetworkFormat::Gexf => export_gexf(dict),
    }
}

fn export_dot(dict: &Dictionary) -> String {
    let mut out = String::from("graph dictionary {\n");
    for entry in dict.entries() {
        let origin = match entry.origin {
            TermOrigin::Seed => "seed",
            TermOrigin::Expanded => "expanded",
        };
        out.push_str(&format!(
            "  \"{}\" [gain_ratio={}, origin={}, iteration_added={}];\n",
            entry.term, entry.gain_ratio, origin, entry.iteration_added
        ));
    }
    for (a, b, sim) in dict.edges() {
        out.push_str(&format!("  \"{a}\" -- \"{b}\" [weight={sim}];\n"));
    }
    out.push_str("}\n");
    out
}

fn export_gexf(dict: &Dictionary) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n");
    out.push_str("  <graph defaultedgetype=\"undirected\">\n");
    out.push_str("    <attributes class=\"node\">\n");
    out.push_str("      <attribute id=\"0\" title=\"gain_ratio\" type=\"double\"/>\n");
    out.push_str("      <attribute id=\"1\" title=\"origin\" type=\"string\"/>\n");
    out.push_str("      <attribute id=\"2\" title=\"iteration_added\" type=\"integer\"/>\n");
    out.push_str("    </attributes>\n");
    out.push_str("    <nodes>\n");
    for entry in dict.entries() {
        let term = xml_escape(&entry.term);
        let origin = match entry.origin {
            TermOrigin::Seed => "seed",
            TermOrigin::Expanded => "expanded",
        };
        out.push_str(&format!("      <node id=\"{term}\" label=\"{term}\">\n"));
        out.push_str("        <attvalues>\n");
        out.push_str(&format!(
            "          <attvalue for=\"0\" value=\"{}\"/>\n",
            entry.gain_ratio
        ));
        out.push_str(&format!("          <attvalue for=\"1\" value=\"{origin}\"/>\n"));
        out.push_str(&format!(
            "          <attvalue for=\"2\" value=\"{}\"/>\n",
            entry.iteration_added
        ));
        out.push_str("        </attvalues>\n");
        out.push_str("      </node>\n");
    }
    out.push_str("    </nodes>\n");
    out.push_str("    <edges>\n");
    for (i, (a, b, sim)) in dict.edges().iter().enumerate() {
        out.push_str(&format!(
            "      <edge id=\"{i}\" source=\"{}\" target=\"{}\" weight=\"{sim}\"/>\n",
            xml_escape(a),
            xml_escape(b)
        ));
    }
    out.push_str("    </edges>\n");
    out.push_str("  </graph>\n");
    out.push_str("</gexf>\n");
    out
}

/// Re-imports a dictionary from the GEXF rendering of [`export_network`].
pub fn import_gexf(text: &str) -> Result<Dictionary> {
    use quick_xml::events::Event;
    use quick_xml::Reader;

    let err = |msg: &str| CoreError::invalid_data("gexf", msg);
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut entries: Vec<DictEntry> = Vec::new();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    let mut current: Option<DictEntry> = None;
    let mut buf = Vec::new();

    loop {
        match reader
            .read_event_into(&mut buf)
            .map_err(|e| err(&e.to_string()))?
        {
            Event::Start(e) | Event::Empty(e) => {
                let name = e.name().as_ref().to_vec();
                let attr = |key: &[u8]| -> Result<Option<String>> {
                    for a in e.attributes() {
                        let a = a.map_err(|e| err(&e.to_string()))?;
                        if a.key.as_ref() == key {
                            return Ok(Some(
                                a.unescape_value()
                                    .map_err(|e| err(&e.to_string()))?
                                    .into_owned(),
                            ));
                        }
                    }
                    Ok(None)
                };
                match name.as_slice() {
                    b"node" => {
                        if let Some(done) = current.take() {
                            entries.push(done);
                        }
                        let id = attr(b"id")?.ok_or_else(|| err("node without id"))?;
                        current = Some(DictEntry {
                            term: id,
                            gain_ratio: 0.0,
                            origin: TermOrigin::Seed,
                            iteration_added: 0,
                        });
                    }
                    b"attvalue" => {
                        if let Some(entry) = current.as_mut() {
                            let for_id = attr(b"for")?.unwrap_or_default();
                            let value = attr(b"value")?.unwrap_or_default();
                            match for_id.as_str() {
                                "0" => {
                                    entry.gain_ratio =
                                        value.parse().map_err(|_| err("bad gain_ratio"))?;
                                }
                                "1" => {
                                    entry.origin = match value.as_str() {
                                        "seed" => TermOrigin::Seed,
                                        "expanded" => TermOrigin::Expanded,
                                        _ => return Err(err("bad origin")),
                                    };
                                }
                                "2" => {
                                    entry.iteration_added =
                                        value.parse().map_err(|_| err("bad iteration"))?;
                                }
                                _ => {}
                            }
                        }
                    }
                    b"edge" => {
                        let source = attr(b"source")?.ok_or_else(|| err("edge without source"))?;
                        let target = attr(b"target")?.ok_or_else(|| err("edge without target"))?;
                        let weight: f64 = attr(b"weight")?
                            .ok_or_else(|| err("edge without weight"))?
                            .parse()
                            .map_err(|_| err("bad edge weight"))?;
                        edges.push((source, target, weight));
                    }
                    _ => {}
                }
            }
            Event::End(e) if e.name().as_ref() == b"node" => {
                if let Some(done) = current.take() {
                    entries.push(done);
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if let Some(done) = current.take() {
        entries.push(done);
    }
    Dictionary::from_parts(entries, edges)
}

/// Structural GEXF check: well-formed XML, a 1.2 `<gexf>` root, one
/// `<graph>` with `<nodes>`/`<edges>` sections, unique node ids, and every
/// edge referencing declared node ids and carrying a numeric weight.
pub fn validate_gexf(text: &str) -> Result<()> {
    use quick_xml::events::Event;
    use quick_xml::Reader;

    let err = |msg: &str| CoreError::invalid_data("gexf", msg);
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut saw_gexf = false;
    let mut saw_graph = false;
    let mut node_ids: BTreeSet<String> = BTreeSet::new();
    let mut pending_edges: Vec<(String, String)> = Vec::new();
    let mut buf = Vec::new();

    loop {
        match reader
            .read_event_into(&mut buf)
            .map_err(|e| err(&e.to_string()))?
        {
            Event::Start(e) | Event::Empty(e) => {
                let name = e.name().as_ref().to_vec();
                let attr = |key: &[u8]| -> Option<String> {
                    e.attributes().flatten().find_map(|a| {
                        (a.key.as_ref() == key)
                            .then(|| a.unescape_value().ok().map(|v| v.into_owned()))
                            .flatten()
                    })
                };
                match name.as_slice() {
                    b"gexf" => {
                        saw_gexf = true;
                        match attr(b"version") {
                            Some(v) if v.starts_with("1.2") => {}
                            _ => return Err(err("gexf version is not 1.2")),
                        }
                    }
                    b"graph" => saw_graph = true,
                    b"node" => {
                        let id = attr(b"id").ok_or_else(|| err("node without id"))?;
                        if !node_ids.insert(id) {
                            return Err(err("duplicate node id"));
                        }
                    }
                    b"edge" => {
                        let source = attr(b"source").ok_or_else(|| err("edge without source"))?;
                        let target = attr(b"target").ok_or_else(|| err("edge without target"))?;
                        if let Some(w) = attr(b"weight") {
                            w.parse::<f64>().map_err(|_| err("non-numeric edge weight"))?;
                        }
                        pending_edges.push((source, target));
                    }
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !saw_gexf {
        return Err(err("missing gexf root"));
    }
    if !saw_graph {
        return Err(err("missing graph element"));
    }
    for (source, target) in pending_edges {
        if !node_ids.contains(&source) || !node_ids.contains(&target) {
            return Err(err("edge references an undeclared node"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PostId;
    use crate::features::fit_tfidf;

    fn doc(id: u64, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc::new(PostId::new(id), tokens.iter().map(|s| s.to_string()).collect())
            .unwrap()
    }

    /// 3 positive / 3 negative labeled docs; `in_docs` lists which of the six
    /// (p1 p2 p3 n1 n2 n3) contain the probe term.
    fn labeled_six(term: &str, in_docs: [bool; 6]) -> (Vec<TokenizedDoc>, Vec<bool>) {
        let mut docs = Vec::new();
        for (i, &has) in in_docs.iter().enumerate() {
            let mut tokens = vec!["filler", "words", "here"];
            if has {
                tokens.push(term);
            }
            docs.push(doc(i as u64 + 1, &tokens));
        }
        (docs, vec![true, true, true, false, false, false])
    }

    #[test]
    fn builtin_lexicon_has_canonical_shape() {
        let lex = SeedLexicon::builtin();
        assert_eq!(lex.at_terms.len(), 21);
        assert_eq!(lex.qa_terms.len(), 8);
        for name in AT_NAMES {
            assert!(lex.at_terms.contains_key(name), "missing tactic {name}");
        }
        for name in QA_NAMES {
            assert!(lex.qa_terms.contains_key(name), "missing attribute {name}");
        }
        let heartbeat = &lex.at_terms["Heartbeat"][0];
        assert_eq!(heartbeat.raw, "heartbeat");
        assert_eq!(heartbeat.content_tokens, vec!["heartbeat"]);
    }

    #[test]
    fn phrases_are_stemmed_both_ways() {
        let lex = SeedLexicon::builtin();
        let fifo = lex.at_terms["FIFO"]
            .iter()
            .find(|p| p.raw == "first in first out")
            .unwrap();
        // The match stream keeps stopwords so the phrase stays contiguous.
        assert_eq!(fifo.match_tokens, vec!["first", "in", "first", "out"]);
        // The content form drops them.
        assert_eq!(fifo.content_tokens, vec!["first", "first"]);

        let timeout = lex.at_terms["Time out"]
            .iter()
            .find(|p| p.raw == "time out")
            .unwrap();
        assert_eq!(timeout.match_tokens, vec!["time", "out"]);
        assert_eq!(timeout.content_tokens, vec!["time"]);
    }

    #[test]
    fn repeated_source_phrases_are_kept_once() {
        let lex = SeedLexicon::builtin();
        let resisting = &lex.at_terms["Resisting attacks"];
        let passwords = resisting.iter().filter(|p| p.raw == "passwords").count();
        assert_eq!(passwords, 1);
        let maint = &lex.qa_terms["Maintainability"];
        let encapsulation = maint.iter().filter(|p| p.raw == "encapsulation").count();
        assert_eq!(encapsulation, 1);
    }

    #[test]
    fn content_tokens_are_stemmed() {
        let set = SeedLexicon::builtin().content_token_set();
        assert!(set.contains("heartbeat"));
        assert!(set.contains("schedul")); // from "scheduling"
        assert!(!set.contains("scheduling"));
    }

    #[test]
    fn shared_tokens_map_to_every_category() {
        let lex = SeedLexicon::builtin();
        let cats = lex.categories_of_content_token("login");
        assert!(cats.contains(&Category::At("Authentication")));
        assert!(cats.contains(&Category::Qa("Security")));
        assert!(lex.categories_of_content_token("nosuchterm").is_empty());
    }

    #[test]
    fn parse_rejects_wrong_keys_and_empty_groups() {
        let err = SeedLexicon::parse("[at.\"Heartbeat\"]\nterms=[\"x\"]\n").unwrap_err();
        assert!(err.to_string().contains("keys mismatch") || err.to_string().contains("missing"));

        // Full key set but one empty term list.
        let mut text = String::new();
        for name in AT_NAMES {
            if name == "Spare" {
                text.push_str(&format!("[at.\"{name}\"]\nterms=[]\n"));
            } else {
                text.push_str(&format!("[at.\"{name}\"]\nterms=[\"word\"]\n"));
            }
        }
        for name in QA_NAMES {
            text.push_str(&format!("[qa.\"{name}\"]\nterms=[\"word\"]\n"));
        }
        assert!(SeedLexicon::parse(&text).is_err());
    }

    #[test]
    fn candidate_count_floors() {
        let long = TokenizedDoc::new(PostId::new(1), vec!["token".to_string(); 200]).unwrap();
        assert_eq!(candidate_count(&long, 0.1), 20);
        let short = TokenizedDoc::new(PostId::new(2), vec!["token".to_string(); 7]).unwrap();
        assert_eq!(candidate_count(&short, 0.1), 0);
        assert_eq!(candidate_count(&long, 0.0), 0);
        assert_eq!(candidate_count(&long, 1.0), 200);
    }

    #[test]
    fn gain_ratio_pinned_examples() {
        // Perfect split over a balanced 4-doc set.
        let docs = vec![
            doc(1, &["probe", "aaa", "bbb"]),
            doc(2, &["probe", "ccc", "ddd"]),
            doc(3, &["aaa", "ccc", "eee"]),
            doc(4, &["bbb", "ddd", "fff"]),
        ];
        let labels = vec![true, true, false, false];
        assert!((gain_ratio("probe", &docs, &labels).unwrap() - 1.0).abs() < 1e-12);

        // Independence: the term in half of each class.
        let docs = vec![
            doc(1, &["probe", "aaa", "bbb"]),
            doc(2, &["ccc", "ddd", "eee"]),
            doc(3, &["probe", "ccc", "eee"]),
            doc(4, &["bbb", "ddd", "fff"]),
        ];
        assert!(gain_ratio("probe", &docs, &labels).unwrap().abs() < 1e-12);

        // Present in all three positives plus one negative of a 3/3 set.
        let (docs, labels) = labeled_six("probe", [true, true, true, true, false, false]);
        assert!((gain_ratio("probe", &docs, &labels).unwrap() - 0.500).abs() < 0.001);

        // Absent terms score zero by the degenerate-split convention.
        assert_eq!(gain_ratio("ghost", &docs, &labels).unwrap(), 0.0);
    }

    #[test]
    fn gain_ratio_error_cases() {
        let (docs, _) = labeled_six("probe", [true; 6]);
        assert!(matches!(
            gain_ratio("probe", &docs, &[true; 6]),
            Err(CoreError::DegenerateLabels)
        ));
        assert!(matches!(
            gain_ratio("probe", &docs, &[true, false]),
            Err(CoreError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn weights_normalize_to_one() {
        let corpus = vec![
            doc(1, &["heartbeat", "monitor", "monitor"]),
            doc(2, &["latency", "monitor"]),
        ];
        let v = fit_tfidf(&corpus).unwrap();
        let wdoc = weight_doc(&corpus[0], &v).unwrap();
        let total: f64 = wdoc.weights.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // "monitor" is in both docs (idf 0), so all weight lands on
        // "heartbeat".
        assert!((wdoc.weights["heartbeat"] - 1.0).abs() < 1e-12);
        assert_eq!(wdoc.weights["monitor"], 0.0);
    }

    #[test]
    fn zero_idf_falls_back_to_term_frequency() {
        // A single-doc corpus gives idf ln(1) = 0 everywhere.
        let corpus = vec![doc(1, &["alpha", "alpha", "beta", "gamma"])];
        let v = fit_tfidf(&corpus).unwrap();
        let wdoc = weight_doc(&corpus[0], &v).unwrap();
        assert!((wdoc.weights["alpha"] - 0.5).abs() < 1e-12);
        assert!((wdoc.weights["beta"] - 0.25).abs() < 1e-12);
        let total: f64 = wdoc.weights.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn whole_document_similarity() {
        let model = EmbeddingModel::from_vectors(vec![
            ("alpha".to_string(), vec![1.0, 0.0]),
            ("beta".to_string(), vec![0.0, 1.0]),
        ])
        .unwrap();
        let corpus = vec![doc(1, &["alpha", "beta"])];
        let v = fit_tfidf(&corpus).unwrap();
        let wdoc = weight_doc(&corpus[0], &v).unwrap();
        // Uniform weights 0.5 each; sim(alpha, alpha) = 1, sim(beta, alpha) = 0.
        let sim = post_term_similarity(&wdoc, "alpha", &model).unwrap();
        assert!((sim - 0.5).abs() < 1e-9);
        assert!(matches!(
            post_term_similarity(&wdoc, "missing", &model),
            Err(CoreError::UnknownTerm(_))
        ));
    }

    /// Linearity: scaling one weight scales its contribution.
    #[test]
    fn whole_document_similarity_is_linear_in_weights() {
        let model = EmbeddingModel::from_vectors(vec![
            ("alpha".to_string(), vec![1.0, 0.0]),
            ("beta".to_string(), vec![0.6, 0.8]),
        ])
        .unwrap();
        let base = WeightedDoc {
            doc: doc(1, &["alpha", "beta"]),
            weights: [("alpha".to_string(), 0.25), ("beta".to_string(), 0.75)]
                .into_iter()
                .collect(),
        };
        let sim = post_term_similarity(&base, "alpha", &model).unwrap();
        // f32 vector storage limits the agreement to single precision.
        assert!((sim - (0.25 * 1.0 + 0.75 * 0.6)).abs() < 1e-6);
    }

    fn seeds_with_timeout_term() -> SeedLexicon {
        let mut lex = SeedLexicon::builtin();
        lex.at_terms.get_mut("Time out").unwrap().push(SeedPhrase {
            raw: "timeout".to_string(),
            match_tokens: vec!["timeout".to_string()],
            content_tokens: vec!["timeout".to_string()],
        });
        lex
    }

    /// The admission fixture: "loadtime" sits at cosine 0.45 from the seed
    /// term "timeout" and splits the labels well enough to clear both gates.
    fn loadtime_setup() -> (SeedLexicon, EmbeddingModel, Vec<TokenizedDoc>, Vec<TokenizedDoc>, Vec<bool>) {
        let seeds = seeds_with_timeout_term();
        let model = EmbeddingModel::from_vectors(vec![
            ("loadtim".to_string(), vec![0.45, (1.0f64 - 0.45 * 0.45).sqrt() as f32]),
            ("timeout".to_string(), vec![1.0, 0.0]),
        ])
        .unwrap();
        let corpus = vec![doc(
            100,
            &[
                "timeout", "loadtim", "fillera", "fillerb", "fillerc", "fillerd", "fillere",
                "fillerf", "fillerg", "fillerh",
            ],
        )];
        let (labeled, labels) =
            labeled_six("loadtim", [true, true, false, false, false, false]);
        (seeds, model, corpus, labeled, labels)
    }

    #[test]
    fn expansion_admits_loadtime() {
        let (seeds, model, corpus, labeled, labels) = loadtime_setup();
        let v = fit_tfidf(&corpus).unwrap();
        let config = ExpansionConfig::default();
        let dict =
            expand_dictionary(&seeds, &model, &corpus, &labeled, &labels, &v, &config).unwrap();

        let entry = dict.get("loadtim").expect("loadtim admitted");
        assert_eq!(entry.origin, TermOrigin::Expanded);
        assert_eq!(entry.iteration_added, 1);
        assert!((entry.gain_ratio - 0.5).abs() < 1e-9);
        let edge = dict
            .edges()
            .iter()
            .find(|(a, b, _)| a == "loadtim" && b == "timeout")
            .expect("edge recorded");
        assert!((edge.2 - 0.45).abs() < 1e-6);
        // Every seed content token is still present, plus the admission.
        assert_eq!(dict.len(), seeds.content_token_set().len() + 1);
    }

    #[test]
    fn expansion_respects_both_gates() {
        // Raising the similarity threshold above 0.45 shuts the door.
        let (seeds, model, corpus, labeled, labels) = loadtime_setup();
        let v = fit_tfidf(&corpus).unwrap();
        let config = ExpansionConfig {
            sim_threshold: 0.46,
            ..ExpansionConfig::default()
        };
        let dict =
            expand_dictionary(&seeds, &model, &corpus, &labeled, &labels, &v, &config).unwrap();
        assert!(!dict.contains("loadtim"));

        // Weakening the label association drops the gain ratio to 0.
        let (weak_docs, weak_labels) =
            labeled_six("loadtim", [true, false, false, true, false, false]);
        let config = ExpansionConfig::default();
        let dict =
            expand_dictionary(&seeds, &model, &corpus, &weak_docs, &weak_labels, &v, &config)
                .unwrap();
        assert!(!dict.contains("loadtim"));
    }

    /// A term admitted earlier in the same iteration immediately supports
    /// later admissions: "bravo" is too far from the seed but close to
    /// "alpha", which is admitted first (lexicographic order).
    #[test]
    fn same_iteration_admissions_chain()  {
        let seeds = seeds_with_timeout_term();
        let model = EmbeddingModel::from_vectors(vec![
            ("alpha".to_string(), vec![0.8, 0.6]),
            ("bravo".to_string(), vec![0.2, 0.9798]),
            ("timeout".to_string(), vec![1.0, 0.0]),
        ])
        .unwrap();
        let mut tokens = vec!["timeout", "alpha", "bravo"];
        tokens.extend(std::iter::repeat("filler").take(17)); // cap = 2
        let corpus = vec![doc(200, &tokens)];
        let (mut labeled, labels) = labeled_six("alpha", [true, true, false, false, false, false]);
        // "bravo" rides along in the same labeled docs.
        for (i, d) in labeled.iter_mut().enumerate() {
            if i < 2 {
                let mut t = d.tokens.clone();
                t.push("bravo".to_string());
                *d = TokenizedDoc::new(d.post_id, t).unwrap();
            }
        }
        let v = fit_tfidf(&corpus).unwrap();
        let config = ExpansionConfig::default();
        let dict =
            expand_dictionary(&seeds, &model, &corpus, &labeled, &labels, &v, &config).unwrap();

        assert_eq!(dict.get("alpha").unwrap().iteration_added, 1);
        assert_eq!(dict.get("bravo").unwrap().iteration_added, 1);
        // bravo links to alpha, not to the distant seed.
        assert!(dict
            .edges()
            .iter()
            .any(|(a, b, _)| a == "alpha" && b == "bravo"));
        assert!(!dict
            .edges()
            .iter()
            .any(|(a, b, _)| a == "bravo" && b == "timeout"));
    }

    #[test]
    fn ranking_orders_expanded_terms() {
        let entries = vec![
            DictEntry {
                term: "seed".into(),
                gain_ratio: 0.9,
                origin: TermOrigin::Seed,
                iteration_added: 0,
            },
            DictEntry {
                term: "bbb".into(),
                gain_ratio: 0.4,
                origin: TermOrigin::Expanded,
                iteration_added: 1,
            },
            DictEntry {
                term: "aaa".into(),
                gain_ratio: 0.4,
                origin: TermOrigin::Expanded,
                iteration_added: 1,
            },
            DictEntry {
                term: "ccc".into(),
                gain_ratio: 0.8,
                origin: TermOrigin::Expanded,
                iteration_added: 2,
            },
        ];
        let dict = Dictionary::from_parts(entries, vec![]).unwrap();
        let ranked = rank_unseen_terms(&dict, 10);
        let names: Vec<&str> = ranked.iter().map(|(t, _)| t.as_str()).collect();
        // Seeds are excluded; ties break lexicographically.
        assert_eq!(names, vec!["ccc", "aaa", "bbb"]);
        assert_eq!(rank_unseen_terms(&dict, 2).len(), 2);
    }

    fn sample_dictionary() -> Dictionary {
        let entries = vec![
            DictEntry {
                term: "heartbeat".into(),
                gain_ratio: 0.7,
                origin: TermOrigin::Seed,
                iteration_added: 0,
            },
            DictEntry {
                term: "keepaliv".into(),
                gain_ratio: 0.45,
                origin: TermOrigin::Expanded,
                iteration_added: 1,
            },
            DictEntry {
                term: "watchdog".into(),
                gain_ratio: 0.35,
                origin: TermOrigin::Expanded,
                iteration_added: 2,
            },
        ];
        let edges = vec![
            ("heartbeat".to_string(), "keepaliv".to_string(), 0.82),
            ("watchdog".to_string(), "keepaliv".to_string(), 0.5),
        ];
        Dictionary::from_parts(entries, edges).unwrap()
    }

    #[test]
    fn json_round_trip_is_identical() {
        let dict = sample_dictionary();
        let back = Dictionary::from_json(&dict.to_json()).unwrap();
        assert_eq!(dict, back);
    }

    #[test]
    fn gexf_round_trip_is_identical() {
        let dict = sample_dictionary();
        let gexf = export_network(&dict, NetworkFormat::Gexf);
        validate_gexf(&gexf).unwrap();
        let back = import_gexf(&gexf).unwrap();
        assert_eq!(dict, back);
    }

    #[test]
    fn dot_export_lists_nodes_and_edges() {
        let dict = sample_dictionary();
        let dot = export_network(&dict, NetworkFormat::Dot);
        assert!(dot.starts_with("graph dictionary {"));
        assert!(dot.contains("\"heartbeat\" [gain_ratio=0.7, origin=seed, iteration_added=0];"));
        assert!(dot.contains("\"heartbeat\" -- \"keepaliv\" [weight=0.82];"));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn gexf_validation_catches_structural_errors() {
        assert!(validate_gexf("not xml at all <<<").is_err());
        let missing_node = r#"<?xml version="1.0"?>
<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">
  <graph><nodes><node id="a" label="a"/></nodes>
  <edges><edge id="0" source="a" target="ghost" weight="0.5"/></edges></graph>
</gexf>"#;
        assert!(validate_gexf(missing_node).is_err());
        let wrong_version = r#"<gexf version="1.1"><graph><nodes/><edges/></graph></gexf>"#;
        assert!(validate_gexf(wrong_version).is_err());
    }

    #[test]
    fn dictionary_validate_enforces_invariants() {
        let config = ExpansionConfig::default();
        sample_dictionary().validate(&config).unwrap();

        let low_gr = Dictionary::from_parts(
            vec![DictEntry {
                term: "weak".into(),
                gain_ratio: 0.1,
                origin: TermOrigin::Expanded,
                iteration_added: 1,
            }],
            vec![],
        )
        .unwrap();
        assert!(low_gr.validate(&config).is_err());

        let weak_edge = Dictionary::from_parts(
            vec![
                DictEntry {
                    term: "aaa".into(),
                    gain_ratio: 0.5,
                    origin: TermOrigin::Seed,
                    iteration_added: 0,
                },
                DictEntry {
                    term: "bbb".into(),
                    gain_ratio: 0.5,
                    origin: TermOrigin::Seed,
                    iteration_added: 0,
                },
            ],
            vec![("aaa".to_string(), "bbb".to_string(), 0.2)],
        )
        .unwrap();
        assert!(weak_edge.validate(&config).is_err());
    }

    #[test]
    fn edges_to_missing_entries_are_rejected() {
        let err = Dictionary::from_parts(
            vec![DictEntry {
                term: "aaa".into(),
                gain_ratio: 0.5,
                origin: TermOrigin::Seed,
                iteration_added: 0,
            }],
            vec![("aaa".to_string(), "ghost".to_string(), 0.9)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn expansion_config_validation() {
        assert!(ExpansionConfig::default().validate().is_ok());
        let bad = ExpansionConfig {
            sim_threshold: 1.5,
            ..ExpansionConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExpansionConfig {
            max_iterations: 0,
            ..ExpansionConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
