//! Tactic/attribute instance detection in confirmed posts, the interaction
//! matrix, the human-annotated polarity ledger, and the diff against the
//! literature baseline.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::PostId;
use crate::dictionary::{Category, Dictionary, SeedLexicon};
use crate::error::{CoreError, Result};
use crate::preprocess::{self, TokenizedDoc};

/// Minus sign used in rendered ledger and diff cells.
const MINUS: char = '\u{2212}';

/// The 21 architecture tactics, in canonical (lexicon) order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum AtName {
    Heartbeat,
    #[serde(rename = "Audit trail")]
    AuditTrail,
    #[serde(rename = "Resource pooling")]
    ResourcePooling,
    Authentication,
    Checkpoint,
    Rollback,
    Spare,
    #[serde(rename = "Redundancy replication")]
    RedundancyReplication,
    Voting,
    #[serde(rename = "Shadow operation")]
    ShadowOperation,
    #[serde(rename = "Secure session")]
    SecureSession,
    #[serde(rename = "Time out")]
    TimeOut,
    #[serde(rename = "Time stamp")]
    TimeStamp,
    #[serde(rename = "Sanity checking")]
    SanityChecking,
    #[serde(rename = "Functional redundancy")]
    FunctionalRedundancy,
    Scheduling,
    #[serde(rename = "FIFO")]
    Fifo,
    #[serde(rename = "Analytical redundancy")]
    AnalyticalRedundancy,
    #[serde(rename = "Resisting attacks")]
    ResistingAttacks,
    #[serde(rename = "Maintain data confidentiality")]
    MaintainDataConfidentiality,
    #[serde(rename = "Recovery from attacks")]
    RecoveryFromAttacks,
}

impl AtName {
    pub const ALL: [AtName; 21] = [
        AtName::Heartbeat,
        AtName::AuditTrail,
        AtName::ResourcePooling,
        AtName::Authentication,
        AtName::Checkpoint,
        AtName::Rollback,
        AtName::Spare,
        AtName::RedundancyReplication,
        AtName::Voting,
        AtName::ShadowOperation,
        AtName::SecureSession,
        AtName::TimeOut,
        AtName::TimeStamp,
        AtName::SanityChecking,
        AtName::FunctionalRedundancy,
        AtName::Scheduling,
        AtName::Fifo,
        AtName::AnalyticalRedundancy,
        AtName::ResistingAttacks,
        AtName::MaintainDataConfidentiality,
        AtName::RecoveryFromAttacks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AtName::Heartbeat => "Heartbeat",
            AtName::AuditTrail => "Audit trail",
            AtName::ResourcePooling => "Resource pooling",
            AtName::Authentication => "Authentication",
            AtName::Checkpoint => "Checkpoint",
            AtName::Rollback => "Rollback",
            AtName::Spare => "Spare",
            AtName::RedundancyReplication => "Redundancy replication",
            AtName::Voting => "Voting",
            AtName::ShadowOperation => "Shadow operation",
            AtName::SecureSession => "Secure session",
            AtName::TimeOut => "Time out",
            AtName::TimeStamp => "Time stamp",
            AtName::SanityChecking => "Sanity checking",
            AtName::FunctionalRedundancy => "Functional redundancy",
            AtName::Scheduling => "Scheduling",
            AtName::Fifo => "FIFO",
            AtName::AnalyticalRedundancy => "Analytical redundancy",
            AtName::ResistingAttacks => "Resisting attacks",
            AtName::MaintainDataConfidentiality => "Maintain data confidentiality",
            AtName::RecoveryFromAttacks => "Recovery from attacks",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|at| at.as_str() == name)
    }

    /// Position in canonical order; the matrix row index.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&at| at == self).unwrap()
    }
}

impl std::fmt::Display for AtName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 8 quality attributes, in canonical (lexicon) order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum QaName {
    Performance,
    Maintainability,
    Compatibility,
    Usability,
    Reliability,
    #[serde(rename = "Functional Suitability")]
    FunctionalSuitability,
    Security,
    Portability,
}

impl QaName {
    pub const ALL: [QaName; 8] = [
        QaName::Performance,
        QaName::Maintainability,
        QaName::Compatibility,
        QaName::Usability,
        QaName::Reliability,
        QaName::FunctionalSuitability,
        QaName::Security,
        QaName::Portability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QaName::Performance => "Performance",
            QaName::Maintainability => "Maintainability",
            QaName::Compatibility => "Compatibility",
            QaName::Usability => "Usability",
            QaName::Reliability => "Reliability",
            QaName::FunctionalSuitability => "Functional Suitability",
            QaName::Security => "Security",
            QaName::Portability => "Portability",
        }
    }

    /// Matrix column header; Performance carries its ISO 25010 alias.
    pub fn column_header(self) -> &'static str {
        match self {
            QaName::Performance => "Performance (Efficiency)",
            other => other.as_str(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|qa| qa.as_str() == name)
    }

    /// Position in canonical order; the matrix column index.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&qa| qa == self).unwrap()
    }
}

impl std::fmt::Display for QaName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quality-attribute column order used by the polarity ledger and diff
/// report (most-tallied attributes first, as conventionally presented).
pub const LEDGER_QA_COLUMNS: [QaName; 8] = [
    QaName::FunctionalSuitability,
    QaName::Maintainability,
    QaName::Usability,
    QaName::Reliability,
    QaName::Performance,
    QaName::Compatibility,
    QaName::Security,
    QaName::Portability,
];

/// Tactic row order used by the polarity ledger: the commonly polarized
/// tactics first, then the tactics that historically carry no polarized
/// instance (audit trail, spare, shadow operation) so every tactic always
/// has a row.
pub const LEDGER_AT_ROWS: [AtName; 21] = [
    AtName::TimeOut,
    AtName::Heartbeat,
    AtName::TimeStamp,
    AtName::SanityChecking,
    AtName::RedundancyReplication,
    AtName::FunctionalRedundancy,
    AtName::AnalyticalRedundancy,
    AtName::RecoveryFromAttacks,
    AtName::Rollback,
    AtName::Scheduling,
    AtName::Checkpoint,
    AtName::Fifo,
    AtName::ResourcePooling,
    AtName::SecureSession,
    AtName::ResistingAttacks,
    AtName::MaintainDataConfidentiality,
    AtName::Authentication,
    AtName::Voting,
    AtName::AuditTrail,
    AtName::Spare,
    AtName::ShadowOperation,
];

/// How a human annotator judged an instance's tactic-to-attribute influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolaritySource {
    None,
    Human,
}

/// Where a matched phrase sits in the post's full stemmed token stream.
/// `occurrences` counts how many times that particular phrase recurs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub phrase: String,
    pub token_offset: usize,
    pub occurrences: u32,
}

/// One detected (tactic, attribute) co-occurrence in a post. Polarity is
/// never assigned automatically: it stays unspecified until a human records
/// it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaAtInstance {
    pub post_id: PostId,
    pub at: AtName,
    pub qa: QaName,
    pub at_evidence: Evidence,
    pub qa_evidence: Evidence,
    pub polarity: Polarity,
    pub polarity_source: PolaritySource,
}

impl QaAtInstance {
    fn check_polarity_invariant(&self) -> Result<()> {
        let consistent = match self.polarity {
            Polarity::Unspecified => self.polarity_source == PolaritySource::None,
            _ => self.polarity_source == PolaritySource::Human,
        };
        if consistent {
            Ok(())
        } else {
            Err(CoreError::invalid_data(
                "QaAtInstance",
                "polarity and polarity_source disagree: only humans assign polarity",
            ))
        }
    }
}

/// First match offset and total match count of a contiguous token sequence.
fn phrase_matches(stream: &[String], tokens: &[String]) -> Option<(usize, u32)> {
    if tokens.is_empty() || tokens.len() > stream.len() {
        return None;
    }
    let mut first = None;
    let mut count = 0u32;
    for start in 0..=(stream.len() - tokens.len()) {
        if stream[start..start + tokens.len()] == tokens[..] {
            first.get_or_insert(start);
            count += 1;
        }
    }
    first.map(|offset| (offset, count))
}

/// Keeps the earliest evidence per key (ties broken by phrase).
fn offer<K: Ord>(hits: &mut BTreeMap<K, Evidence>, key: K, candidate: Evidence) {
    match hits.entry(key) {
        Entry::Vacant(slot) => {
            slot.insert(candidate);
        }
        Entry::Occupied(mut slot) => {
            let current = slot.get();
            if (candidate.token_offset, &candidate.phrase)
                < (current.token_offset, &current.phrase)
            {
                slot.insert(candidate);
            }
        }
    }
}

/// Maps an expanded dictionary term back to a seed category by following
/// strongest edges through the semantic network until a seed term is
/// reached. Returns None when the walk is ambiguous (tied strongest edges
/// reaching different categories, or a shared-vocabulary seed term) or never
/// reaches a seed.
fn resolve_expanded_category<'a>(
    dict: &Dictionary,
    seeds: &'a SeedLexicon,
    term: &str,
) -> Option<Category<'a>> {
    let mut visited = BTreeSet::new();
    let categories = walk_to_seed(dict, seeds, term, &mut visited);
    if categories.len() == 1 {
        categories.into_iter().next()
    } else {
        None
    }
}

fn walk_to_seed<'a>(
    dict: &Dictionary,
    seeds: &'a SeedLexicon,
    term: &str,
    visited: &mut BTreeSet<String>,
) -> BTreeSet<Category<'a>> {
    if !visited.insert(term.to_string()) {
        return BTreeSet::new();
    }
    let direct = seeds.categories_of_content_token(term);
    if !direct.is_empty() {
        return direct.into_iter().collect();
    }
    // Edges are symmetric, so the raw strongest edge of an intermediate
    // term usually points back the way we came; the path continues along
    // the strongest edge to a node not yet on the path.
    let neighbors: Vec<(&str, f64)> = dict
        .neighbors(term)
        .into_iter()
        .filter(|(neighbor, _)| !visited.contains(*neighbor))
        .collect();
    let Some(&(_, strongest)) = neighbors.first() else {
        return BTreeSet::new();
    };
    let mut categories = BTreeSet::new();
    for (neighbor, sim) in neighbors {
        if sim < strongest {
            break;
        }
        categories.extend(walk_to_seed(dict, seeds, neighbor, visited));
    }
    categories
}

/// Finds every distinct (tactic, attribute) pair discussed in a post: seed
/// phrases match as contiguous stemmed-token sequences over the full token
/// stream, and expanded dictionary terms count for the seed category they
/// resolve to. A pair needs evidence on both sides; no matches means an
/// empty list.
pub fn detect_instances(
    doc: &TokenizedDoc,
    raw_text: &str,
    seeds: &SeedLexicon,
    dict: &Dictionary,
) -> Vec<QaAtInstance> {
    let stream = preprocess::match_stream(raw_text);
    let mut at_hits: BTreeMap<AtName, Evidence> = BTreeMap::new();
    let mut qa_hits: BTreeMap<QaName, Evidence> = BTreeMap::new();

    let mut offer_category = |category: Category<'_>, evidence: Evidence| match category {
        Category::At(name) => {
            if let Some(at) = AtName::from_name(name) {
                offer(&mut at_hits, at, evidence);
            }
        }
        Category::Qa(name) => {
            if let Some(qa) = QaName::from_name(name) {
                offer(&mut qa_hits, qa, evidence);
            }
        }
    };

    for (category, phrase) in seeds.phrases() {
        if let Some((offset, count)) = phrase_matches(&stream, &phrase.match_tokens) {
            offer_category(
                category,
                Evidence {
                    phrase: phrase.raw.clone(),
                    token_offset: offset,
                    occurrences: count,
                },
            );
        }
    }

    for entry in dict.expanded_terms() {
        let term_as_slice = std::slice::from_ref(&entry.term);
        let Some((offset, count)) = phrase_matches(&stream, term_as_slice) else {
            continue;
        };
        let Some(category) = resolve_expanded_category(dict, seeds, &entry.term) else {
            continue;
        };
        offer_category(
            category,
            Evidence {
                phrase: entry.term.clone(),
                token_offset: offset,
                occurrences: count,
            },
        );
    }

    let mut instances = Vec::new();
    for (&at, at_evidence) in &at_hits {
        for (&qa, qa_evidence) in &qa_hits {
            instances.push(QaAtInstance {
                post_id: doc.post_id,
                at,
                qa,
                at_evidence: at_evidence.clone(),
                qa_evidence: qa_evidence.clone(),
                polarity: Polarity::Unspecified,
                polarity_source: PolaritySource::None,
            });
        }
    }
    instances
}

// ---------------------------------------------------------------------------
// Interaction matrix
// ---------------------------------------------------------------------------

/// Counts of detected instances per (tactic, attribute) cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    counts: [[u64; 8]; 21],
}

impl InteractionMatrix {
    pub fn get(&self, at: AtName, qa: QaName) -> u64 {
        self.counts[at.index()][qa.index()]
    }

    /// Sum over all cells; equals the number of tallied instances.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Per-attribute totals in canonical order.
    pub fn qa_totals(&self) -> Vec<(QaName, u64)> {
        QaName::ALL
            .into_iter()
            .map(|qa| {
                let total = AtName::ALL.iter().map(|at| self.get(*at, qa)).sum();
                (qa, total)
            })
            .collect()
    }

    /// Per-tactic totals in canonical order.
    pub fn at_totals(&self) -> Vec<(AtName, u64)> {
        AtName::ALL
            .into_iter()
            .map(|at| (at, self.counts[at.index()].iter().sum()))
            .collect()
    }

    /// 22 lines: a header of attribute columns, then one row per tactic.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for qa in QaName::ALL {
            out.push(',');
            out.push_str(qa.column_header());
        }
        out.push('\n');
        for at in AtName::ALL {
            out.push_str(at.as_str());
            for qa in QaName::ALL {
                out.push_str(&format!(",{}", self.get(at, qa)));
            }
            out.push('\n');
        }
        out
    }
}

/// Counts instances per (tactic, attribute) cell.
pub fn build_matrix<'a>(instances: impl IntoIterator<Item = &'a QaAtInstance>) -> InteractionMatrix {
    let mut matrix = InteractionMatrix::default();
    for instance in instances {
        matrix.counts[instance.at.index()][instance.qa.index()] += 1;
    }
    matrix
}

// ---------------------------------------------------------------------------
// Instance store and polarity annotation
// ---------------------------------------------------------------------------

/// One polarity annotation, kept in an append-only audit log so re-records
/// stay visible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityEvent {
    pub instance_id: u64,
    pub polarity: Polarity,
    pub annotator: String,
    pub timestamp: String,
}

/// An instance with its store-assigned id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredInstance {
    pub id: u64,
    #[serde(flatten)]
    pub instance: QaAtInstance,
}

/// Detected instances with stable ids plus the polarity audit log.
/// Re-recording a polarity overwrites the instance but the log keeps every
/// event.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceStore {
    instances: Vec<StoredInstance>,
    by_id: BTreeMap<u64, usize>,
    history: Vec<PolarityEvent>,
}

impl InstanceStore {
    /// Wraps freshly detected instances, assigning ids 1..=n.
    pub fn from_instances(instances: Vec<QaAtInstance>) -> Self {
        let instances: Vec<StoredInstance> = instances
            .into_iter()
            .enumerate()
            .map(|(i, instance)| StoredInstance {
                id: i as u64 + 1,
                instance,
            })
            .collect();
        let by_id = instances
            .iter()
            .enumerate()
            .map(|(pos, s)| (s.id, pos))
            .collect();
        InstanceStore {
            instances,
            by_id,
            history: Vec::new(),
        }
    }

    /// Appends one instance, assigning the next free id. Existing ids never
    /// shift, so polarity history recorded against them stays valid.
    pub fn append(&mut self, instance: QaAtInstance) -> u64 {
        let id = self.instances.iter().map(|s| s.id).max().unwrap_or(0) + 1;
        self.by_id.insert(id, self.instances.len());
        self.instances.push(StoredInstance { id, instance });
        id
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&QaAtInstance> {
        self.by_id.get(&id).map(|&pos| &self.instances[pos].instance)
    }

    pub fn stored(&self) -> impl Iterator<Item = &StoredInstance> {
        self.instances.iter()
    }

    pub fn instances(&self) -> impl Iterator<Item = &QaAtInstance> {
        self.instances.iter().map(|s| &s.instance)
    }

    pub fn history(&self) -> &[PolarityEvent] {
        &self.history
    }

    /// Sets a human polarity judgment on an instance and logs the event.
    pub fn record_polarity(
        &mut self,
        instance_id: u64,
        polarity: Polarity,
        annotator: &str,
        timestamp: &str,
    ) -> Result<()> {
        if polarity == Polarity::Unspecified {
            return Err(CoreError::invalid_data(
                "record_polarity",
                "a recorded polarity must be positive or negative",
            ));
        }
        let &pos = self
            .by_id
            .get(&instance_id)
            .ok_or(CoreError::UnknownInstance(instance_id))?;
        let instance = &mut self.instances[pos].instance;
        instance.polarity = polarity;
        instance.polarity_source = PolaritySource::Human;
        self.history.push(PolarityEvent {
            instance_id,
            polarity,
            annotator: annotator.to_string(),
            timestamp: timestamp.to_string(),
        });
        Ok(())
    }

    /// One instance per JSONL line, in id order.
    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for stored in &self.instances {
            serde_json::to_writer(&mut writer, stored)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut instances = Vec::new();
        let mut by_id = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let stored: StoredInstance = serde_json::from_str(&line).map_err(|e| {
                CoreError::malformed(format!("instance line {}", idx + 1), e.to_string())
            })?;
            stored.instance.check_polarity_invariant()?;
            if by_id.insert(stored.id, instances.len()).is_some() {
                return Err(CoreError::invalid_data(
                    "InstanceStore",
                    format!("duplicate instance id {}", stored.id),
                ));
            }
            instances.push(stored);
        }
        Ok(InstanceStore {
            instances,
            by_id,
            history: Vec::new(),
        })
    }

    /// One audit-log event per JSONL line, in recording order.
    pub fn write_history_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for event in &self.history {
            serde_json::to_writer(&mut writer, event)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Replays a polarity audit log over the stored instances.
    pub fn apply_history_jsonl<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: PolarityEvent = serde_json::from_str(&line).map_err(|e| {
                CoreError::malformed(format!("polarity line {}", idx + 1), e.to_string())
            })?;
            self.record_polarity(
                event.instance_id,
                event.polarity,
                &event.annotator,
                &event.timestamp,
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Polarity ledger
// ---------------------------------------------------------------------------

/// Positive/negative annotation counts per (tactic, attribute) pair. Cells
/// with no polarized instance render as N/A; a cell holding both signs
/// renders both, dominant first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PolarityLedger {
    cells: [[(u64, u64); 8]; 21],
}

/// Counts human-polarized instances per cell; unspecified instances are
/// ignored.
pub fn tally_ledger<'a>(instances: impl IntoIterator<Item = &'a QaAtInstance>) -> PolarityLedger {
    let mut ledger = PolarityLedger::default();
    for instance in instances {
        let cell = &mut ledger.cells[instance.at.index()][instance.qa.index()];
        match instance.polarity {
            Polarity::Positive => cell.0 += 1,
            Polarity::Negative => cell.1 += 1,
            Polarity::Unspecified => {}
        }
    }
    ledger
}

impl PolarityLedger {
    /// (positive, negative) counts for a cell.
    pub fn get(&self, at: AtName, qa: QaName) -> (u64, u64) {
        self.cells[at.index()][qa.index()]
    }

    /// Total polarized instances across all cells.
    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().map(|&(p, n)| p + n).sum()
    }

    /// Presentation form: "+ (10)", "− (47)", "N/A", or both signs with the
    /// dominant first for mixed cells.
    pub fn render_cell(&self, at: AtName, qa: QaName) -> String {
        match self.get(at, qa) {
            (0, 0) => "N/A".to_string(),
            (p, 0) => format!("+ ({p})"),
            (0, n) => format!("{MINUS} ({n})"),
            (p, n) if p >= n => format!("+ ({p}) / {MINUS} ({n})"),
            (p, n) => format!("{MINUS} ({n}) / + ({p})"),
        }
    }

    /// Every polarized (tactic, attribute, sign, count) triple in ledger
    /// presentation order, positive before negative within a cell.
    pub fn polarized_entries(&self) -> Vec<(AtName, QaName, Polarity, u64)> {
        let mut entries = Vec::new();
        for at in LEDGER_AT_ROWS {
            for qa in LEDGER_QA_COLUMNS {
                let (p, n) = self.get(at, qa);
                if p > 0 {
                    entries.push((at, qa, Polarity::Positive, p));
                }
                if n > 0 {
                    entries.push((at, qa, Polarity::Negative, n));
                }
            }
        }
        entries
    }

    /// 22 lines: attribute header then one row per tactic, in ledger
    /// presentation order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for qa in LEDGER_QA_COLUMNS {
            out.push(',');
            out.push_str(qa.as_str());
        }
        out.push('\n');
        for at in LEDGER_AT_ROWS {
            out.push_str(at.as_str());
            for qa in LEDGER_QA_COLUMNS {
                out.push_str(&format!(",{}", self.render_cell(at, qa)));
            }
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Literature baseline and diff
// ---------------------------------------------------------------------------

/// Which tactics the literature reports as benefiting or hindering one
/// attribute, with the citation keys kept verbatim.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaBaseline {
    #[serde(default)]
    pub benefit: Vec<String>,
    #[serde(default)]
    pub benefit_sources: String,
    #[serde(default)]
    pub hinder: Vec<String>,
    #[serde(default)]
    pub hinder_sources: String,
}

/// The encoded literature claims about tactic/attribute relationships.
/// Tactic names are matched case-insensitively; the baseline may also name
/// literature-specific tactics outside the mined tactic set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiteratureBaseline {
    entries: BTreeMap<QaName, QaBaseline>,
}

impl LiteratureBaseline {
    pub fn parse(toml_text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct BaselineFile {
            qa: BTreeMap<String, QaBaseline>,
        }
        let file: BaselineFile = toml::from_str(toml_text)?;
        let mut entries = BTreeMap::new();
        for (name, entry) in file.qa {
            let qa = QaName::from_name(&name).ok_or_else(|| {
                CoreError::invalid_data("LiteratureBaseline", format!("unknown attribute {name:?}"))
            })?;
            for benefit in &entry.benefit {
                if entry.hinder.iter().any(|h| h.eq_ignore_ascii_case(benefit)) {
                    return Err(CoreError::invalid_data(
                        "LiteratureBaseline",
                        format!("{benefit:?} is listed as both benefit and hinder for {name}"),
                    ));
                }
            }
            entries.insert(qa, entry);
        }
        Ok(LiteratureBaseline { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The baseline shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../data/baseline.toml"))
            .expect("shipped baseline must parse")
    }

    pub fn benefits(&self, qa: QaName) -> &[String] {
        self.entries.get(&qa).map_or(&[], |e| &e.benefit)
    }

    pub fn hinders(&self, qa: QaName) -> &[String] {
        self.entries.get(&qa).map_or(&[], |e| &e.hinder)
    }

    pub fn reports_benefit(&self, qa: QaName, at: AtName) -> bool {
        self.benefits(qa)
            .iter()
            .any(|name| name.eq_ignore_ascii_case(at.as_str()))
    }

    pub fn reports_hinder(&self, qa: QaName, at: AtName) -> bool {
        self.hinders(qa)
            .iter()
            .any(|name| name.eq_ignore_ascii_case(at.as_str()))
    }
}

/// Where a polarized ledger pair stands relative to the literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffClass {
    /// Same sign is reported in the literature.
    Documented,
    /// The literature reports the opposite sign.
    Contradicts,
    /// Absent from the literature baseline.
    LittleKnown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub at: AtName,
    pub qa: QaName,
    pub sign: Polarity,
    pub count: u64,
    pub classification: DiffClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
    /// Share of polarized pairs that are little-known; None for an empty
    /// ledger.
    pub little_known_fraction: Option<f64>,
}

/// Classifies every polarized ledger pair as documented, contradicting, or
/// little-known relative to the literature baseline.
pub fn diff_against_literature(
    ledger: &PolarityLedger,
    baseline: &LiteratureBaseline,
) -> DiffReport {
    let entries: Vec<DiffEntry> = ledger
        .polarized_entries()
        .into_iter()
        .map(|(at, qa, sign, count)| {
            let (same, opposite) = match sign {
                Polarity::Positive => {
                    (baseline.reports_benefit(qa, at), baseline.reports_hinder(qa, at))
                }
                _ => (baseline.reports_hinder(qa, at), baseline.reports_benefit(qa, at)),
            };
            let classification = if same {
                DiffClass::Documented
            } else if opposite {
                DiffClass::Contradicts
            } else {
                DiffClass::LittleKnown
            };
            DiffEntry {
                at,
                qa,
                sign,
                count,
                classification,
            }
        })
        .collect();
    let little_known_fraction = if entries.is_empty() {
        None
    } else {
        let little_known = entries
            .iter()
            .filter(|e| e.classification == DiffClass::LittleKnown)
            .count();
        Some(little_known as f64 / entries.len() as f64)
    };
    DiffReport {
        entries,
        little_known_fraction,
    }
}

impl DiffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diff report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| tactic | quality attribute | sign | count | classification |\n\
             |---|---|---|---|---|\n",
        );
        for entry in &self.entries {
            let sign = match entry.sign {
                Polarity::Positive => "+".to_string(),
                _ => MINUS.to_string(),
            };
            let classification = match entry.classification {
                DiffClass::Documented => "documented",
                DiffClass::Contradicts => "contradicts",
                DiffClass::LittleKnown => "little_known",
            };
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                entry.at, entry.qa, sign, entry.count, classification
            ));
        }
        match self.little_known_fraction {
            Some(fraction) => out.push_str(&format!(
                "\nLittle-known share of polarized pairs: {:.1}%\n",
                100.0 * fraction
            )),
            None => out.push_str("\nLittle-known share of polarized pairs: N/A\n"),
        }
        out
    }
}
