//! Skip-gram word embeddings trained with negative sampling, plus cosine
//! similarity and nearest-neighbor queries over the trained vectors.
//!
//! Training is deterministic for a given seed in the default single-threaded
//! mode: vocabulary order, vector initialization, window sampling, and
//! negative sampling all draw from seeded ChaCha streams. The optional
//! `parallel` mode shards sentences across threads with lock-free (racy but
//! benign) vector updates; it trades bitwise reproducibility for speed and is
//! never used by tests that assert exact bytes.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::preprocess::TokenizedDoc;
use crate::sha256_hex;

/// Past this magnitude the sigmoid saturates and the gradient is clipped.
const MAX_EXP: f32 = 6.0;

/// Magic prefix of the binary vector file format.
const BINARY_MAGIC: &[u8; 8] = b"AMVECB01";

/// Skip-gram training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Vector dimensionality.
    pub dim: usize,
    /// Maximum context window radius; the effective radius is sampled
    /// uniformly from 1..=window per center token.
    pub window: usize,
    /// Negative samples per (center, context) pair.
    pub negative_samples: usize,
    pub epochs: usize,
    /// Tokens occurring fewer times than this are dropped from the vocabulary.
    pub min_count: u32,
    /// Starting learning rate, decayed linearly to 1e-4 of itself.
    pub initial_learning_rate: f32,
    pub seed: u64,
    /// Frequent-word subsampling threshold; `None` disables subsampling
    /// (the default — corpora here are small).
    pub subsample_threshold: Option<f64>,
    /// Shard sentences across threads. Faster, but vector updates race and
    /// results are no longer bitwise reproducible.
    pub parallel: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 100,
            window: 5,
            negative_samples: 5,
            epochs: 15,
            min_count: 2,
            initial_learning_rate: 0.025,
            seed: 42,
            subsample_threshold: None,
            parallel: false,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negative_samples", self.negative_samples),
            ("epochs", self.epochs),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(CoreError::invalid_data(
                    "EmbeddingConfig",
                    format!("{name} must be positive"),
                ));
            }
        }
        if self.min_count == 0 {
            return Err(CoreError::invalid_data(
                "EmbeddingConfig",
                "min_count must be positive",
            ));
        }
        if !(self.initial_learning_rate > 0.0) {
            return Err(CoreError::invalid_data(
                "EmbeddingConfig",
                "initial_learning_rate must be positive",
            ));
        }
        Ok(())
    }
}

/// Trained word vectors with their vocabulary.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    vocab: BTreeMap<String, usize>,
    /// Row-major |V| x dim.
    vectors: Vec<f32>,
    dim: usize,
    pub train_config: EmbeddingConfig,
    /// SHA-256 over the training docs (ids and tokens).
    pub corpus_fingerprint: String,
}

/// Stable hash of a tokenized corpus, used to tie models to their inputs.
pub fn corpus_fingerprint(docs: &[TokenizedDoc]) -> String {
    let mut buf = Vec::new();
    for doc in docs {
        buf.extend_from_slice(doc.post_id.get().to_string().as_bytes());
        for token in &doc.tokens {
            buf.push(b'\t');
            buf.extend_from_slice(token.as_bytes());
        }
        buf.push(b'\n');
    }
    sha256_hex(&buf)
}

/// Row-major float matrix held in atomics so the parallel training mode can
/// update it lock-free; single-threaded access is plain sequential.
struct AtomicMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl AtomicMatrix {
    fn zeros(rows: usize, dim: usize) -> Self {
        AtomicMatrix {
            data: (0..rows * dim).map(|_| AtomicU32::new(0)).collect(),
            dim,
        }
    }

    #[inline]
    fn get(&self, row: usize, col: usize) -> f32 {
        f32::from_bits(self.data[row * self.dim + col].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, row: usize, col: usize, value: f32) {
        self.data[row * self.dim + col].store(value.to_bits(), Ordering::Relaxed);
    }

    /// Racy read-modify-write add: concurrent updates may lose increments,
    /// which stochastic gradient descent tolerates.
    #[inline]
    fn add(&self, row: usize, col: usize, delta: f32) {
        let cell = &self.data[row * self.dim + col];
        let current = f32::from_bits(cell.load(Ordering::Relaxed));
        cell.store((current + delta).to_bits(), Ordering::Relaxed);
    }

    fn into_vec(self) -> Vec<f32> {
        self.data
            .into_iter()
            .map(|a| f32::from_bits(a.into_inner()))
            .collect()
    }
}

/// Clipped logistic-loss gradient factor (label - sigmoid(dot)).
#[inline]
fn gradient(dot: f32, label: f32) -> f32 {
    if dot > MAX_EXP {
        label - 1.0
    } else if dot < -MAX_EXP {
        label
    } else {
        label - 1.0 / (1.0 + (-dot).exp())
    }
}

/// Draws a vocabulary index from the unigram^0.75 distribution encoded as a
/// cumulative-sum table.
#[inline]
fn sample_negative(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("non-empty vocabulary");
    let x: f64 = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

/// Per-worker scratch buffers, allocated once per shard.
struct Scratch {
    center: Vec<f32>,
    accum: Vec<f32>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            center: vec![0.0; dim],
            accum: vec![0.0; dim],
        }
    }
}

struct TrainContext<'a> {
    syn0: &'a AtomicMatrix,
    syn1: &'a AtomicMatrix,
    cumulative: &'a [f64],
    keep_probs: &'a [f64],
    config: &'a EmbeddingConfig,
    progress: &'a AtomicUsize,
    total_passes: usize,
}

fn train_sentence(
    ctx: &TrainContext<'_>,
    sentence: &[u32],
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) {
    let dim = ctx.config.dim;
    let done = ctx.progress.fetch_add(1, Ordering::Relaxed);
    let remaining = 1.0 - done as f32 / (ctx.total_passes as f32 + 1.0);
    let lr = (ctx.config.initial_learning_rate * remaining)
        .max(ctx.config.initial_learning_rate * 1e-4);

    let positions: Vec<u32> = if ctx.config.subsample_threshold.is_some() {
        sentence
            .iter()
            .copied()
            .filter(|&idx| ctx.keep_probs[idx as usize] >= rng.gen::<f64>())
            .collect()
    } else {
        sentence.to_vec()
    };

    for i in 0..positions.len() {
        let center = positions[i] as usize;
        let radius = rng.gen_range(1..=ctx.config.window);
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(positions.len().saturating_sub(1));
        for j in lo..=hi {
            if j == i {
                continue;
            }
            let context = positions[j] as usize;
            for d in 0..dim {
                scratch.center[d] = ctx.syn0.get(center, d);
                scratch.accum[d] = 0.0;
            }
            for s in 0..=ctx.config.negative_samples {
                let (target, label) = if s == 0 {
                    (context, 1.0)
                } else {
                    let negative = sample_negative(ctx.cumulative, rng);
                    if negative == context {
                        continue; // sampled the positive target; skip
                    }
                    (negative, 0.0)
                };
                let mut dot = 0.0f32;
                for d in 0..dim {
                    dot += scratch.center[d] * ctx.syn1.get(target, d);
                }
                let g = gradient(dot, label) * lr;
                if g == 0.0 {
                    continue;
                }
                for d in 0..dim {
                    scratch.accum[d] += g * ctx.syn1.get(target, d);
                    ctx.syn1.add(target, d, g * scratch.center[d]);
                }
            }
            for d in 0..dim {
                ctx.syn0.add(center, d, scratch.accum[d]);
            }
        }
    }
}

/// Trains skip-gram vectors with negative sampling over the corpus.
pub fn train_skipgram(docs: &[TokenizedDoc], config: &EmbeddingConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    if docs.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }

    // Vocabulary: lexicographic order fixes the index assignment.
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    let kept: Vec<(&str, u64)> = counts
        .iter()
        .filter(|&(_, &c)| c >= u64::from(config.min_count))
        .map(|(&t, &c)| (t, c))
        .collect();
    if kept.is_empty() {
        return Err(CoreError::EmptyVocabulary);
    }
    let vocab: BTreeMap<String, usize> = kept
        .iter()
        .enumerate()
        .map(|(i, &(t, _))| (t.to_string(), i))
        .collect();
    let freqs: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
    let total_kept: u64 = freqs.iter().sum();

    let sentences: Vec<Vec<u32>> = docs
        .iter()
        .map(|doc| {
            doc.tokens
                .iter()
                .filter_map(|t| vocab.get(t.as_str()).map(|&i| i as u32))
                .collect::<Vec<u32>>()
        })
        .filter(|s| !s.is_empty())
        .collect();

    let mut cumulative = Vec::with_capacity(freqs.len());
    let mut acc = 0.0f64;
    for &c in &freqs {
        acc += (c as f64).powf(0.75);
        cumulative.push(acc);
    }

    let keep_probs: Vec<f64> = match config.subsample_threshold {
        Some(t) => freqs
            .iter()
            .map(|&c| {
                let f = c as f64 / total_kept as f64;
                ((t / f).sqrt() + t / f).min(1.0)
            })
            .collect(),
        None => vec![1.0; freqs.len()],
    };

    let n = vocab.len();
    let dim = config.dim;
    // Stream 0 seeds initialization; training streams start at 1.
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let syn0 = AtomicMatrix::zeros(n, dim);
    let syn1 = AtomicMatrix::zeros(n, dim);
    for row in 0..n {
        let mut any_nonzero = false;
        for col in 0..dim {
            let v = (init_rng.gen::<f32>() - 0.5) / dim as f32;
            any_nonzero |= v != 0.0;
            syn0.set(row, col, v);
        }
        if !any_nonzero {
            syn0.set(row, 0, 0.5 / dim as f32);
        }
    }

    let progress = AtomicUsize::new(0);
    let ctx = TrainContext {
        syn0: &syn0,
        syn1: &syn1,
        cumulative: &cumulative,
        keep_probs: &keep_probs,
        config,
        progress: &progress,
        total_passes: sentences.len() * config.epochs,
    };

    if config.parallel && sentences.len() > 1 {
        let shards = rayon::current_num_threads().min(sentences.len());
        let chunk_size = sentences.len().div_ceil(shards);
        for epoch in 0..config.epochs {
            sentences
                .chunks(chunk_size)
                .enumerate()
                .collect::<Vec<_>>()
                .into_par_iter()
                .for_each(|(shard, chunk)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(1 + (epoch * shards + shard) as u64);
                    let mut scratch = Scratch::new(dim);
                    for sentence in chunk {
                        train_sentence(&ctx, sentence, &mut rng, &mut scratch);
                    }
                });
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let mut scratch = Scratch::new(dim);
        for _ in 0..config.epochs {
            for sentence in &sentences {
                train_sentence(&ctx, sentence, &mut rng, &mut scratch);
            }
        }
    }

    let model = EmbeddingModel {
        vocab,
        vectors: syn0.into_vec(),
        dim,
        train_config: config.clone(),
        corpus_fingerprint: corpus_fingerprint(docs),
    };
    model.validate()?;
    Ok(model)
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for i in 0..a.len() {
        let (x, y) = (f64::from(a[i]), f64::from(b[i]));
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        dot / (norm_a.sqrt() * norm_b.sqrt())
    }
}

impl EmbeddingModel {
    /// Builds a model directly from (term, vector) pairs — the test hook for
    /// injecting hand-set geometry.
    pub fn from_vectors(entries: Vec<(String, Vec<f32>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(CoreError::EmptyVocabulary);
        }
        let dim = entries[0].1.len();
        let mut vocab = BTreeMap::new();
        let mut vectors = Vec::with_capacity(entries.len() * dim);
        for (i, (term, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(CoreError::LengthMismatch {
                    left: dim,
                    right: vector.len(),
                });
            }
            if vocab.insert(term.clone(), i).is_some() {
                return Err(CoreError::invalid_data(
                    "EmbeddingModel",
                    format!("duplicate term {term:?}"),
                ));
            }
            vectors.extend_from_slice(&vector);
        }
        Ok(EmbeddingModel {
            vocab,
            vectors,
            dim,
            train_config: EmbeddingConfig::default(),
            corpus_fingerprint: String::new(),
        })
    }

    /// Checks the structural invariants (index bijection, no all-zero rows).
    pub fn validate(&self) -> Result<()> {
        let n = self.vocab.len();
        let mut seen = vec![false; n];
        for (term, &idx) in &self.vocab {
            if idx >= n || seen[idx] {
                return Err(CoreError::invalid_data(
                    "EmbeddingModel",
                    format!("index {idx} of {term:?} breaks the vocabulary bijection"),
                ));
            }
            seen[idx] = true;
        }
        for (term, &idx) in &self.vocab {
            if self.row(idx).iter().all(|&v| v == 0.0) {
                return Err(CoreError::invalid_data(
                    "EmbeddingModel",
                    format!("vector for {term:?} is all-zero"),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.vocab.contains_key(term)
    }

    /// Vocabulary terms in index-assignment (lexicographic for trained
    /// models) order of the underlying map.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.vocab.keys().map(String::as_str)
    }

    fn index(&self, term: &str) -> Result<usize> {
        self.vocab
            .get(term)
            .copied()
            .ok_or_else(|| CoreError::UnknownTerm(term.to_string()))
    }

    fn row(&self, idx: usize) -> &[f32] {
        &self.vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, term: &str) -> Result<&[f32]> {
        Ok(self.row(self.index(term)?))
    }

    /// Cosine similarity of two in-vocabulary terms.
    pub fn similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        Ok(cosine(self.row(self.index(t1)?), self.row(self.index(t2)?)))
    }

    /// Top-k most similar terms, excluding the query; ties broken by
    /// lexicographic term order.
    pub fn nearest(&self, term: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let query = self.index(term)?;
        let query_row = self.row(query);
        let mut scored: Vec<(String, f64)> = self
            .vocab
            .iter()
            .filter(|&(_, &idx)| idx != query)
            .map(|(t, &idx)| (t.clone(), cosine(query_row, self.row(idx))))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("cosine is finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Multiplies one stored vector by a constant — a test hook for the
    /// scale-invariance property of cosine similarity.
    pub fn scale_vector(&mut self, term: &str, factor: f32) -> Result<()> {
        let idx = self.index(term)?;
        for v in &mut self.vectors[idx * self.dim..(idx + 1) * self.dim] {
            *v *= factor;
        }
        Ok(())
    }

    /// Writes the binary format: magic, dim (u32 LE), |V| (u32 LE), then the
    /// vocab table (u32 length-prefixed UTF-8, in index order), then all
    /// vectors as little-endian f32 in index order.
    pub fn save_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(BINARY_MAGIC)?;
        writer.write_all(&(self.dim as u32).to_le_bytes())?;
        writer.write_all(&(self.vocab.len() as u32).to_le_bytes())?;
        let mut by_index: Vec<(&String, &usize)> = self.vocab.iter().collect();
        by_index.sort_by_key(|&(_, &idx)| idx);
        for (term, _) in &by_index {
            writer.write_all(&(term.len() as u32).to_le_bytes())?;
            writer.write_all(term.as_bytes())?;
        }
        for (_, &idx) in &by_index {
            for &v in self.row(idx) {
                writer.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the binary format written by [`save_binary`](Self::save_binary).
    /// The file carries no training config; the loaded model keeps defaults
    /// there and fingerprints the file bytes instead of the original corpus.
    pub fn load_binary<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let fingerprint = sha256_hex(&bytes);
        let err = |msg: &str| CoreError::invalid_data("vector file", msg);

        if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
            return Err(err("bad magic"));
        }
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let count = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        if dim == 0 || count == 0 {
            return Err(err("empty dimensions"));
        }
        let mut offset = 16;
        let mut vocab = BTreeMap::new();
        for idx in 0..count {
            if offset + 4 > bytes.len() {
                return Err(err("truncated vocab table"));
            }
            let len = u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap()) as usize;
            offset += 4;
            if offset + len > bytes.len() {
                return Err(err("truncated vocab entry"));
            }
            let term = std::str::from_utf8(&bytes[offset..offset + len])
                .map_err(|_| err("vocab entry is not UTF-8"))?
                .to_string();
            offset += len;
            if vocab.insert(term, idx).is_some() {
                return Err(err("duplicate vocab entry"));
            }
        }
        let expected = count * dim * 4;
        if bytes.len() - offset != expected {
            return Err(err("vector payload size mismatch"));
        }
        let vectors: Vec<f32> = bytes[offset..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(EmbeddingModel {
            vocab,
            vectors,
            dim,
            train_config: EmbeddingConfig::default(),
            corpus_fingerprint: fingerprint,
        })
    }

    /// Writes the interchange text format: one `term v1 .. vd` line per term,
    /// in index order. Float formatting round-trips exactly.
    pub fn save_text<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut by_index: Vec<(&String, &usize)> = self.vocab.iter().collect();
        by_index.sort_by_key(|&(_, &idx)| idx);
        for (term, &idx) in by_index {
            write!(writer, "{term}")?;
            for &v in self.row(idx) {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    pub fn load_text<R: BufRead>(reader: R) -> Result<Self> {
        let err = |msg: String| CoreError::invalid_data("vector text file", msg);
        let mut entries = Vec::new();
        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let term = parts
                .next()
                .ok_or_else(|| err(format!("line {}: empty", line_no + 1)))?
                .to_string();
            let vector: Vec<f32> = parts
                .map(|p| {
                    p.parse::<f32>()
                        .map_err(|_| err(format!("line {}: bad float {p:?}", line_no + 1)))
                })
                .collect::<Result<_>>()?;
            entries.push((term, vector));
        }
        Self::from_vectors(entries)
    }
}
