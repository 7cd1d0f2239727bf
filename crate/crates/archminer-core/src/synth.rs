//! Deterministic synthetic corpora for tests and benchmarks: a two-topic
//! embedding corpus, a planted-signal classification corpus, a
//! synonym-shifted ablation fixture, and a miniature Q&A dump for
//! end-to-end pipeline runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{LabelRecord, PostId};
use crate::dictionary::{DictEntry, Dictionary, SeedLexicon, TermOrigin};
use crate::features::SelectionRule;
use crate::preprocess::TokenizedDoc;

/// Lowercase-alphabetic word: the prefix plus a base-26 suffix, always long
/// enough to clear the token length filter.
fn letter_word(prefix: &str, index: usize) -> String {
    let mut suffix = String::new();
    let mut n = index;
    loop {
        suffix.insert(0, (b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    format!("{prefix}{suffix:a>2}")
}

fn letter_vocab(prefix: &str, size: usize) -> Vec<String> {
    (0..size).map(|i| letter_word(prefix, i)).collect()
}

// ---------------------------------------------------------------------------
// Two-topic corpus (embedding sanity)
// ---------------------------------------------------------------------------

/// Documents drawn from two disjoint vocabularies, so co-occurrence exists
/// only within a topic.
#[derive(Debug, Clone)]
pub struct TwoTopicCorpus {
    pub docs: Vec<TokenizedDoc>,
    pub topic_a: Vec<String>,
    pub topic_b: Vec<String>,
}

pub fn two_topic_corpus(
    seed: u64,
    docs_per_topic: usize,
    vocab_per_topic: usize,
    doc_len: usize,
) -> TwoTopicCorpus {
    assert!(vocab_per_topic > 0 && doc_len > 0);
    let topic_a = letter_vocab("lumen", vocab_per_topic);
    let topic_b = letter_vocab("grove", vocab_per_topic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(2 * docs_per_topic);
    for i in 0..2 * docs_per_topic {
        let vocab = if i % 2 == 0 { &topic_a } else { &topic_b };
        let tokens: Vec<String> = (0..doc_len)
            .map(|_| vocab[rng.gen_range(0..vocab.len())].clone())
            .collect();
        docs.push(
            TokenizedDoc::new(PostId::new(i as u64 + 1), tokens)
                .expect("synthetic tokens are well-formed"),
        );
    }
    TwoTopicCorpus {
        docs,
        topic_a,
        topic_b,
    }
}

// ---------------------------------------------------------------------------
// Planted classification corpus
// ---------------------------------------------------------------------------

/// Documents with binary ground-truth labels.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub docs: Vec<TokenizedDoc>,
    pub labels: Vec<bool>,
}

/// Positive docs mix tactic and attribute seed tokens into filler text;
/// negative docs are filler only. The filler vocabulary is checked disjoint
/// from the seed lexicon's stemmed tokens.
pub fn planted_corpus(seed: u64, planted: usize, distractors: usize) -> LabeledCorpus {
    const DOC_LEN: usize = 20;
    let lexicon = SeedLexicon::builtin();
    let seed_tokens = lexicon.content_token_set();
    let (at_tokens, qa_tokens) = category_token_pools(&lexicon);
    let fillers = disjoint_fillers("quill", 120, &lexicon);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(planted + distractors);
    let mut labels = Vec::with_capacity(planted + distractors);
    for i in 0..planted + distractors {
        let positive = i < planted;
        let mut tokens: Vec<String> = Vec::with_capacity(DOC_LEN);
        if positive {
            for _ in 0..2 {
                tokens.push(at_tokens[rng.gen_range(0..at_tokens.len())].clone());
                tokens.push(qa_tokens[rng.gen_range(0..qa_tokens.len())].clone());
            }
        }
        while tokens.len() < DOC_LEN {
            tokens.push(fillers[rng.gen_range(0..fillers.len())].clone());
        }
        tokens.shuffle(&mut rng);
        debug_assert!(positive || tokens.iter().all(|t| !seed_tokens.contains(t)));
        docs.push(
            TokenizedDoc::new(PostId::new(i as u64 + 1), tokens)
                .expect("synthetic tokens are well-formed"),
        );
        labels.push(positive);
    }
    LabeledCorpus { docs, labels }
}

/// Distinct stemmed content tokens of tactic phrases and attribute phrases.
fn category_token_pools(lexicon: &SeedLexicon) -> (Vec<String>, Vec<String>) {
    use crate::dictionary::Category;
    let mut at_tokens = std::collections::BTreeSet::new();
    let mut qa_tokens = std::collections::BTreeSet::new();
    for (category, phrase) in lexicon.phrases() {
        let pool = match category {
            Category::At(_) => &mut at_tokens,
            Category::Qa(_) => &mut qa_tokens,
        };
        pool.extend(phrase.content_tokens.iter().cloned());
    }
    (
        at_tokens.into_iter().collect(),
        qa_tokens.into_iter().collect(),
    )
}

/// Filler vocabulary guaranteed not to collide with any seed token.
fn disjoint_fillers(prefix: &str, size: usize, lexicon: &SeedLexicon) -> Vec<String> {
    let seed_tokens = lexicon.content_token_set();
    let fillers = letter_vocab(prefix, size);
    assert!(
        fillers.iter().all(|f| !seed_tokens.contains(f)),
        "filler vocabulary collides with the seed lexicon"
    );
    fillers
}

// ---------------------------------------------------------------------------
// Synonym-shifted ablation fixture
// ---------------------------------------------------------------------------

/// A train/test pair where test positives use only dictionary-expanded
/// synonyms, never the seed terms the training set leans on. Gain-ratio
/// selection at the bundled threshold drops the synonyms; dictionary
/// augmentation is what keeps them in the feature space.
#[derive(Debug, Clone)]
pub struct AblationFixture {
    pub train_docs: Vec<TokenizedDoc>,
    pub train_labels: Vec<bool>,
    pub test_docs: Vec<TokenizedDoc>,
    pub test_labels: Vec<bool>,
    pub dictionary: Dictionary,
    pub selection: SelectionRule,
}

const ABLATION_SEED_TERMS: [&str; 2] = ["heartbeat", "timestamp"];
const ABLATION_SYNONYMS: [&str; 6] = [
    "keepaliv", "watchdog", "loadtim", "throttl", "latenc", "failov",
];

pub fn ablation_fixture(seed: u64) -> AblationFixture {
    const DOC_LEN: usize = 12;
    let lexicon = SeedLexicon::builtin();
    let fillers = disjoint_fillers("brume", 40, &lexicon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let pad = |mut tokens: Vec<String>, rng: &mut ChaCha8Rng| -> Vec<String> {
        while tokens.len() < DOC_LEN {
            tokens.push(fillers[rng.gen_range(0..fillers.len())].clone());
        }
        tokens.shuffle(rng);
        tokens
    };

    let mut train_docs = Vec::new();
    let mut train_labels = Vec::new();
    let mut next_id = 1u64;
    let mut push_doc =
        |docs: &mut Vec<TokenizedDoc>, labels: &mut Vec<bool>, tokens: Vec<String>, label: bool| {
            docs.push(
                TokenizedDoc::new(PostId::new(next_id), tokens)
                    .expect("synthetic tokens are well-formed"),
            );
            labels.push(label);
            next_id += 1;
        };

    // 40 positives carried by the seed terms alone.
    for _ in 0..40 {
        let tokens = ABLATION_SEED_TERMS.iter().map(|t| t.to_string()).collect();
        push_doc(
            &mut train_docs,
            &mut train_labels,
            pad(tokens, &mut rng),
            true,
        );
    }
    // 20 positives carried only by synonyms, two per doc, so each synonym
    // stays rare enough that its gain ratio falls below the selection
    // threshold.
    for i in 0..20 {
        let tokens = vec![
            ABLATION_SYNONYMS[i % 6].to_string(),
            ABLATION_SYNONYMS[(i + 1) % 6].to_string(),
        ];
        push_doc(
            &mut train_docs,
            &mut train_labels,
            pad(tokens, &mut rng),
            true,
        );
    }
    // 60 negatives of pure filler.
    for _ in 0..60 {
        push_doc(
            &mut train_docs,
            &mut train_labels,
            pad(Vec::new(), &mut rng),
            false,
        );
    }

    // Held-out set: positives carry four synonyms and no seed term.
    let mut test_docs = Vec::new();
    let mut test_labels = Vec::new();
    for i in 0..30 {
        let tokens: Vec<String> = (0..4)
            .map(|k| ABLATION_SYNONYMS[(i + k) % 6].to_string())
            .collect();
        push_doc(&mut test_docs, &mut test_labels, pad(tokens, &mut rng), true);
    }
    for _ in 0..30 {
        push_doc(
            &mut test_docs,
            &mut test_labels,
            pad(Vec::new(), &mut rng),
            false,
        );
    }

    // The dictionary that expansion would have produced: the two seed terms
    // plus the six synonyms, each linked to its seed.
    let mut entries: Vec<DictEntry> = ABLATION_SEED_TERMS
        .iter()
        .map(|t| DictEntry {
            term: t.to_string(),
            gain_ratio: 0.0,
            origin: TermOrigin::Seed,
            iteration_added: 0,
        })
        .collect();
    let mut edges = Vec::new();
    for (i, synonym) in ABLATION_SYNONYMS.iter().enumerate() {
        entries.push(DictEntry {
            term: synonym.to_string(),
            gain_ratio: 0.45,
            origin: TermOrigin::Expanded,
            iteration_added: 1,
        });
        edges.push((
            synonym.to_string(),
            ABLATION_SEED_TERMS[i % 2].to_string(),
            0.6,
        ));
    }
    let dictionary = Dictionary::from_parts(entries, edges).expect("fixture dictionary is valid");

    AblationFixture {
        train_docs,
        train_labels,
        test_docs,
        test_labels,
        dictionary,
        selection: SelectionRule::Threshold(0.32),
    }
}

// ---------------------------------------------------------------------------
// Agreement lists
// ---------------------------------------------------------------------------

/// Expands a 2x2 agreement table into paired label lists:
/// (both yes, A yes / B no, A no / B yes, both no).
pub fn agreement_lists(
    both_yes: usize,
    a_only: usize,
    b_only: usize,
    both_no: usize,
) -> (Vec<bool>, Vec<bool>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (count, label_a, label_b) in [
        (both_yes, true, true),
        (a_only, true, false),
        (b_only, false, true),
        (both_no, false, false),
    ] {
        for _ in 0..count {
            a.push(label_a);
            b.push(label_b);
        }
    }
    (a, b)
}

// ---------------------------------------------------------------------------
// Synthetic Q&A dump
// ---------------------------------------------------------------------------

/// A miniature Q&A site export plus ground-truth labels for its questions.
#[derive(Debug, Clone)]
pub struct SyntheticDump {
    /// Stack-exchange-style posts XML.
    pub xml: String,
    /// One ground-truth label per question thread.
    pub labels: Vec<LabelRecord>,
    /// Question ids of the planted (positive) threads.
    pub planted_question_ids: Vec<u64>,
}

fn escape_xml_attr(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Raw (unstemmed) phrases that planted threads weave into their prose; two
/// tactics and two attributes keep every stage of the pipeline non-trivial.
const PLANTED_PHRASES: [&str; 4] = ["heartbeat", "response time", "reliability", "timer"];

pub fn synthetic_dump(seed: u64, planted: usize, distractors: usize) -> SyntheticDump {
    let lexicon = SeedLexicon::builtin();
    let fillers = disjoint_fillers("maris", 30, &lexicon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sentence = |rng: &mut ChaCha8Rng, planted_words: &[&str]| -> String {
        let mut words: Vec<String> = (0..8)
            .map(|_| fillers[rng.gen_range(0..fillers.len())].clone())
            .collect();
        for word in planted_words {
            words.push(word.to_string());
        }
        words.shuffle(rng);
        format!("{}.", words.join(" "))
    };

    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n");
    let mut labels = Vec::new();
    let mut planted_question_ids = Vec::new();
    let mut next_id = 1u64;

    for i in 0..planted + distractors {
        let positive = i < planted;
        let question_id = next_id;
        let answer_id = next_id + 1;
        next_id += 2;

        let (question_body, answer_body) = if positive {
            planted_question_ids.push(question_id);
            (
                format!(
                    "<p>{} {}</p>",
                    sentence(&mut rng, &[PLANTED_PHRASES[0], PLANTED_PHRASES[1]]),
                    sentence(&mut rng, &[PLANTED_PHRASES[2]]),
                ),
                format!(
                    "<p>{}</p>",
                    sentence(&mut rng, &[PLANTED_PHRASES[3], PLANTED_PHRASES[0]]),
                ),
            )
        } else {
            (
                format!(
                    "<p>{} {}</p>",
                    sentence(&mut rng, &[]),
                    sentence(&mut rng, &[]),
                ),
                format!("<p>{}</p>", sentence(&mut rng, &[])),
            )
        };

        let title = format!("Question {question_id}");
        xml.push_str(&format!(
            "  <row Id=\"{question_id}\" PostTypeId=\"1\" Title=\"{}\" Body=\"{}\" \
             Tags=\"&lt;software-architecture&gt;\" Score=\"{}\" AnswerCount=\"1\" \
             CreationDate=\"2020-01-{:02}T00:00:00\" />\n",
            escape_xml_attr(&title),
            escape_xml_attr(&question_body),
            rng.gen_range(1..=9),
            (i % 28) + 1,
        ));
        xml.push_str(&format!(
            "  <row Id=\"{answer_id}\" PostTypeId=\"2\" ParentId=\"{question_id}\" Body=\"{}\" \
             Score=\"{}\" CreationDate=\"2020-02-{:02}T00:00:00\" />\n",
            escape_xml_attr(&answer_body),
            rng.gen_range(0..=9),
            (i % 28) + 1,
        ));

        labels.push(LabelRecord {
            post_id: PostId::new(question_id),
            label: positive,
        });
    }
    xml.push_str("</posts>\n");

    SyntheticDump {
        xml,
        labels,
        planted_question_ids,
    }
}
