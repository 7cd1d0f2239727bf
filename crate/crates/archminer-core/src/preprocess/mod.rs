//! Text preprocessing: HTML post bodies to stemmed token streams.
//!
//! The pipeline is strip_code -> strip_html -> tokenize -> remove_stopwords
//! -> stem, with an optional noun-lexicon filter that is only applied on the
//! dictionary-training corpus path. A parallel "match stream" variant keeps
//! stopwords and short tokens so multi-word seed phrases can be located as
//! contiguous token sequences.

mod porter;

pub use porter::porter_stem;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{PostId, Thread};
use crate::error::{CoreError, Result};

/// A preprocessed document: the stemmed token stream of one thread.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub post_id: PostId,
    /// Stemmed lowercase tokens in original order.
    pub tokens: Vec<String>,
    /// Token -> occurrence count; values sum to `length`.
    pub token_counts: BTreeMap<String, u32>,
    /// Number of tokens (the post length used by the candidate-count rule).
    pub length: usize,
}

impl TokenizedDoc {
    /// Builds a doc from an ordered token list, enforcing the token shape:
    /// every token is lowercase ASCII letters only, at least 3 characters.
    pub fn new(post_id: PostId, tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(CoreError::EmptyDocument {
                post_id: post_id.get(),
            });
        }
        for token in &tokens {
            if token.len() < 3 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(CoreError::invalid_data(
                    "TokenizedDoc",
                    format!("token {token:?} violates ^[a-z]+$ with length >= 3"),
                ));
            }
        }
        let mut token_counts = BTreeMap::new();
        for token in &tokens {
            *token_counts.entry(token.clone()).or_insert(0u32) += 1;
        }
        let length = tokens.len();
        Ok(TokenizedDoc {
            post_id,
            tokens,
            token_counts,
            length,
        })
    }

    /// True when the doc contains the given (already stemmed) term.
    pub fn contains(&self, term: &str) -> bool {
        self.token_counts.contains_key(term)
    }

    /// Occurrence count of a term (0 when absent).
    pub fn count(&self, term: &str) -> u32 {
        self.token_counts.get(term).copied().unwrap_or(0)
    }
}

/// On-disk cache record: one JSON object per line, {post_id, tokens}.
#[derive(Serialize, Deserialize)]
struct CacheRecord {
    post_id: PostId,
    tokens: Vec<String>,
}

/// Writes docs to the JSONL token cache.
pub fn write_token_cache<W: Write>(docs: &[TokenizedDoc], mut writer: W) -> Result<()> {
    for doc in docs {
        let record = CacheRecord {
            post_id: doc.post_id,
            tokens: doc.tokens.clone(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads docs back from the JSONL token cache.
pub fn read_token_cache<R: BufRead>(reader: R) -> Result<Vec<TokenizedDoc>> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CacheRecord = serde_json::from_str(&line).map_err(|e| {
            CoreError::malformed(format!("token cache line {}", idx + 1), e.to_string())
        })?;
        docs.push(TokenizedDoc::new(record.post_id, record.tokens)?);
    }
    Ok(docs)
}

/// A stopword list. Tokens on the list, and all tokens of length <= 2, are
/// removed before stemming.
#[derive(Debug, Clone)]
pub struct StopList {
    pub words: BTreeSet<String>,
}

impl StopList {
    /// Parses the one-word-per-line format ('#' starts a comment line) and
    /// validates that the list is non-empty and contains the four anchor
    /// words every English stop list must have.
    pub fn parse(text: &str) -> Result<Self> {
        let words = read_word_list(text);
        for anchor in ["the", "to", "of", "is"] {
            if !words.contains(anchor) {
                return Err(CoreError::invalid_data(
                    "stop list",
                    format!("missing required stopword {anchor:?}"),
                ));
            }
        }
        Ok(StopList { words })
    }

    /// The bundled standard English stop list (~180 words).
    pub fn standard() -> Self {
        Self::parse(include_str!("../../data/stopwords.txt"))
            .expect("bundled stop list is valid")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// Parses a word-per-line file: blank lines and '#' comment lines are
/// skipped, words are lowercased.
pub fn read_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_ascii_lowercase)
        .collect()
}

/// The bundled noun lexicon (stemmed noun forms) for the dictionary-corpus
/// noun filter.
pub fn standard_noun_lexicon() -> BTreeSet<String> {
    read_word_list(include_str!("../../data/nouns.txt"))
}

/// Options for [`preprocess_thread`].
#[derive(Debug, Clone, Default)]
pub struct PreprocessOptions {
    /// When set, only tokens in this (stemmed) lexicon survive. Used for the
    /// dictionary-training corpus, never for classifier features.
    pub noun_lexicon: Option<BTreeSet<String>>,
}

/// One `<pre>`/`<code>` style element occurrence in raw HTML.
struct Element {
    outer: Range<usize>,
    inner: Range<usize>,
}

/// True when the byte at `pos` ends a tag-name token (so `<pre` is a match
/// but `<pred` is not).
fn tag_boundary(bytes: &[u8], pos: usize) -> bool {
    pos == bytes.len() || matches!(bytes[pos], b'>' | b'/' | b' ' | b'\t' | b'\n' | b'\r')
}

/// First occurrence of `<tag` (opening) at or after `from`, with a proper
/// name boundary.
fn find_open(lower: &str, from: usize, tag: &str) -> Option<usize> {
    let pat = format!("<{tag}");
    let bytes = lower.as_bytes();
    let mut j = from;
    while let Some(off) = lower[j..].find(&pat) {
        let pos = j + off;
        if tag_boundary(bytes, pos + pat.len()) {
            return Some(pos);
        }
        j = pos + 1;
    }
    None
}

/// First occurrence of `</tag` (closing) at or after `from`, with a proper
/// name boundary.
fn find_close(lower: &str, from: usize, tag: &str) -> Option<usize> {
    let pat = format!("</{tag}");
    let bytes = lower.as_bytes();
    let mut j = from;
    while let Some(off) = lower[j..].find(&pat) {
        let pos = j + off;
        if tag_boundary(bytes, pos + pat.len()) {
            return Some(pos);
        }
        j = pos + 1;
    }
    None
}

/// Finds elements of any of the given tag names, case-insensitively and
/// nesting-aware per tag name. Unclosed elements extend to the end of the
/// text.
fn find_tag_elements(html: &str, tags: &[&str]) -> Vec<Element> {
    let lower = html.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let len = bytes.len();
    let mut elements = Vec::new();
    let mut i = 0;

    while i < len {
        // Earliest opening tag of any requested name.
        let next = tags
            .iter()
            .filter_map(|&tag| find_open(&lower, i, tag).map(|pos| (pos, tag)))
            .min_by_key(|&(pos, _)| pos);
        let Some((pos, tag)) = next else {
            break;
        };
        let Some(gt_off) = lower[pos..].find('>') else {
            // Opening tag never closes: swallow the rest of the text.
            elements.push(Element {
                outer: pos..len,
                inner: len..len,
            });
            break;
        };
        let open_end = pos + gt_off + 1;
        if bytes[open_end - 2] == b'/' {
            // Self-closing: empty element.
            elements.push(Element {
                outer: pos..open_end,
                inner: open_end..open_end,
            });
            i = open_end;
            continue;
        }
        // Scan for the matching close tag, tracking same-tag nesting.
        let mut depth = 1usize;
        let mut j = open_end;
        let element_end = loop {
            let next_open = find_open(&lower, j, tag);
            let next_close = find_close(&lower, j, tag);
            match (next_open, next_close) {
                (Some(o), Some(c)) if o < c => {
                    depth += 1;
                    j = o + 1;
                }
                (_, Some(c)) => {
                    depth -= 1;
                    let close_gt = lower[c..].find('>').map(|o| c + o + 1).unwrap_or(len);
                    if depth == 0 {
                        break Some((c, close_gt));
                    }
                    j = close_gt;
                }
                (Some(o), None) => {
                    depth += 1;
                    j = o + 1;
                }
                (None, None) => break None,
            }
        };
        match element_end {
            Some((inner_end, outer_end)) => {
                elements.push(Element {
                    outer: pos..outer_end,
                    inner: open_end..inner_end,
                });
                i = outer_end;
            }
            None => {
                elements.push(Element {
                    outer: pos..len,
                    inner: open_end..len,
                });
                break;
            }
        }
    }
    elements
}

/// True when the HTML contains a code *block*: a `<pre>` or `<code>` element
/// spanning at least two lines or at least 80 characters. Inline one-word
/// code spans do not count. Malformed HTML is treated as plain text.
pub fn contains_code_block(html: &str) -> bool {
    find_tag_elements(html, &["pre", "code"]).iter().any(|e| {
        let inner = &html[e.inner.clone()];
        inner.contains('\n') || inner.chars().count() >= 80
    })
}

/// Removes all `<pre>` and `<code>` elements (tags and contents). The
/// remaining HTML is left intact.
pub fn strip_code(html: &str) -> String {
    let elements = find_tag_elements(html, &["pre", "code"]);
    if elements.is_empty() {
        return html.to_string();
    }
    let mut out = String::with_capacity(html.len());
    let mut cursor = 0;
    for e in &elements {
        out.push_str(&html[cursor..e.outer.start]);
        cursor = e.outer.end;
    }
    out.push_str(&html[cursor..]);
    out
}

/// HTML tags whose removal inserts a single space (elements that visually
/// break the text flow). Other tags are removed without residue.
const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "li", "main", "nav", "ol", "p", "pre", "section", "table", "tbody", "td", "tfoot", "th",
    "thead", "tr", "ul",
];

fn is_block_tag(name: &str) -> bool {
    BLOCK_TAGS.contains(&name)
}

/// Decodes one entity body (the text between '&' and ';'). Returns the
/// decoded string, or None when the entity is unknown and should be kept
/// verbatim.
fn decode_entity(body: &str) -> Option<String> {
    match body {
        "amp" => Some("&".to_string()),
        "lt" => Some("<".to_string()),
        "gt" => Some(">".to_string()),
        "quot" => Some("\"".to_string()),
        "apos" => Some("'".to_string()),
        "nbsp" => Some(" ".to_string()),
        _ => {
            let digits = body.strip_prefix('#')?;
            let code = if let Some(hex) = digits.strip_prefix(['x', 'X']) {
                u32::from_str_radix(hex, 16).ok()?
            } else {
                digits.parse::<u32>().ok()?
            };
            char::from_u32(code).map(|c| c.to_string())
        }
    }
}

/// Removes HTML tags and decodes entities. Block-level tags become single
/// spaces; inline tags vanish. Stray raw angle brackets are replaced by
/// spaces, though brackets decoded from entities are emitted as-is.
pub fn strip_html(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let bytes = html.as_bytes();
    let len = bytes.len();
    let mut i = 0;
    while i < len {
        match bytes[i] {
            b'<' => {
                let Some(gt_off) = html[i..].find('>') else {
                    out.push(' ');
                    i += 1;
                    continue;
                };
                let tag_body = &html[i + 1..i + gt_off];
                let name: String = tag_body
                    .trim_start_matches('/')
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric())
                    .collect::<String>()
                    .to_ascii_lowercase();
                if is_block_tag(&name) {
                    out.push(' ');
                }
                i += gt_off + 1;
            }
            b'>' => {
                out.push(' ');
                i += 1;
            }
            b'&' => {
                let semi = html[i + 1..].find(';').map(|o| i + 1 + o);
                match semi.filter(|&s| s > i + 1 && s <= i + 12) {
                    Some(s) => match decode_entity(&html[i + 1..s]) {
                        Some(decoded) => {
                            out.push_str(&decoded);
                            i = s + 1;
                        }
                        None => {
                            out.push('&');
                            i += 1;
                        }
                    },
                    None => {
                        out.push('&');
                        i += 1;
                    }
                }
            }
            _ => {
                // Advance one full UTF-8 scalar.
                let ch = html[i..].chars().next().expect("in-bounds char");
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    out
}

/// Splits text into maximal runs of ASCII letters, lowercased. Digits and
/// all other characters are token boundaries.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_ascii_alphabetic() {
            current.push(c.to_ascii_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Drops stoplisted tokens and every token of length <= 2, preserving order.
pub fn remove_stopwords(tokens: &[String], stoplist: &StopList) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.len() > 2 && !stoplist.contains(t))
        .cloned()
        .collect()
}

/// Stems every token, preserving order and multiplicity.
pub fn stem(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| porter_stem(t)).collect()
}

/// Retains only tokens present in the (stemmed) noun lexicon.
pub fn noun_filter(tokens: &[String], noun_lexicon: &BTreeSet<String>) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| noun_lexicon.contains(t.as_str()))
        .cloned()
        .collect()
}

/// Concatenates a thread's question title, question body, and answer bodies.
pub fn thread_text(thread: &Thread) -> String {
    let mut text = String::new();
    if let Some(title) = &thread.question.title {
        text.push_str(title);
        text.push('\n');
    }
    text.push_str(&thread.question.body_html);
    for answer in &thread.answers {
        text.push('\n');
        text.push_str(&answer.body_html);
    }
    text
}

/// Full preprocessing pipeline for one thread. Stemmed tokens shorter than
/// three characters (which stemming can produce, e.g. "ties" -> "ti") are
/// dropped so the output always satisfies the token shape.
pub fn preprocess_thread(
    thread: &Thread,
    stoplist: &StopList,
    options: &PreprocessOptions,
) -> Result<TokenizedDoc> {
    let text = thread_text(thread);
    let tokens = pipeline_tokens(&text, stoplist, options);
    if tokens.is_empty() {
        return Err(CoreError::EmptyDocument {
            post_id: thread.question.id.get(),
        });
    }
    TokenizedDoc::new(thread.question.id, tokens)
}

/// The token pipeline on raw text (shared by [`preprocess_thread`] and
/// callers that already concatenated their text).
pub fn pipeline_tokens(
    text: &str,
    stoplist: &StopList,
    options: &PreprocessOptions,
) -> Vec<String> {
    let stripped = strip_html(&strip_code(text));
    let tokens = tokenize(&stripped);
    let tokens = remove_stopwords(&tokens, stoplist);
    let mut tokens = stem(&tokens);
    if let Some(lexicon) = &options.noun_lexicon {
        tokens = noun_filter(&tokens, lexicon);
    }
    tokens.retain(|t| t.len() >= 3);
    tokens
}

/// The match stream used for phrase detection: stemmed tokens with *no*
/// stopword or length filtering, so multi-word phrases like "first in first
/// out" remain contiguous.
pub fn match_stream(text: &str) -> Vec<String> {
    let stripped = strip_html(&strip_code(text));
    stem(&tokenize(&stripped))
}
