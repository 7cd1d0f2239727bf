//! Q&A corpus handling: posts, threads, dump parsing, and thread filtering.
//!
//! Two input formats are supported: the Stack-Exchange-style `Posts.xml`
//! dump (`<row .../>` elements with attribute-encoded fields) and a
//! line-delimited JSON format that mirrors [`Post`] field-for-field. The
//! JSONL format is the canonical fixture format and round-trips exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::preprocess::contains_code_block;

/// Identifier of a post (question or answer). Always positive.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PostId(u64);

impl PostId {
    pub fn new(id: u64) -> Self {
        PostId(id)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostKind {
    Question,
    Answer,
}

/// One post from the dump: a question or an answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: PostId,
    pub kind: PostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<PostId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body_html: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub score: i64,
    #[serde(default)]
    pub answer_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_answer_id: Option<PostId>,
    pub created_at: String,
}

impl Post {
    /// Checks the structural invariants: answers have (exactly) a parent,
    /// questions have a title.
    pub fn validate(&self) -> Result<()> {
        if self.id.get() == 0 {
            return Err(CoreError::invalid_data("Post", "id must be positive"));
        }
        match self.kind {
            PostKind::Answer if self.parent_id.is_none() => Err(CoreError::invalid_data(
                "Post",
                format!("answer {} has no parent_id", self.id),
            )),
            PostKind::Question if self.parent_id.is_some() => Err(CoreError::invalid_data(
                "Post",
                format!("question {} has a parent_id", self.id),
            )),
            PostKind::Question if self.title.is_none() => Err(CoreError::invalid_data(
                "Post",
                format!("question {} has no title", self.id),
            )),
            _ => Ok(()),
        }
    }
}

/// A question with its answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub question: Post,
    pub answers: Vec<Post>,
}

impl Thread {
    pub fn validate(&self) -> Result<()> {
        self.question.validate()?;
        if self.question.kind != PostKind::Question {
            return Err(CoreError::invalid_data("Thread", "question post is not a question"));
        }
        let mut seen = BTreeSet::new();
        for answer in &self.answers {
            answer.validate()?;
            if answer.parent_id != Some(self.question.id) {
                return Err(CoreError::invalid_data(
                    "Thread",
                    format!("answer {} does not belong to question {}", answer.id, self.question.id),
                ));
            }
            if !seen.insert(answer.id) {
                return Err(CoreError::invalid_data(
                    "Thread",
                    format!("duplicate answer id {}", answer.id),
                ));
            }
        }
        Ok(())
    }
}

/// Thread retention criteria.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFilter {
    /// Minimum number of answers a thread must have.
    pub min_answers: u32,
    /// Require the question score to be strictly positive.
    pub require_positive_score: bool,
    /// When set, keep only threads whose tag set intersects this set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_tags: Option<BTreeSet<String>>,
    /// Drop threads whose question body contains a code block (used for the
    /// dictionary-training corpus).
    pub exclude_code_in_question: bool,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        CorpusFilter {
            min_answers: 1,
            require_positive_score: true,
            required_tags: None,
            exclude_code_in_question: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    SeXml,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Malformed rows are yielded as errors and parsing continues. The
    /// default for real dumps.
    #[default]
    Lenient,
    /// The first malformed row aborts parsing. The default for fixtures.
    Strict,
}

/// Streaming post reader. Yields `Ok(Post)` per well-formed row and
/// `Err(...)` per malformed one; after an error in strict mode the stream
/// ends. Rows with a `PostTypeId` other than 1 or 2 are silently skipped.
pub struct PostStream<R: BufRead> {
    inner: StreamInner<R>,
    mode: ParseMode,
    fused: bool,
}

enum StreamInner<R: BufRead> {
    Xml {
        reader: Reader<R>,
        buf: Vec<u8>,
    },
    Jsonl {
        reader: R,
        line_no: usize,
    },
}

/// Opens a streaming parse over a dump in the given format.
pub fn parse_dump<R: BufRead>(input: R, format: DumpFormat, mode: ParseMode) -> PostStream<R> {
    let inner = match format {
        DumpFormat::SeXml => {
            let mut reader = Reader::from_reader(input);
            reader.config_mut().trim_text(true);
            StreamInner::Xml {
                reader,
                buf: Vec::new(),
            }
        }
        DumpFormat::Jsonl => StreamInner::Jsonl {
            reader: input,
            line_no: 0,
        },
    };
    PostStream {
        inner,
        mode,
        fused: false,
    }
}

/// Collects a dump into memory. In strict mode the first malformed row is
/// returned as the error; in lenient mode malformed rows are collected
/// separately and parsing continues.
pub fn collect_posts<R: BufRead>(
    input: R,
    format: DumpFormat,
    mode: ParseMode,
) -> Result<(Vec<Post>, Vec<CoreError>)> {
    let mut posts = Vec::new();
    let mut malformed = Vec::new();
    for item in parse_dump(input, format, mode) {
        match item {
            Ok(post) => posts.push(post),
            Err(e) if mode == ParseMode::Strict => return Err(e),
            Err(e) => malformed.push(e),
        }
    }
    Ok((posts, malformed))
}

impl<R: BufRead> Iterator for PostStream<R> {
    type Item = Result<Post>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.fused {
            return None;
        }
        loop {
            let outcome = match &mut self.inner {
                StreamInner::Xml { reader, buf } => next_xml_post(reader, buf),
                StreamInner::Jsonl { reader, line_no } => next_jsonl_post(reader, line_no),
            };
            match outcome {
                RowOutcome::Post(post) => return Some(Ok(post)),
                RowOutcome::Skip => continue,
                RowOutcome::Malformed(e) => {
                    if self.mode == ParseMode::Strict {
                        self.fused = true;
                    }
                    return Some(Err(e));
                }
                RowOutcome::Fatal(e) => {
                    self.fused = true;
                    return Some(Err(e));
                }
                RowOutcome::End => {
                    self.fused = true;
                    return None;
                }
            }
        }
    }
}

enum RowOutcome {
    Post(Post),
    Skip,
    Malformed(CoreError),
    Fatal(CoreError),
    End,
}

fn next_xml_post<R: BufRead>(reader: &mut Reader<R>, buf: &mut Vec<u8>) -> RowOutcome {
    loop {
        buf.clear();
        let position = reader.buffer_position();
        match reader.read_event_into(buf) {
            Ok(Event::Empty(e)) | Ok(Event::Start(e)) => {
                if e.name().as_ref() != b"row" {
                    continue;
                }
                return match post_from_row(&e, position) {
                    Ok(Some(post)) => RowOutcome::Post(post),
                    Ok(None) => RowOutcome::Skip,
                    Err(err) => RowOutcome::Malformed(err),
                };
            }
            Ok(Event::Eof) => return RowOutcome::End,
            Ok(_) => continue,
            Err(e) => {
                // XML syntax errors poison the stream; recovery past them is
                // not reliable, so they are fatal in both modes.
                return RowOutcome::Fatal(CoreError::malformed(
                    format!("byte offset {position}"),
                    e.to_string(),
                ));
            }
        }
    }
}

fn post_from_row(
    row: &quick_xml::events::BytesStart<'_>,
    position: u64,
) -> Result<Option<Post>> {
    let location = format!("byte offset {position}");
    let mut id = None;
    let mut post_type = None;
    let mut parent_id = None;
    let mut title = None;
    let mut body = None;
    let mut tags = None;
    let mut score = None;
    let mut answer_count = None;
    let mut accepted = None;
    let mut created = None;

    for attr in row.attributes() {
        let attr = attr.map_err(|e| CoreError::malformed(&location, e.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|e| CoreError::malformed(&location, e.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            b"Id" => id = Some(value),
            b"PostTypeId" => post_type = Some(value),
            b"ParentId" => parent_id = Some(value),
            b"Title" => title = Some(value),
            b"Body" => body = Some(value),
            b"Tags" => tags = Some(value),
            b"Score" => score = Some(value),
            b"AnswerCount" => answer_count = Some(value),
            b"AcceptedAnswerId" => accepted = Some(value),
            b"CreationDate" => created = Some(value),
            _ => {} // unknown attributes ignored
        }
    }

    let kind = match post_type.as_deref() {
        Some("1") => PostKind::Question,
        Some("2") => PostKind::Answer,
        Some(_) => return Ok(None), // wiki/moderator rows etc.
        None => return Err(CoreError::malformed(&location, "row has no PostTypeId")),
    };

    let parse_id = |field: &str, value: Option<&str>| -> Result<Option<PostId>> {
        value
            .map(|v| {
                v.parse::<u64>()
                    .map(PostId::new)
                    .map_err(|_| CoreError::malformed(&location, format!("bad {field}: {v:?}")))
            })
            .transpose()
    };

    let id = parse_id("Id", id.as_deref())?
        .ok_or_else(|| CoreError::malformed(&location, "row has no Id"))?;
    let parent_id = parse_id("ParentId", parent_id.as_deref())?;
    let accepted_answer_id = parse_id("AcceptedAnswerId", accepted.as_deref())?;
    let score = score
        .as_deref()
        .unwrap_or("0")
        .parse::<i64>()
        .map_err(|_| CoreError::malformed(&location, "bad Score"))?;
    let answer_count = answer_count
        .as_deref()
        .unwrap_or("0")
        .parse::<u32>()
        .map_err(|_| CoreError::malformed(&location, "bad AnswerCount"))?;

    let post = Post {
        id,
        kind,
        parent_id,
        title: if kind == PostKind::Question {
            Some(title.unwrap_or_default())
        } else {
            None
        },
        body_html: body.unwrap_or_default(),
        tags: if kind == PostKind::Question {
            parse_tags(tags.as_deref().unwrap_or(""))
        } else {
            Vec::new()
        },
        score,
        answer_count,
        accepted_answer_id,
        created_at: created.unwrap_or_default(),
    };
    post.validate()
        .map_err(|e| CoreError::malformed(&location, e.to_string()))?;
    Ok(Some(post))
}

/// Splits the dump's `"<a><b>"` tag encoding into normalized (lowercase,
/// hyphens preserved) tag strings.
pub fn parse_tags(raw: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut current: Option<String> = None;
    for c in raw.chars() {
        match c {
            '<' => current = Some(String::new()),
            '>' => {
                if let Some(tag) = current.take() {
                    if !tag.is_empty() {
                        tags.push(tag.to_lowercase());
                    }
                }
            }
            _ => {
                if let Some(tag) = &mut current {
                    tag.push(c);
                }
            }
        }
    }
    tags
}

fn next_jsonl_post<R: BufRead>(reader: &mut R, line_no: &mut usize) -> RowOutcome {
    let mut line = String::new();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => return RowOutcome::End,
            Ok(_) => {
                *line_no += 1;
                if line.trim().is_empty() {
                    continue;
                }
                let location = format!("line {}", *line_no);
                return match serde_json::from_str::<Post>(line.trim_end()) {
                    Ok(post) => match post.validate() {
                        Ok(()) => RowOutcome::Post(post),
                        Err(e) => {
                            RowOutcome::Malformed(CoreError::malformed(&location, e.to_string()))
                        }
                    },
                    Err(e) => RowOutcome::Malformed(CoreError::malformed(&location, e.to_string())),
                };
            }
            Err(e) => return RowOutcome::Fatal(e.into()),
        }
    }
}

/// Serializes posts to the canonical JSONL format, one object per line.
pub fn write_posts_jsonl<W: Write>(posts: &[Post], mut writer: W) -> Result<()> {
    for post in posts {
        serde_json::to_writer(&mut writer, post)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// A manual ground-truth label for one post (true = discusses a
/// tactic/attribute relationship).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub post_id: PostId,
    pub label: bool,
}

pub fn write_labels_jsonl<W: Write>(labels: &[LabelRecord], mut writer: W) -> Result<()> {
    for record in labels {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses a labels file, rejecting duplicate post ids.
pub fn read_labels_jsonl<R: BufRead>(reader: R) -> Result<Vec<LabelRecord>> {
    let mut labels = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabelRecord = serde_json::from_str(&line)
            .map_err(|e| CoreError::malformed(format!("label line {}", idx + 1), e.to_string()))?;
        if !seen.insert(record.post_id) {
            return Err(CoreError::invalid_data(
                "labels",
                format!("duplicate label for post {}", record.post_id),
            ));
        }
        labels.push(record);
    }
    Ok(labels)
}

/// Groups posts into threads. Answers whose question is absent from the
/// input are returned in the orphan list rather than dropped; duplicate ids
/// are logged and skipped.
pub fn assemble_threads(posts: Vec<Post>) -> (Vec<Thread>, Vec<Post>) {
    let mut question_order = Vec::new();
    let mut threads: std::collections::BTreeMap<PostId, Thread> = std::collections::BTreeMap::new();
    let mut answers = Vec::new();

    for post in posts {
        match post.kind {
            PostKind::Question => {
                if threads.contains_key(&post.id) {
                    log::warn!("duplicate question id {}; keeping the first", post.id);
                    continue;
                }
                question_order.push(post.id);
                threads.insert(
                    post.id,
                    Thread {
                        question: post,
                        answers: Vec::new(),
                    },
                );
            }
            PostKind::Answer => answers.push(post),
        }
    }

    let mut orphans = Vec::new();
    for answer in answers {
        let parent = answer.parent_id.expect("answers always carry parent_id");
        match threads.get_mut(&parent) {
            Some(thread) => {
                if thread.answers.iter().any(|a| a.id == answer.id) {
                    log::warn!("duplicate answer id {}; keeping the first", answer.id);
                } else {
                    thread.answers.push(answer);
                }
            }
            None => orphans.push(answer),
        }
    }

    let threads = question_order
        .into_iter()
        .map(|id| threads.remove(&id).expect("id recorded at insertion"))
        .collect();
    (threads, orphans)
}

/// Retains threads satisfying every enabled criterion of the filter.
pub fn filter_threads(threads: Vec<Thread>, filter: &CorpusFilter) -> Vec<Thread> {
    threads
        .into_iter()
        .filter(|t| {
            if (t.answers.len() as u32) < filter.min_answers {
                return false;
            }
            if filter.require_positive_score && t.question.score <= 0 {
                return false;
            }
            if let Some(required) = &filter.required_tags {
                if !t.question.tags.iter().any(|tag| required.contains(tag)) {
                    return false;
                }
            }
            if filter.exclude_code_in_question && contains_code_block(&t.question.body_html) {
                return false;
            }
            true
        })
        .collect()
}

/// Flattens threads back to a post list (question first, then its answers),
/// the inverse of [`assemble_threads`] for serialization.
pub fn threads_to_posts(threads: &[Thread]) -> Vec<Post> {
    let mut posts = Vec::new();
    for thread in threads {
        posts.push(thread.question.clone());
        posts.extend(thread.answers.iter().cloned());
    }
    posts
}
