//! Raw text to filtered, tokenized paragraphs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lexicon::{IndicatorLexicon, IndicatorMatch};
use crate::rng::paragraph_hash;
use crate::tokenize::{Token, Tokenizer, WordTokenizer};

/// Stable identity of a paragraph: a hash of its source id and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParagraphId(pub u64);

impl ParagraphId {
    pub fn new(source_id: &str, index: usize) -> Self {
        ParagraphId(paragraph_hash(source_id, index as u64))
    }
}

impl fmt::Display for ParagraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedParagraph {
    pub id: ParagraphId,
    pub source_id: Arc<str>,
    pub index: usize,
    /// Offsets are relative to the start of the source document.
    pub tokens: Vec<Token>,
}

impl TokenizedParagraph {
    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{source_id}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { source_id: String, offset: usize },
    #[error("{source_id}: line {line}: {message}")]
    Record {
        source_id: String,
        line: usize,
        message: String,
    },
    #[error("invalid filter policy: {0}")]
    Policy(String),
}

/// Decode bytes as UTF-8, reporting the first bad byte.
pub fn decode_utf8<'a>(source_id: &str, bytes: &'a [u8]) -> Result<&'a str, IngestError> {
    std::str::from_utf8(bytes).map_err(|e| IngestError::InvalidUtf8 {
        source_id: source_id.to_string(),
        offset: e.valid_up_to(),
    })
}

/// Split a document on blank lines and tokenize each paragraph with the
/// default word tokenizer.
pub fn split_paragraphs(source_id: &str, document: &[u8]) -> Result<Vec<TokenizedParagraph>, IngestError> {
    split_paragraphs_with(&WordTokenizer, source_id, document)
}

pub fn split_paragraphs_with(
    tokenizer: &dyn Tokenizer,
    source_id: &str,
    document: &[u8],
) -> Result<Vec<TokenizedParagraph>, IngestError> {
    let text = decode_utf8(source_id, document)?;
    let source: Arc<str> = source_id.into();
    let mut out = Vec::new();
    for (byte_start, char_start, body) in paragraph_slices(text) {
        let mut tokens = tokenizer.tokenize(body);
        if tokens.is_empty() {
            continue;
        }
        for t in &mut tokens {
            t.chars = t.chars.start + char_start..t.chars.end + char_start;
            t.bytes = t.bytes.start + byte_start..t.bytes.end + byte_start;
        }
        let index = out.len();
        out.push(TokenizedParagraph {
            id: ParagraphId::new(source_id, index),
            source_id: source.clone(),
            index,
            tokens,
        });
    }
    Ok(out)
}

/// `(byte offset, char offset, text)` of each blank-line separated block.
fn paragraph_slices(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut byte = 0;
    let mut chars = 0;
    for line in text.split_inclusive('\n') {
        let blank = line.trim().is_empty();
        match (blank, start) {
            (true, Some((b, c))) => {
                out.push((b, c, &text[b..byte]));
                start = None;
            }
            (false, None) => start = Some((byte, chars)),
            _ => {}
        }
        byte += line.len();
        chars += if line.is_ascii() { line.len() } else { line.chars().count() };
    }
    if let Some((b, c)) = start {
        out.push((b, c, &text[b..]));
    }
    out
}

/// One input document from a line-delimited records file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRecord {
    pub id: String,
    pub text: String,
}

/// Parse `{"id": ..., "text": ...}` lines. Ids may be strings or numbers;
/// blank lines are skipped.
pub fn parse_records(source_id: &str, bytes: &[u8]) -> Result<Vec<SourceRecord>, IngestError> {
    let text = decode_utf8(source_id, bytes)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| IngestError::Record {
            source_id: source_id.to_string(),
            line: idx + 1,
            message,
        };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| err("expected a JSON object".into()))?;
        let id = match obj.get("id") {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(_) => return Err(err("`id` must be a string or number".into())),
            None => return Err(err("missing `id`".into())),
        };
        let text = obj
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| err("missing string field `text`".into()))?;
        out.push(SourceRecord { id, text: text.to_string() });
    }
    Ok(out)
}

const MARKUP_PREFIXES: &[&str] = &[
    "<doc", "</doc", "{{", "}}", "{|", "|}", "|", "[[Category:", "[[File:", "[[Image:", "__",
    "<!--", "-->", "<ref", "</ref", "<gallery", "</gallery",
];

/// Drop lines that are leftovers of wiki markup after plain-text extraction.
pub fn strip_markup_residue(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let t = line.trim_start();
        if MARKUP_PREFIXES.iter().any(|p| t.starts_with(p)) {
            // Keep the line break so paragraph boundaries survive.
            if line.ends_with('\n') {
                out.push('\n');
            }
            continue;
        }
        out.push_str(line);
    }
    out
}

/// Split extractor output of the form `<doc id="..." ...> ... </doc>` into
/// `(id, body)` pairs. Text outside any `<doc>` block is ignored; a file
/// without `<doc` tags yields nothing.
pub fn split_extracted_docs(text: &str) -> Vec<SourceRecord> {
    let mut out = Vec::new();
    let mut current: Option<(String, String)> = None;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if t.starts_with("<doc") && t.ends_with('>') {
            if let Some((id, body)) = current.take() {
                out.push(SourceRecord { id, text: body });
            }
            let id = attribute(t, "id").unwrap_or_else(|| format!("doc{}", out.len()));
            current = Some((id, String::new()));
        } else if t == "</doc>" {
            if let Some((id, body)) = current.take() {
                out.push(SourceRecord { id, text: body });
            }
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
        }
    }
    if let Some((id, body)) = current {
        out.push(SourceRecord { id, text: body });
    }
    out
}

fn attribute(tag: &str, name: &str) -> Option<String> {
    let needle = format!("{name}=\"");
    let start = tag.find(&needle)? + needle.len();
    let end = tag[start..].find('"')? + start;
    Some(tag[start..end].to_string())
}

/// Paragraph retention thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterPolicy {
    /// Paragraphs with fewer tokens are dropped; the default 6 drops
    /// everything of five tokens or less.
    pub min_tokens: usize,
    /// Minimum number of indicator matches outside the exclusion set.
    pub min_indicators: usize,
    /// Optional minimum of non-excluded indicators per 100 tokens.
    pub min_density: Option<f64>,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            min_tokens: 6,
            min_indicators: 1,
            min_density: None,
        }
    }
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.min_tokens < 1 {
            return Err(IngestError::Policy("min_tokens must be at least 1".into()));
        }
        if let Some(d) = self.min_density {
            if !(d.is_finite() && d >= 0.0) {
                return Err(IngestError::Policy(format!("min_density must be finite and >= 0, got {d}")));
            }
        }
        Ok(())
    }

    /// Decide on a paragraph given its indicator matches.
    pub fn assess(&self, paragraph: &TokenizedParagraph, matches: &[IndicatorMatch], lexicon: &IndicatorLexicon) -> Verdict {
        let n = paragraph.token_count();
        if n < self.min_tokens {
            return Verdict::TooShort;
        }
        let counted = matches.iter().filter(|m| !lexicon.is_excluded(&m.phrase)).count();
        if counted < self.min_indicators {
            return Verdict::TooFewIndicators;
        }
        if let Some(min) = self.min_density {
            if (counted as f64) * 100.0 / (n as f64) < min {
                return Verdict::TooSparse;
            }
        }
        Verdict::Keep
    }
}

/// Outcome of [`FilterPolicy::assess`]; the first failing predicate wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Keep,
    TooShort,
    TooFewIndicators,
    TooSparse,
}

/// Keep the paragraphs that pass every predicate of `policy`, in order.
pub fn filter_paragraphs(
    paragraphs: Vec<TokenizedParagraph>,
    lexicon: &IndicatorLexicon,
    policy: &FilterPolicy,
) -> Vec<TokenizedParagraph> {
    paragraphs
        .into_iter()
        .filter(|p| {
            let matches = crate::lexicon::find_indicators(p, lexicon);
            policy.assess(p, &matches, lexicon) == Verdict::Keep
        })
        .collect()
}
