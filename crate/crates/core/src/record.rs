//! Line-delimited sample records.
//!
//! One JSON object per line, keys in this order:
//!
//! ```text
//! {"pid":<u64>,"tokens":[..],"lcp":[[pos,code]..],"mlm":[[pos,"orig"]..],
//!  "prov":[[pos,"phrase"]..],"occ":[5 counts],"lui_pool":n,"mlm_pool":n,"src_len":n}
//! ```
//!
//! `pid`, `tokens`, `lcp` and `mlm` are required; the audit fields after them
//! default to empty/zero when absent.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::masker::MaskedSample;
use crate::{LGMASK, MASK};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("emission failed after {written} records: {source}")]
    Emit {
        written: u64,
        #[source]
        source: std::io::Error,
    },
}

/// Serialize one sample as a single line (without the newline).
pub fn to_line(sample: &MaskedSample) -> String {
    serde_json::to_string(sample).expect("samples always serialize")
}

/// Check the label/token consistency rules of a decoded sample.
pub fn validate(sample: &MaskedSample) -> Result<(), String> {
    let n = sample.tokens.len();
    let mut lcp_positions = BTreeSet::new();
    for &(pos, code) in &sample.lcp {
        if pos >= n {
            return Err(format!("lcp position {pos} outside {n} tokens"));
        }
        if code > 5 {
            return Err(format!("lcp code {code} outside 0..=5"));
        }
        if sample.tokens[pos] != LGMASK {
            return Err(format!("lcp position {pos} does not hold {LGMASK}"));
        }
        if !lcp_positions.insert(pos) {
            return Err(format!("duplicate lcp position {pos}"));
        }
    }
    let lgmask = sample.tokens.iter().filter(|t| t.as_str() == LGMASK).count();
    if lgmask != sample.lcp.len() {
        return Err(format!("{lgmask} {LGMASK} tokens but {} lcp labels", sample.lcp.len()));
    }
    let mut mlm_positions = BTreeSet::new();
    for (pos, _) in &sample.mlm {
        if *pos >= n {
            return Err(format!("mlm position {pos} outside {n} tokens"));
        }
        if lcp_positions.contains(pos) {
            return Err(format!("position {pos} carries both lcp and mlm labels"));
        }
        if !mlm_positions.insert(*pos) {
            return Err(format!("duplicate mlm position {pos}"));
        }
    }
    for (pos, token) in sample.tokens.iter().enumerate() {
        if token == MASK && !mlm_positions.contains(&pos) {
            return Err(format!("{MASK} at {pos} without an mlm label"));
        }
    }
    for (pos, _) in &sample.prov {
        if !lcp_positions.contains(pos) {
            return Err(format!("provenance at {pos} without an lcp label"));
        }
    }
    Ok(())
}

/// Decode and validate one record line.
pub fn parse_line(line: &str, line_no: usize) -> Result<MaskedSample, RecordError> {
    let malformed = |message: String| RecordError::Malformed { line: line_no, message };
    let sample: MaskedSample = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    validate(&sample).map_err(malformed)?;
    Ok(sample)
}

/// Decode every non-blank line; the first bad line fails the whole input.
pub fn parse_records(text: &str) -> Result<Vec<MaskedSample>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// Write samples one per line; returns the count written.
pub fn write_samples<'a, W, I>(out: W, samples: I) -> Result<u64, RecordError>
where
    W: Write,
    I: IntoIterator<Item = &'a MaskedSample>,
{
    write_lines(out, samples.into_iter().map(to_line))
}

/// Write pre-serialized record lines.
pub fn write_lines<W, I, S>(mut out: W, lines: I) -> Result<u64, RecordError>
where
    W: Write,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut written = 0u64;
    for line in lines {
        out.write_all(line.as_ref().as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|source| RecordError::Emit { written, source })?;
        written += 1;
    }
    out.flush().map_err(|source| RecordError::Emit { written, source })?;
    Ok(written)
}

/// Write samples to `path`, replacing any existing file.
pub fn emit_samples<'a, I>(samples: I, path: &Path) -> Result<u64, RecordError>
where
    I: IntoIterator<Item = &'a MaskedSample>,
{
    let file = File::create(path).map_err(|source| RecordError::Emit { written: 0, source })?;
    write_samples(BufWriter::new(file), samples)
}
