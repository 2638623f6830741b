//! The non-build subcommands.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use logicorp::ablate::DeletionCounts;
use logicorp::loss::LcpBatch;
use logicorp::stats::Tally;
use logicorp::{ablate_text, idol_loss, lcp_loss, AblationSpec, CorpusReport, IndicatorLexicon, LossConfig};
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn stats(path: &Path, bucket_width: f64) -> Result<CorpusReport> {
    if !(bucket_width.is_finite() && bucket_width > 0.0) {
        return Err(CliError::usage("stats", format!("--hist-bucket must be positive, got {bucket_width}")));
    }
    let file = std::fs::File::open(path).map_err(|e| CliError::runtime("stats", format!("{}: {e}", path.display())))?;
    let mut tally = Tally::default();
    tally
        .add_lines(BufReader::new(file), 1)
        .map_err(|e| CliError::runtime("stats", format!("{}: {e}", path.display())))?;
    tally.finish(bucket_width).map_err(|e| CliError::usage("stats", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossReport {
    pub lcp: f64,
    pub mlm: f64,
    pub idol: f64,
}

/// Evaluate a logits file. Returns the report and whether the batch was empty.
pub fn loss(text: &str, mlm: f64, config: &LossConfig) -> Result<(LossReport, bool)> {
    config.validate().map_err(|e| CliError::usage("loss", e))?;
    let batch = LcpBatch::parse_jsonl(text).map_err(|e| CliError::runtime("loss", e))?;
    let lcp = lcp_loss(&batch, config);
    let idol = idol_loss(lcp.value, mlm, config).map_err(|e| CliError::usage("loss", e))?;
    Ok((LossReport { lcp: lcp.value, mlm, idol }, lcp.empty_batch))
}

/// Ablate the string field `field` of every record read from `input`.
pub fn ablate_records<R: Read, W: Write>(
    input: R,
    output: W,
    field: &str,
    lexicon: &IndicatorLexicon,
    spec: &AblationSpec,
) -> Result<DeletionCounts> {
    let mut out = BufWriter::new(output);
    let mut totals = DeletionCounts::default();
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| CliError::runtime("ablate", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| CliError::runtime("ablate", format!("line {}: {m}", idx + 1));
        let mut value: serde_json::Value = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        let slot = value
            .as_object_mut()
            .and_then(|o| o.get_mut(field))
            .ok_or_else(|| err(format!("missing field `{field}`")))?;
        let text = slot.as_str().ok_or_else(|| err(format!("field `{field}` is not a string")))?;
        let outcome = ablate_text(text, lexicon, spec);
        totals.add(&outcome.deletions);
        *slot = serde_json::Value::String(outcome.text);
        serde_json::to_writer(&mut out, &value).map_err(|e| CliError::runtime("ablate", e))?;
        out.write_all(b"\n").map_err(|e| CliError::runtime("ablate", e))?;
    }
    out.flush().map_err(|e| CliError::runtime("ablate", e))?;
    Ok(totals)
}
