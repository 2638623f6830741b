//! The end-to-end corpus build: ingest, filter, match, mask, emit.
//!
//! Work is spread over a bounded pool, one document per task. Output lines
//! are sorted by paragraph id (then by content) before writing, so the file
//! is byte-identical for any worker count.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use logicorp::ingest::{self, decode_utf8, split_paragraphs, Verdict};
use logicorp::record::{to_line, write_lines};
use logicorp::{find_indicators, IndicatorLexicon, Masker, Vocabulary};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildSummary {
    pub records: u64,
    pub documents: u64,
    pub paragraphs: u64,
    pub dropped_too_short: u64,
    pub dropped_too_few_indicators: u64,
    pub dropped_too_sparse: u64,
    pub vocabulary: u64,
    pub input_bytes: u64,
    pub elapsed_secs: f64,
}

/// One document to process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDoc {
    pub source_id: String,
    pub text: String,
}

#[derive(Debug, Default)]
struct Partial {
    lines: Vec<(u64, String)>,
    paragraphs: u64,
    too_short: u64,
    too_few: u64,
    too_sparse: u64,
}

impl Partial {
    fn merge(mut self, mut other: Partial) -> Partial {
        self.lines.append(&mut other.lines);
        self.paragraphs += other.paragraphs;
        self.too_short += other.too_short;
        self.too_few += other.too_few;
        self.too_sparse += other.too_sparse;
        self
    }
}

pub fn load_lexicon(path: Option<&Path>, exclude: Option<&[String]>) -> Result<IndicatorLexicon> {
    let lex = match path {
        None => IndicatorLexicon::builtin(),
        Some(p) => IndicatorLexicon::load(p).map_err(|e| CliError::runtime("lexicon", e))?,
    };
    match exclude {
        None => Ok(lex),
        Some(list) => lex
            .with_exclusions(list.iter().map(String::as_str))
            .map_err(|e| CliError::usage("lexicon", e)),
    }
}

fn input_files(inputs: &[PathBuf]) -> Result<Vec<(PathBuf, String)>> {
    let mut files = Vec::new();
    for input in inputs {
        let meta = std::fs::metadata(input)
            .map_err(|e| CliError::runtime("ingest", format!("{}: {e}", input.display())))?;
        if meta.is_dir() {
            let mut found = Vec::new();
            for entry in walkdir::WalkDir::new(input).sort_by_file_name() {
                let entry = entry.map_err(|e| CliError::runtime("ingest", e))?;
                if !entry.file_type().is_file() {
                    continue;
                }
                let name = entry.file_name().to_string_lossy();
                if name.starts_with('.') {
                    continue;
                }
                let rel = entry.path().strip_prefix(input).unwrap_or(entry.path());
                found.push((entry.path().to_path_buf(), rel.to_string_lossy().replace('\\', "/")));
            }
            files.extend(found);
        } else {
            let id = input
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| input.display().to_string());
            files.push((input.clone(), id));
        }
    }
    Ok(files)
}

fn is_records_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("ndjson")
    )
}

/// Read every input into documents. Record files contribute one document
/// per record, extractor dumps one per `<doc>` block.
pub fn read_documents(inputs: &[PathBuf], wiki: bool) -> Result<(Vec<SourceDoc>, u64)> {
    let mut docs = Vec::new();
    let mut bytes_total = 0u64;
    for (path, source_id) in input_files(inputs)? {
        let bytes = std::fs::read(&path).map_err(|e| CliError::runtime("ingest", format!("{}: {e}", path.display())))?;
        bytes_total += bytes.len() as u64;
        if is_records_file(&path) {
            for rec in ingest::parse_records(&source_id, &bytes).map_err(|e| CliError::runtime("ingest", e))? {
                let text = if wiki { ingest::strip_markup_residue(&rec.text) } else { rec.text };
                docs.push(SourceDoc { source_id: rec.id, text });
            }
            continue;
        }
        let text = decode_utf8(&source_id, &bytes).map_err(|e| CliError::runtime("ingest", e))?;
        let extracted = if text.trim_start().starts_with("<doc") {
            ingest::split_extracted_docs(text)
        } else {
            Vec::new()
        };
        if extracted.is_empty() {
            let text = if wiki { ingest::strip_markup_residue(text) } else { text.to_string() };
            docs.push(SourceDoc { source_id, text });
        } else {
            for rec in extracted {
                let text = if wiki { ingest::strip_markup_residue(&rec.text) } else { rec.text };
                docs.push(SourceDoc { source_id: rec.id, text });
            }
        }
    }
    Ok((docs, bytes_total))
}

struct Progress {
    every: u64,
    quiet: bool,
    done: AtomicU64,
}

impl Progress {
    fn tick(&self, n: u64) {
        if self.quiet || self.every == 0 {
            return;
        }
        let before = self.done.fetch_add(n, Ordering::Relaxed);
        let after = before + n;
        if before / self.every != after / self.every {
            eprintln!("progress: {after} paragraphs");
        }
    }
}

/// Build from documents already in memory.
pub fn build_documents(
    docs: &[SourceDoc],
    lexicon: &IndicatorLexicon,
    config: &PipelineConfig,
    output: &Path,
) -> Result<BuildSummary> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::runtime("build", e))?;
    let policy = &config.filter;

    let needs_vocab = config.mask.mlm_rate > 0.0 && config.mask.mlm_split.random > 0.0;
    let vocab = if needs_vocab {
        let words: HashSet<String> = pool.install(|| {
            docs.par_iter()
                .map(|doc| -> Result<HashSet<String>> {
                    let mut set = HashSet::new();
                    let paragraphs = split_paragraphs(&doc.source_id, doc.text.as_bytes())
                        .map_err(|e| CliError::runtime("ingest", e))?;
                    for p in paragraphs {
                        let matches = find_indicators(&p, lexicon);
                        if policy.assess(&p, &matches, lexicon) == Verdict::Keep {
                            set.extend(p.tokens.into_iter().map(|t| t.text));
                        }
                    }
                    Ok(set)
                })
                .try_reduce(HashSet::new, |mut a, b| {
                    if a.len() < b.len() {
                        return Ok(b.into_iter().chain(a).collect());
                    }
                    a.extend(b);
                    Ok(a)
                })
        })?;
        Vocabulary::new(words)
    } else {
        Vocabulary::default()
    };
    let vocab_len = vocab.len() as u64;

    let mut masker = Masker::new(config.mask.clone(), vocab).map_err(|e| CliError::usage("masker", e))?;
    if !config.mask.mask_excluded {
        masker = masker.with_exclusions(lexicon.exclusions().clone());
    }
    let progress = Progress { every: config.progress_every, quiet: config.quiet, done: AtomicU64::new(0) };

    let partial = pool.install(|| {
        docs.par_iter()
            .map(|doc| -> Result<Partial> {
                let mut part = Partial::default();
                let paragraphs = split_paragraphs(&doc.source_id, doc.text.as_bytes())
                    .map_err(|e| CliError::runtime("ingest", e))?;
                part.paragraphs = paragraphs.len() as u64;
                for p in &paragraphs {
                    let matches = find_indicators(p, lexicon);
                    match policy.assess(p, &matches, lexicon) {
                        Verdict::Keep => {
                            let sample = masker.mask_paragraph(p, &matches).map_err(|e| CliError::runtime("masker", e))?;
                            part.lines.push((sample.pid.0, to_line(&sample)));
                        }
                        Verdict::TooShort => part.too_short += 1,
                        Verdict::TooFewIndicators => part.too_few += 1,
                        Verdict::TooSparse => part.too_sparse += 1,
                    }
                }
                progress.tick(part.paragraphs);
                Ok(part)
            })
            .try_reduce(Partial::default, |a, b| Ok(a.merge(b)))
    })?;

    let mut lines = partial.lines;
    lines.par_sort_unstable();
    let file = File::create(output).map_err(|e| CliError::runtime("emit", format!("{}: {e}", output.display())))?;
    let records = write_lines(BufWriter::new(file), lines.iter().map(|(_, l)| l))
        .map_err(|e| CliError::runtime("emit", e))?;

    Ok(BuildSummary {
        records,
        documents: docs.len() as u64,
        paragraphs: partial.paragraphs,
        dropped_too_short: partial.too_short,
        dropped_too_few_indicators: partial.too_few,
        dropped_too_sparse: partial.too_sparse,
        vocabulary: vocab_len,
        input_bytes: docs.iter().map(|d| d.text.len() as u64).sum(),
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Run the whole build described by `config`.
pub fn run_build(config: &PipelineConfig) -> Result<BuildSummary> {
    let start = Instant::now();
    config.mask.validate().map_err(|e| CliError::usage("config", e))?;
    config.filter.validate().map_err(|e| CliError::usage("config", e))?;
    let lexicon = load_lexicon(config.lexicon.as_deref(), config.exclude.as_deref())?;
    let (docs, bytes) = read_documents(&config.inputs, config.wiki)?;
    let mut summary = build_documents(&docs, &lexicon, config, &config.output)?;
    summary.input_bytes = bytes;
    summary.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(summary)
}
