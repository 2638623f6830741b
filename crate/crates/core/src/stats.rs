//! Corpus reports over emitted sample files.
//!
//! Reports are built from integer tallies, so tallies over shards merge
//! exactly into the tally of the whole file; rates and intervals are derived
//! only when the report is finished.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use crate::category::IndicatorCategory;
use crate::masker::MaskedSample;
use crate::record::{parse_line, RecordError};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("histogram bucket width must be finite and positive, got {0}")]
    Bucket(f64),
}

/// Mergeable integer tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub samples: u64,
    pub lgmask: [u64; 6],
    pub occurrences: [u64; 5],
    pub tokens: u64,
    pub source_tokens: u64,
    pub lui_pool: u64,
    pub mlm_labels: u64,
    pub mlm_pool: u64,
    /// Per-sample indicator occurrences and source length, kept for
    /// histogramming with any bucket width.
    densities: BTreeMap<(u64, u64), u64>,
}

impl Tally {
    pub fn add(&mut self, s: &MaskedSample) {
        self.samples += 1;
        for &(_, code) in &s.lcp {
            self.lgmask[usize::from(code)] += 1;
        }
        for (acc, n) in self.occurrences.iter_mut().zip(s.occ) {
            *acc += n;
        }
        self.tokens += s.tokens.len() as u64;
        self.source_tokens += s.src_len;
        self.lui_pool += s.lui_pool;
        self.mlm_labels += s.mlm.len() as u64;
        self.mlm_pool += s.mlm_pool;
        let occ: u64 = s.occ.iter().sum();
        *self.densities.entry((occ, s.src_len)).or_default() += 1;
    }

    pub fn merge(&mut self, other: &Tally) {
        self.samples += other.samples;
        for (a, b) in self.lgmask.iter_mut().zip(other.lgmask) {
            *a += b;
        }
        for (a, b) in self.occurrences.iter_mut().zip(other.occurrences) {
            *a += b;
        }
        self.tokens += other.tokens;
        self.source_tokens += other.source_tokens;
        self.lui_pool += other.lui_pool;
        self.mlm_labels += other.mlm_labels;
        self.mlm_pool += other.mlm_pool;
        for (k, v) in &other.densities {
            *self.densities.entry(*k).or_default() += v;
        }
    }

    /// Add every line of a records stream; line numbers start at
    /// `first_line`. The first malformed line aborts.
    pub fn add_lines<R: BufRead>(&mut self, reader: R, first_line: usize) -> Result<(), StatsError> {
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| StatsError::Io { path: "<stream>".into(), source })?;
            if line.trim().is_empty() {
                continue;
            }
            self.add(&parse_line(&line, first_line + i)?);
        }
        Ok(())
    }

    pub fn finish(&self, bucket_width: f64) -> Result<CorpusReport, StatsError> {
        if !(bucket_width.is_finite() && bucket_width > 0.0) {
            return Err(StatsError::Bucket(bucket_width));
        }
        let mut buckets: BTreeMap<u64, u64> = BTreeMap::new();
        let mut undefined = 0;
        for (&(occ, len), &count) in &self.densities {
            if len == 0 {
                undefined += count;
                continue;
            }
            let density = occ as f64 * 100.0 / len as f64;
            *buckets.entry((density / bucket_width).floor() as u64).or_default() += count;
        }
        let lexical_lgmask: u64 = self.lgmask[..5].iter().sum();
        Ok(CorpusReport {
            samples: self.samples,
            lgmask_total: self.lgmask.iter().sum(),
            lgmask: CategoryCounts::from_slice(&self.lgmask),
            occurrences: CategoryCounts::from_slice(&self.occurrences),
            tokens_total: self.tokens,
            source_tokens_total: self.source_tokens,
            mlm_labels: self.mlm_labels,
            rates: Rates {
                lgmask: RateEstimate::new(lexical_lgmask, self.occurrences.iter().sum()),
                lui: RateEstimate::new(self.lgmask[IndicatorCategory::Lui.index()], self.lui_pool),
                mlm: RateEstimate::new(self.mlm_labels, self.mlm_pool),
            },
            density_histogram: Histogram {
                bucket_width,
                buckets: buckets
                    .into_iter()
                    .map(|(b, count)| Bucket {
                        low: b as f64 * bucket_width,
                        high: (b + 1) as f64 * bucket_width,
                        count,
                    })
                    .collect(),
                without_length: undefined,
            },
        })
    }
}

/// Counts keyed by category, serialized in code order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct CategoryCounts {
    pub pmi: u64,
    pub cli: u64,
    pub nti: u64,
    pub ati: u64,
    pub cni: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lui: Option<u64>,
}

impl CategoryCounts {
    fn from_slice(v: &[u64]) -> Self {
        CategoryCounts {
            pmi: v[0],
            cli: v[1],
            nti: v[2],
            ati: v[3],
            cni: v[4],
            lui: v.get(5).copied(),
        }
    }

    pub fn get(&self, c: IndicatorCategory) -> u64 {
        match c {
            IndicatorCategory::Pmi => self.pmi,
            IndicatorCategory::Cli => self.cli,
            IndicatorCategory::Nti => self.nti,
            IndicatorCategory::Ati => self.ati,
            IndicatorCategory::Cni => self.cni,
            IndicatorCategory::Lui => self.lui.unwrap_or(0),
        }
    }
}

/// A binomial proportion with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return RateEstimate { successes, trials, rate: None, ci95_low: None, ci95_high: None };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z = 1.959_963_984_540_054_f64;
        let z2 = z * z;
        let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        RateEstimate {
            successes,
            trials,
            rate: Some(p),
            ci95_low: Some((center - half).max(0.0)),
            ci95_high: Some((center + half).min(1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    /// Selected lexical indicators over maskable occurrences.
    pub lgmask: RateEstimate,
    /// LUI draws over non-indicator tokens.
    pub lui: RateEstimate,
    /// MLM-labeled positions over MLM candidates.
    pub mlm: RateEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Samples bucketed by indicator occurrences per 100 source tokens.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bucket_width: f64,
    pub buckets: Vec<Bucket>,
    /// Samples without a recorded source length.
    pub without_length: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub samples: u64,
    pub lgmask_total: u64,
    /// `[LGMASK]` labels per category.
    pub lgmask: CategoryCounts,
    /// Maskable indicator occurrences before masking.
    pub occurrences: CategoryCounts,
    pub tokens_total: u64,
    pub source_tokens_total: u64,
    pub mlm_labels: u64,
    pub rates: Rates,
    pub density_histogram: Histogram,
}

impl CorpusReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub const DEFAULT_BUCKET_WIDTH: f64 = 5.0;

/// Tally a records file.
pub fn tally_file(path: &Path) -> Result<Tally, StatsError> {
    let file = std::fs::File::open(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut t = Tally::default();
    t.add_lines(std::io::BufReader::new(file), 1)?;
    Ok(t)
}

/// Report over a records file.
pub fn report(path: &Path, bucket_width: f64) -> Result<CorpusReport, StatsError> {
    tally_file(path)?.finish(bucket_width)
}
