//! The three masking channels and the labeled training sample.
//!
//! For one paragraph, in order:
//!
//! 1. every indicator match is selected with probability `p_lg`; a selected
//!    match collapses to a single `[LGMASK]` labeled with its category;
//! 2. every token outside all indicator matches becomes an `[LGMASK]` labeled
//!    LUI with probability `p_lui`;
//! 3. every remaining position (including indicators that were not selected)
//!    enters classic MLM with probability `mlm_rate` and is then replaced by
//!    `[MASK]`, a random vocabulary token, or kept, per the MLM split.
//!
//! Each channel draws from its own stream keyed by `(seed, paragraph id,
//! channel)`, and draws happen for every candidate whether or not it is
//! selected, so results do not depend on processing order.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::category::IndicatorCategory;
use crate::ingest::{ParagraphId, TokenizedParagraph};
use crate::lexicon::IndicatorMatch;
use crate::rng::{stream, Channel};
use crate::{LGMASK, MASK};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MaskError {
    #[error("invalid mask policy: {0}")]
    Policy(String),
    #[error("paragraph {paragraph}: {message}")]
    Integrity { paragraph: ParagraphId, message: String },
}

/// Shares of the MLM replacement branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlmSplit {
    pub mask: f64,
    pub random: f64,
    pub keep: f64,
}

impl Default for MlmSplit {
    fn default() -> Self {
        MlmSplit { mask: 0.8, random: 0.1, keep: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPolicy {
    pub p_lg: f64,
    pub p_lui: f64,
    pub mlm_rate: f64,
    pub mlm_split: MlmSplit,
    pub seed: u64,
    /// Whether matches of excluded high-frequency phrases may become `[LGMASK]`.
    pub mask_excluded: bool,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        MaskPolicy {
            p_lg: 0.70,
            p_lui: 0.006,
            mlm_rate: 0.15,
            mlm_split: MlmSplit::default(),
            seed: 0,
            mask_excluded: true,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), MaskError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(MaskError::Policy(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl MaskPolicy {
    pub fn validate(&self) -> Result<(), MaskError> {
        check_probability("p_lg", self.p_lg)?;
        check_probability("p_lui", self.p_lui)?;
        check_probability("mlm_rate", self.mlm_rate)?;
        let s = self.mlm_split;
        check_probability("mlm_split.mask", s.mask)?;
        check_probability("mlm_split.random", s.random)?;
        check_probability("mlm_split.keep", s.keep)?;
        let total = s.mask + s.random + s.keep;
        if (total - 1.0).abs() > 1e-9 {
            return Err(MaskError::Policy(format!("mlm_split must sum to 1, got {total}")));
        }
        Ok(())
    }
}

/// Sorted, deduplicated token surfaces used by the MLM random branch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
}

impl Vocabulary {
    pub fn new(words: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = words.into_iter().collect();
        Vocabulary { words: set.into_iter().collect() }
    }

    pub fn from_set(set: BTreeSet<String>) -> Self {
        Vocabulary { words: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// A finished training record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedSample {
    pub pid: ParagraphId,
    pub tokens: Vec<String>,
    /// `(position, category code)` for every `[LGMASK]`.
    pub lcp: Vec<(usize, u8)>,
    /// `(position, original surface)` for every MLM-selected position.
    pub mlm: Vec<(usize, String)>,
    /// `(position, original phrase)` for every `[LGMASK]`: the canonical
    /// lexicon phrase for indicators, the surface for LUI.
    #[serde(default)]
    pub prov: Vec<(usize, String)>,
    /// Maskable indicator occurrences per lexical category, before masking.
    #[serde(default)]
    pub occ: [u64; 5],
    /// Tokens that were candidates for the LUI channel.
    #[serde(default)]
    pub lui_pool: u64,
    /// Positions that were candidates for the MLM channel.
    #[serde(default)]
    pub mlm_pool: u64,
    /// Token count of the paragraph before masking.
    #[serde(default)]
    pub src_len: u64,
}

impl MaskedSample {
    pub fn lgmask_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.as_str() == LGMASK).count()
    }
}

/// Applies a [`MaskPolicy`] with a fixed random-replacement vocabulary.
#[derive(Debug, Clone)]
pub struct Masker {
    policy: MaskPolicy,
    vocab: Vocabulary,
    excluded: BTreeSet<String>,
}

impl Masker {
    pub fn new(policy: MaskPolicy, vocab: Vocabulary) -> Result<Self, MaskError> {
        policy.validate()?;
        Ok(Masker { policy, vocab, excluded: BTreeSet::new() })
    }

    /// Phrases that stay unmasked when `mask_excluded` is off.
    pub fn with_exclusions(mut self, excluded: BTreeSet<String>) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn policy(&self) -> &MaskPolicy {
        &self.policy
    }

    fn check_matches(paragraph: &TokenizedParagraph, matches: &[IndicatorMatch]) -> Result<(), MaskError> {
        let n = paragraph.token_count();
        let mut prev_end = 0;
        for m in matches {
            let bad = if m.tokens.start >= m.tokens.end {
                Some("empty match span".to_string())
            } else if m.tokens.end > n {
                Some(format!("match span {:?} exceeds {n} tokens", m.tokens))
            } else if m.tokens.start < prev_end {
                Some(format!("match span {:?} overlaps or is out of order", m.tokens))
            } else if !m.category.is_lexical() {
                Some("LUI cannot be a lexicon match".to_string())
            } else if m.paragraph != paragraph.id {
                Some(format!("match belongs to paragraph {}", m.paragraph))
            } else {
                None
            };
            if let Some(message) = bad {
                return Err(MaskError::Integrity { paragraph: paragraph.id, message });
            }
            prev_end = m.tokens.end;
        }
        Ok(())
    }

    pub fn mask_paragraph(&self, paragraph: &TokenizedParagraph, matches: &[IndicatorMatch]) -> Result<MaskedSample, MaskError> {
        Self::check_matches(paragraph, matches)?;
        let p = &self.policy;
        let pid = paragraph.id.0;
        let mut occ = [0u64; 5];

        let mut lg_rng = stream(p.seed, pid, Channel::Indicator);
        let selected: Vec<bool> = matches
            .iter()
            .map(|m| {
                let u: f64 = lg_rng.gen();
                let eligible = p.mask_excluded || !self.excluded.contains(&*m.phrase);
                if eligible {
                    occ[m.category.index()] += 1;
                }
                eligible && u < p.p_lg
            })
            .collect();

        let mut lui_rng = stream(p.seed, pid, Channel::Unrelated);
        let mut tokens = Vec::with_capacity(paragraph.token_count());
        let mut lcp = Vec::new();
        let mut prov = Vec::new();
        let mut lui_pool = 0u64;
        let mut next_match = matches.iter().zip(&selected).peekable();
        let mut i = 0;
        while i < paragraph.token_count() {
            if let Some((m, &sel)) = next_match.peek() {
                if m.tokens.start == i {
                    if sel {
                        lcp.push((tokens.len(), m.category.code()));
                        prov.push((tokens.len(), m.phrase.to_string()));
                        tokens.push(LGMASK.to_string());
                    } else {
                        tokens.extend(paragraph.tokens[m.tokens.clone()].iter().map(|t| t.text.clone()));
                    }
                    i = m.tokens.end;
                    next_match.next();
                    continue;
                }
            }
            let surface = &paragraph.tokens[i].text;
            lui_pool += 1;
            let u: f64 = lui_rng.gen();
            if u < p.p_lui {
                lcp.push((tokens.len(), IndicatorCategory::Lui.code()));
                prov.push((tokens.len(), surface.clone()));
                tokens.push(LGMASK.to_string());
            } else {
                tokens.push(surface.clone());
            }
            i += 1;
        }

        let mut mlm = Vec::new();
        let mut mlm_pool = 0u64;
        if p.mlm_rate > 0.0 {
            let mut rng = stream(p.seed, pid, Channel::Mlm);
            let mut lcp_iter = lcp.iter().map(|&(pos, _)| pos).peekable();
            for (pos, token) in tokens.iter_mut().enumerate() {
                if lcp_iter.peek() == Some(&pos) {
                    lcp_iter.next();
                    continue;
                }
                mlm_pool += 1;
                let u: f64 = rng.gen();
                if u >= p.mlm_rate {
                    continue;
                }
                let branch: f64 = rng.gen();
                let original = token.clone();
                if branch < p.mlm_split.mask {
                    *token = MASK.to_string();
                } else if branch < p.mlm_split.mask + p.mlm_split.random
                    && !self.vocab.is_empty() {
                        let k = rng.gen_range(0..self.vocab.len());
                        *token = self.vocab.words[k].clone();
                    }
                mlm.push((pos, original));
            }
        }

        Ok(MaskedSample {
            pid: paragraph.id,
            tokens,
            lcp,
            mlm,
            prov,
            occ,
            lui_pool,
            mlm_pool,
            src_len: paragraph.token_count() as u64,
        })
    }
}
