//! Removing chosen indicator categories from running text.
//!
//! Matching is the same leftmost-longest matching used everywhere else, run
//! against the full lexicon; only matches whose category is being removed
//! are touched. In delete mode the text is repaired around each deletion and
//! the whole procedure repeats until no removed-category match is left,
//! since a deletion can bring two words together that form a new phrase.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::Serialize;

use crate::category::IndicatorCategory;
use crate::lexicon::IndicatorLexicon;
use crate::tokenize::{Token, Tokenizer, WordTokenizer};

/// Upper bound on repair passes; every delete pass removes at least one
/// token, so text shorter than this always reaches a fixpoint.
pub const MAX_PASSES: usize = 64;

pub const DEFAULT_PLACEHOLDER: &str = "[IND]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AblationMode {
    /// Delete the phrase and repair spacing, commas and capitalization.
    #[default]
    DeleteAndRepair,
    /// Replace the phrase with a placeholder token.
    Placeholder,
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delete" | "delete-and-repair" => Ok(AblationMode::DeleteAndRepair),
            "placeholder" | "replace-with-placeholder" => Ok(AblationMode::Placeholder),
            other => Err(format!("unknown ablation mode `{other}` (expected delete or placeholder)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationSpec {
    remove: BTreeSet<IndicatorCategory>,
    pub mode: AblationMode,
}

impl AblationSpec {
    pub fn new(remove: impl IntoIterator<Item = IndicatorCategory>, mode: AblationMode) -> Result<Self, String> {
        let remove: BTreeSet<_> = remove.into_iter().collect();
        if remove.is_empty() {
            return Err("at least one category must be removed".into());
        }
        if remove.contains(&IndicatorCategory::Lui) {
            return Err("LUI names random tokens and cannot be ablated".into());
        }
        Ok(AblationSpec { remove, mode })
    }

    /// Every lexical category.
    pub fn all(mode: AblationMode) -> Self {
        AblationSpec { remove: IndicatorCategory::LEXICAL.into_iter().collect(), mode }
    }

    /// Parse `all` or a comma-separated list such as `pmi,cli`.
    pub fn parse(list: &str, mode: AblationMode) -> Result<Self, String> {
        if list.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all(mode));
        }
        let cats = list
            .split(',')
            .map(|s| s.trim().parse::<IndicatorCategory>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(cats, mode)
    }

    pub fn removes(&self, c: IndicatorCategory) -> bool {
        self.remove.contains(&c)
    }

    pub fn categories(&self) -> impl Iterator<Item = IndicatorCategory> + '_ {
        self.remove.iter().copied()
    }
}

/// Deletions per lexical category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct DeletionCounts {
    pub pmi: u64,
    pub cli: u64,
    pub nti: u64,
    pub ati: u64,
    pub cni: u64,
}

impl DeletionCounts {
    fn bump(&mut self, c: IndicatorCategory) {
        match c {
            IndicatorCategory::Pmi => self.pmi += 1,
            IndicatorCategory::Cli => self.cli += 1,
            IndicatorCategory::Nti => self.nti += 1,
            IndicatorCategory::Ati => self.ati += 1,
            IndicatorCategory::Cni => self.cni += 1,
            IndicatorCategory::Lui => {}
        }
    }

    pub fn add(&mut self, other: &DeletionCounts) {
        self.pmi += other.pmi;
        self.cli += other.cli;
        self.nti += other.nti;
        self.ati += other.ati;
        self.cni += other.cni;
    }

    pub fn total(&self) -> u64 {
        self.pmi + self.cli + self.nti + self.ati + self.cni
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationOutcome {
    pub text: String,
    pub deletions: DeletionCounts,
    /// Passes that changed the text.
    pub passes: usize,
}

pub fn ablate_text(text: &str, lexicon: &IndicatorLexicon, spec: &AblationSpec) -> AblationOutcome {
    let mut current = text.to_string();
    let mut deletions = DeletionCounts::default();
    let mut passes = 0;
    while passes < MAX_PASSES {
        let tokens = WordTokenizer.tokenize(&current);
        let mut remove = vec![false; tokens.len()];
        let mut runs = Vec::new();
        for (range, entry) in lexicon.match_tokens(&tokens) {
            if spec.removes(entry.category) {
                deletions.bump(entry.category);
                remove[range.clone()].iter_mut().for_each(|r| *r = true);
                runs.push(range);
            }
        }
        if runs.is_empty() {
            break;
        }
        passes += 1;
        current = match spec.mode {
            AblationMode::DeleteAndRepair => delete_and_repair(&current, &tokens, remove),
            AblationMode::Placeholder => replace_runs(&current, &tokens, &runs),
        };
    }
    AblationOutcome { text: current, deletions, passes }
}

fn replace_runs(text: &str, tokens: &[Token], runs: &[std::ops::Range<usize>]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for run in runs {
        out.push_str(&text[cursor..tokens[run.start].bytes.start]);
        out.push_str(DEFAULT_PLACEHOLDER);
        cursor = tokens[run.end - 1].bytes.end;
    }
    out.push_str(&text[cursor..]);
    out
}

fn is_sentence_end(t: &str) -> bool {
    matches!(t, "." | "!" | "?")
}

fn is_clause_break(t: &str) -> bool {
    matches!(t, "." | "!" | "?" | ";" | ":" | "," | "(" | "[" | "\u{2014}" | "\u{2013}")
}

fn is_closing(t: &str) -> bool {
    matches!(t, "." | "!" | "?" | ";" | ":" | "," | ")" | "]")
}

fn delete_and_repair(text: &str, tokens: &[Token], mut remove: Vec<bool>) -> String {
    let n = tokens.len();
    let mut capitalize = vec![false; n];
    // Comma and capitalization repair, one maximal deleted run at a time.
    let mut i = 0;
    while i < n {
        if !remove[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && remove[i] {
            i += 1;
        }
        let prev = (0..start).rev().find(|&k| !remove[k]);
        let mut next = (i..n).find(|&k| !remove[k]);
        let prev_text = prev.map(|k| tokens[k].text.as_str());
        let next_text = next.map(|k| tokens[k].text.as_str());
        if next_text == Some(",") && prev_text.is_none_or(is_clause_break) {
            let k = next.unwrap();
            remove[k] = true;
            next = (k + 1..n).find(|&j| !remove[j]);
        } else if prev_text == Some(",") && next_text.is_none_or(is_closing) {
            remove[prev.unwrap()] = true;
        }
        if prev_text.is_none_or(is_sentence_end) {
            if let Some(k) = next {
                capitalize[k] = true;
            }
        }
    }

    let mut out = String::with_capacity(text.len());
    // Gap carried over from deleted tokens, to be merged with the next one.
    let mut pending_gap: Option<&str> = None;
    let mut cursor = 0;
    let mut emitted_any = false;
    for (k, tok) in tokens.iter().enumerate() {
        let gap = &text[cursor..tok.bytes.start];
        cursor = tok.bytes.end;
        if remove[k] {
            if pending_gap.is_none() {
                pending_gap = Some(gap);
            }
            continue;
        }
        let gap = match pending_gap.take() {
            None => gap.to_string(),
            Some(before) => {
                if !emitted_any {
                    before.to_string()
                } else {
                    merge_gaps(before, gap, &tok.text)
                }
            }
        };
        out.push_str(&gap);
        if capitalize[k] {
            let mut chars = tok.text.chars();
            let first = chars.next().expect("tokens are non-empty");
            out.extend(first.to_uppercase());
            out.push_str(chars.as_str());
        } else {
            out.push_str(&tok.text);
        }
        emitted_any = true;
    }
    let tail = &text[cursor..];
    match pending_gap {
        Some(before) if before.contains('\n') && !tail.contains('\n') => out.push_str(before),
        _ => {}
    }
    out.push_str(tail);
    out
}

fn merge_gaps(before: &str, after: &str, next: &str) -> String {
    let chosen = if before.is_empty() || (after.contains('\n') && !before.contains('\n')) {
        after
    } else {
        before
    };
    if is_closing(next) && !chosen.contains('\n') {
        String::new()
    } else {
        chosen.to_string()
    }
}
