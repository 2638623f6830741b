//! Indicator libraries and the phrase matcher.
//!
//! Matching works on tokens, not bytes: a phrase matches only a run of whole
//! tokens, compared case-insensitively after apostrophe folding. Ambiguity is
//! resolved leftmost-longest: scanning left to right, the longest phrase
//! starting at the current token wins and the scan resumes after it.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use crate::category::IndicatorCategory;
use crate::ingest::{ParagraphId, TokenizedParagraph};
use crate::tokenize::{Token, Tokenizer, WordTokenizer};

const PMI: &[&str] = &[
    "given that", "seeing that", "for the reason that", "owing to", "as indicated by",
    "on the grounds that", "on account of", "considering", "because of", "due to", "now that",
    "may be inferred from", "by virtue of", "in view of", "for the sake of", "thanks to",
    "as long as", "based on that", "as a result of", "considering that", "inasmuch as",
    "if and only if", "according to", "in that", "only if", "because", "depend on", "rely on",
];

const CLI: &[&str] = &[
    "conclude that", "entail that", "infer that", "that is why", "therefore", "thereby",
    "wherefore", "accordingly", "hence", "thus", "consequently", "whence", "so that",
    "it follows that", "imply that", "as a result", "suggest that", "prove that",
    "as a conclusion", "conclusively", "for this reason", "as a consequence", "on that account",
    "in conclusion", "to that end", "because of this", "that being so", "ergo", "in this way",
    "in this manner", "by such means", "as it turns out", "result in", "in order that",
    "show that", "eventually",
];

const NTI: &[&str] = &[
    "not", "neither", "none of", "unable", "few", "little", "hardly", "merely", "seldom",
    "without", "never", "nobody", "nothing", "nowhere", "rarely", "scarcely", "barely",
    "no longer", "isn't", "aren't", "wasn't", "weren't", "can't", "cannot", "couldn't", "won't",
    "wouldn't", "don't", "doesn't", "didn't", "haven't", "hasn't",
];

// "nevertheless" is listed twice in the published library; loading dedups it.
const ATI: &[&str] = &[
    "although", "though", "but", "nevertheless", "however", "instead of", "nonetheless", "yet",
    "rather", "whereas", "otherwise", "conversely", "on the contrary", "even", "nevertheless",
    "despite", "in spite of", "in contrast", "even if", "even though", "unless", "regardless of",
    "reckless of",
];

const CNI: &[&str] = &[
    "and", "or", "nor", "also", "moreover", "in addition", "on the other hand", "meanwhile",
    "further", "afterward", "next", "besides", "additionally", "meantime", "furthermore",
    "as well", "simultaneously", "either", "both", "similarly", "likewise",
];

/// High-frequency phrases that do not count toward paragraph filtering.
pub const DEFAULT_EXCLUSIONS: &[&str] =
    &["and", "or", "also", "both", "even", "further", "next", "either"];

pub const BUILTIN_SOURCE: &str = "builtin:v1";

/// The phrase library for one category of the built-in lexicon.
pub fn builtin_phrases(category: IndicatorCategory) -> &'static [&'static str] {
    match category {
        IndicatorCategory::Pmi => PMI,
        IndicatorCategory::Cli => CLI,
        IndicatorCategory::Nti => NTI,
        IndicatorCategory::Ati => ATI,
        IndicatorCategory::Cni => CNI,
        IndicatorCategory::Lui => &[],
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("phrase `{phrase}` is listed under both {first} and {second}")]
    CrossCategory {
        phrase: String,
        first: IndicatorCategory,
        second: IndicatorCategory,
    },
    #[error("invalid phrase `{0}`")]
    InvalidPhrase(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    /// Canonical form: normalized tokens joined by single spaces.
    pub phrase: Arc<str>,
    pub category: IndicatorCategory,
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<Box<str>, usize>,
    entry: Option<usize>,
}

/// A validated set of indicator phrases plus its compiled matcher.
///
/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone)]
pub struct IndicatorLexicon {
    entries: Vec<LexiconEntry>,
    exclusions: BTreeSet<String>,
    source: String,
    nodes: Vec<TrieNode>,
    max_len: usize,
}

/// One located phrase occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorMatch {
    pub paragraph: ParagraphId,
    /// Token indices, end exclusive.
    pub tokens: Range<usize>,
    /// Character offsets, end exclusive.
    pub chars: Range<usize>,
    pub phrase: Arc<str>,
    pub category: IndicatorCategory,
}

impl IndicatorLexicon {
    /// The built-in libraries with the default exclusion set.
    pub fn builtin() -> Self {
        let pairs = IndicatorCategory::LEXICAL
            .iter()
            .flat_map(|&c| builtin_phrases(c).iter().map(move |p| (c, *p)));
        Self::from_pairs(pairs, DEFAULT_EXCLUSIONS.iter().copied(), BUILTIN_SOURCE)
            .expect("built-in lexicon is valid")
    }

    /// A lexicon with no phrases.
    pub fn empty(source: impl Into<String>) -> Self {
        Self::from_pairs(std::iter::empty(), std::iter::empty(), source).expect("empty is valid")
    }

    /// Validate and compile `(category, phrase)` pairs.
    ///
    /// Repeated pairs collapse into one entry; a phrase under two categories
    /// is rejected.
    pub fn from_pairs<'a, P, E>(pairs: P, exclusions: E, source: impl Into<String>) -> Result<Self, LexiconError>
    where
        P: IntoIterator<Item = (IndicatorCategory, &'a str)>,
        E: IntoIterator<Item = &'a str>,
    {
        let mut lex = IndicatorLexicon {
            entries: Vec::new(),
            exclusions: BTreeSet::new(),
            source: source.into(),
            nodes: vec![TrieNode::default()],
            max_len: 0,
        };
        for (category, phrase) in pairs {
            lex.insert(category, phrase)?;
        }
        for phrase in exclusions {
            let tokens = phrase_tokens(phrase)?;
            lex.exclusions.insert(tokens.join(" "));
        }
        Ok(lex)
    }

    fn insert(&mut self, category: IndicatorCategory, phrase: &str) -> Result<(), LexiconError> {
        if !category.is_lexical() {
            return Err(LexiconError::InvalidPhrase(format!(
                "{phrase} (LUI has no phrase library)"
            )));
        }
        let tokens = phrase_tokens(phrase)?;
        let mut node = 0;
        for tok in &tokens {
            node = match self.nodes[node].children.get(tok.as_str()) {
                Some(&next) => next,
                None => {
                    let next = self.nodes.len();
                    self.nodes.push(TrieNode::default());
                    self.nodes[node].children.insert(tok.as_str().into(), next);
                    next
                }
            };
        }
        if let Some(existing) = self.nodes[node].entry {
            let existing = &self.entries[existing];
            if existing.category == category {
                return Ok(());
            }
            return Err(LexiconError::CrossCategory {
                phrase: existing.phrase.to_string(),
                first: existing.category,
                second: category,
            });
        }
        self.nodes[node].entry = Some(self.entries.len());
        self.max_len = self.max_len.max(tokens.len());
        self.entries.push(LexiconEntry {
            phrase: tokens.join(" ").into(),
            category,
        });
        Ok(())
    }

    /// Parse the `category<TAB>phrase` line format.
    ///
    /// Blank lines and lines starting with `#` are ignored. The exclusion set
    /// is the default one; override it with [`with_exclusions`](Self::with_exclusions).
    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self, LexiconError> {
        let mut lex = Self::empty(source);
        for phrase in DEFAULT_EXCLUSIONS {
            lex.exclusions.insert((*phrase).to_string());
        }
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (cat, phrase) = raw.split_once('\t').ok_or_else(|| LexiconError::Parse {
                line,
                message: "expected `category<TAB>phrase`".to_string(),
            })?;
            let category: IndicatorCategory = cat.parse().map_err(|e: crate::category::UnknownCategory| {
                LexiconError::Parse { line, message: e.to_string() }
            })?;
            match lex.insert(category, phrase) {
                Ok(()) => {}
                Err(LexiconError::InvalidPhrase(p)) => {
                    return Err(LexiconError::Parse {
                        line,
                        message: format!("invalid phrase `{p}`"),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, format!("file:{}", path.display()))
    }

    /// Replace the exclusion set.
    pub fn with_exclusions<'a>(mut self, phrases: impl IntoIterator<Item = &'a str>) -> Result<Self, LexiconError> {
        self.exclusions.clear();
        for phrase in phrases {
            self.exclusions.insert(phrase_tokens(phrase)?.join(" "));
        }
        Ok(self)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn exclusions(&self) -> &BTreeSet<String> {
        &self.exclusions
    }

    pub fn is_excluded(&self, phrase: &str) -> bool {
        self.exclusions.contains(phrase)
    }

    /// Longest phrase length in tokens.
    pub fn max_phrase_len(&self) -> usize {
        self.max_len
    }

    /// Category of a phrase given in any casing.
    pub fn category_of(&self, phrase: &str) -> Option<IndicatorCategory> {
        let tokens = phrase_tokens(phrase).ok()?;
        let mut node = 0;
        for tok in &tokens {
            node = *self.nodes[node].children.get(tok.as_str())?;
        }
        self.nodes[node].entry.map(|e| self.entries[e].category)
    }

    /// Render in the lexicon file format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# source: {}", self.source);
        let excl: Vec<&str> = self.exclusions.iter().map(String::as_str).collect();
        let _ = writeln!(out, "# excluded from filtering: {}", excl.join(", "));
        for cat in IndicatorCategory::LEXICAL {
            for e in self.entries.iter().filter(|e| e.category == cat) {
                let _ = writeln!(out, "{}\t{}", cat, e.phrase);
            }
        }
        out
    }

    /// Leftmost-longest matches over already-normalized tokens, as
    /// `(token range, entry index)`.
    pub fn match_normalized<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<(Range<usize>, usize)> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < tokens.len() {
            let mut node = 0;
            let mut best = None;
            for (offset, tok) in tokens[pos..].iter().enumerate() {
                match self.nodes[node].children.get(tok.as_ref()) {
                    Some(&next) => {
                        node = next;
                        if let Some(entry) = self.nodes[node].entry {
                            best = Some((pos + offset + 1, entry));
                        }
                    }
                    None => break,
                }
            }
            match best {
                Some((end, entry)) => {
                    out.push((pos..end, entry));
                    pos = end;
                }
                None => pos += 1,
            }
        }
        out
    }

    /// Leftmost-longest matches over raw tokens.
    pub fn match_tokens(&self, tokens: &[Token]) -> Vec<(Range<usize>, &LexiconEntry)> {
        let normalized: Vec<_> = tokens.iter().map(Token::normalized).collect();
        self.match_normalized(&normalized)
            .into_iter()
            .map(|(range, e)| (range, &self.entries[e]))
            .collect()
    }
}

fn phrase_tokens(phrase: &str) -> Result<Vec<String>, LexiconError> {
    let trimmed = phrase.trim();
    if trimmed.is_empty() {
        return Err(LexiconError::InvalidPhrase(phrase.to_string()));
    }
    let tokens: Vec<String> = WordTokenizer
        .tokenize(trimmed)
        .iter()
        .map(|t| t.normalized().into_owned())
        .collect();
    if tokens.is_empty() {
        return Err(LexiconError::InvalidPhrase(phrase.to_string()));
    }
    Ok(tokens)
}

/// All leftmost-longest, non-overlapping indicator occurrences in a
/// paragraph, sorted by position.
pub fn find_indicators(paragraph: &TokenizedParagraph, lexicon: &IndicatorLexicon) -> Vec<IndicatorMatch> {
    lexicon
        .match_tokens(&paragraph.tokens)
        .into_iter()
        .map(|(range, entry)| IndicatorMatch {
            paragraph: paragraph.id,
            chars: paragraph.tokens[range.start].chars.start..paragraph.tokens[range.end - 1].chars.end,
            tokens: range,
            phrase: entry.phrase.clone(),
            category: entry.category,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::split_paragraphs;

    fn para(text: &str) -> TokenizedParagraph {
        split_paragraphs("t", text.as_bytes()).unwrap().remove(0)
    }

    fn found(text: &str) -> Vec<(String, IndicatorCategory)> {
        find_indicators(&para(text), &IndicatorLexicon::builtin())
            .into_iter()
            .map(|m| (m.phrase.to_string(), m.category))
            .collect()
    }

    #[test]
    fn builtin_has_table_examples() {
        let lex = IndicatorLexicon::builtin();
        assert_eq!(lex.category_of("because"), Some(IndicatorCategory::Pmi));
        assert_eq!(lex.category_of("thus"), Some(IndicatorCategory::Cli));
        assert_eq!(lex.category_of("not"), Some(IndicatorCategory::Nti));
        assert_eq!(lex.category_of("however"), Some(IndicatorCategory::Ati));
        assert_eq!(lex.category_of("moreover"), Some(IndicatorCategory::Cni));
        // 28 + 36 + 32 + 22 + 21, with the repeated "nevertheless" folded.
        assert_eq!(lex.len(), 139);
        assert_eq!(lex.source(), BUILTIN_SOURCE);
        assert!(lex.is_excluded("and"));
    }

    #[test]
    fn pmi_example_sentence() {
        assert_eq!(
            found("This is because any system of control is inefficient"),
            vec![("because".to_string(), IndicatorCategory::Pmi)]
        );
    }

    #[test]
    fn no_indicators() {
        assert!(found("the cat sat").is_empty());
    }

    #[test]
    fn longest_phrase_wins() {
        assert_eq!(
            found("he left because of the rain"),
            vec![("because of".to_string(), IndicatorCategory::Pmi)]
        );
        assert_eq!(
            found("because of this we left"),
            vec![("because of this".to_string(), IndicatorCategory::Cli)]
        );
    }

    #[test]
    fn word_boundaries_respected() {
        assert!(found("notable cannoting").is_empty());
        assert_eq!(found("Nothing"), vec![("nothing".to_string(), IndicatorCategory::Nti)]);
    }

    #[test]
    fn curly_apostrophes_match() {
        assert_eq!(found("It isn\u{2019}t"), vec![("isn't".to_string(), IndicatorCategory::Nti)]);
    }

    #[test]
    fn match_spans() {
        let p = para("Well, in addition to that");
        let m = find_indicators(&p, &IndicatorLexicon::builtin());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].tokens, 2..4);
        assert_eq!(m[0].chars, 6..17);
        assert_eq!(m[0].paragraph, p.id);
    }

    #[test]
    fn parse_file_format() {
        let text = "# comment\n\nPMI\tbecause\npmi\tbecause\nCLI\t  as  a result \n";
        let lex = IndicatorLexicon::parse(text, "test").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.category_of("As a result"), Some(IndicatorCategory::Cli));
    }

    #[test]
    fn parse_empty() {
        let lex = IndicatorLexicon::parse("", "empty").unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn cross_category_rejected() {
        let err = IndicatorLexicon::parse("PMI\tbecause\nATI\tbecause\n", "x").unwrap_err();
        match err {
            LexiconError::CrossCategory { phrase, first, second } => {
                assert_eq!(phrase, "because");
                assert_eq!(first, IndicatorCategory::Pmi);
                assert_eq!(second, IndicatorCategory::Ati);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_name_line() {
        let err = IndicatorLexicon::parse("PMI\tbecause\nbecause\n", "x").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 2, .. }), "{err}");
        let err = IndicatorLexicon::parse("XXX\tbecause\n", "x").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
        let err = IndicatorLexicon::parse("LUI\tfoo\n", "x").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
        let err = IndicatorLexicon::parse("PMI\t   \n", "x").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
    }

    #[test]
    fn dump_reloads_identically() {
        let lex = IndicatorLexicon::builtin();
        let again = IndicatorLexicon::parse(&lex.dump(), "dump").unwrap();
        assert_eq!(lex.entries(), again.entries());
    }
}
