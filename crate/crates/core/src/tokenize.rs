//! Word-level tokenization with character offsets.
//!
//! The default [`WordTokenizer`] follows Unicode word segmentation (UAX #29):
//! letters joined by an apostrophe stay together, so contractions such as
//! `isn't` or `can't` are single tokens, while every punctuation mark is a
//! token of its own. Whitespace is never a token.

use std::borrow::Cow;
use std::ops::Range;

use unicode_segmentation::UnicodeSegmentation;

/// One token with its location in the tokenized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character (Unicode scalar) offsets, end exclusive.
    pub chars: Range<usize>,
    /// Byte offsets into the same text, end exclusive.
    pub bytes: Range<usize>,
}

impl Token {
    /// Lowercased surface with typographic apostrophes folded to `'`.
    pub fn normalized(&self) -> Cow<'_, str> {
        normalize(&self.text)
    }
}

/// A tokenizer maps text to offset-carrying tokens.
///
/// Implementations must return tokens with non-empty surfaces and strictly
/// increasing, non-overlapping spans whose surfaces are exactly the covered
/// slice of the input.
pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<Token>;
}

impl<F> Tokenizer for F
where
    F: Fn(&str) -> Vec<Token> + Send + Sync,
{
    fn tokenize(&self, text: &str) -> Vec<Token> {
        self(text)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut tokens = Vec::with_capacity(text.len() / 5);
        let mut last_byte = 0usize;
        let mut last_char = 0usize;
        for (byte_idx, segment) in text.split_word_bound_indices() {
            last_char += char_count(&text[last_byte..byte_idx]);
            let len = char_count(segment);
            last_byte = byte_idx;
            if segment.chars().all(char::is_whitespace) {
                continue;
            }
            tokens.push(Token {
                text: segment.to_string(),
                chars: last_char..last_char + len,
                bytes: byte_idx..byte_idx + segment.len(),
            });
        }
        tokens
    }
}

fn char_count(s: &str) -> usize {
    if s.is_ascii() {
        s.len()
    } else {
        s.chars().count()
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\u{2019}' | '\u{2018}' | '\u{02BC}' | '\u{FF07}')
}

/// Case-fold a token or phrase for lexicon lookup.
pub fn normalize(s: &str) -> Cow<'_, str> {
    if s.bytes().all(|b| b.is_ascii() && !b.is_ascii_uppercase()) {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if is_apostrophe(c) {
            out.push('\'');
        } else {
            out.extend(c.to_lowercase());
        }
    }
    Cow::Owned(out)
}
