//! Building blocks for logic-dense masked-language-model corpora.
//!
//! The pipeline is: [`ingest`] raw text into tokenized paragraphs, locate
//! logical indicators with a [`lexicon::IndicatorLexicon`], filter out
//! paragraphs that are too short or too sparse, then [`masker`] replaces
//! indicators (and a small share of ordinary tokens) with `[LGMASK]` and adds
//! classic MLM masking. [`record`] fixes the line-delimited output format,
//! [`stats`] audits a built corpus, [`loss`] evaluates the category and
//! combined pre-training losses, and [`ablate`] strips chosen indicator
//! categories from text.

pub mod ablate;
pub mod category;
pub mod ingest;
pub mod lexicon;
pub mod loss;
pub mod masker;
pub mod record;
pub mod rng;
pub mod stats;
pub mod tokenize;

pub use ablate::{ablate_text, AblationMode, AblationOutcome, AblationSpec};
pub use category::IndicatorCategory;
pub use ingest::{filter_paragraphs, split_paragraphs, FilterPolicy, TokenizedParagraph};
pub use lexicon::{find_indicators, IndicatorLexicon, IndicatorMatch};
pub use loss::{idol_loss, lcp_loss, LcpBatch, LossConfig, Reduction};
pub use masker::{MaskPolicy, MaskedSample, Masker, Vocabulary};
pub use stats::{report, CorpusReport};
pub use tokenize::{Token, Tokenizer, WordTokenizer};

/// Special token replacing indicator occurrences and LUI draws.
pub const LGMASK: &str = "[LGMASK]";
/// Special token of the classic MLM channel.
pub const MASK: &str = "[MASK]";
