//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use logicorp::stats::DEFAULT_BUCKET_WIDTH;
use logicorp::{AblationMode, AblationSpec, LossConfig, Reduction};

use crate::build::{load_lexicon, run_build};
use crate::commands;
use crate::config::{BuildOverrides, ConfigFile, PipelineConfig, WORKERS_ENV};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "logicorp", version, about = "Build, audit and ablate logic-dense pre-training corpora")]
pub struct Cli {
    /// Flat `key = value` config file. Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest, filter, mask and emit a corpus.
    Build(BuildArgs),
    /// Report per-category counts, masking rates and density of a built corpus.
    Stats(StatsArgs),
    /// Remove indicator categories from the text field of line-delimited records.
    Ablate(AblateArgs),
    /// Evaluate the category-prediction and combined losses on a logits file.
    Loss(LossArgs),
    /// Inspect indicator lexicons.
    Lexicon {
        #[command(subcommand)]
        action: LexiconAction,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Input files or directories (plain text, `.jsonl` records, or extractor dumps).
    #[arg(value_name = "INPUT")]
    pub inputs: Vec<PathBuf>,
    /// Output records file.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Lexicon file, or `builtin`.
    #[arg(long, value_name = "FILE|builtin")]
    pub lexicon: Option<String>,
    /// Comma-separated phrases that do not count toward filtering.
    #[arg(long, value_delimiter = ',', value_name = "PHRASES")]
    pub exclude: Option<Vec<String>>,
    /// Minimum paragraph length in tokens [default: 6].
    #[arg(long)]
    pub min_tokens: Option<usize>,
    /// Minimum count of non-excluded indicators [default: 1].
    #[arg(long)]
    pub min_indicators: Option<usize>,
    /// Minimum non-excluded indicators per 100 tokens [default: off].
    #[arg(long)]
    pub min_density: Option<f64>,
    /// Probability of replacing an indicator with [LGMASK] [default: 0.7].
    #[arg(long)]
    pub p_lg: Option<f64>,
    /// Probability of turning a non-indicator token into an LUI [LGMASK] [default: 0.006].
    #[arg(long)]
    pub p_lui: Option<f64>,
    /// MLM selection rate [default: 0.15].
    #[arg(long)]
    pub mlm_rate: Option<f64>,
    /// Share of MLM selections replaced by [MASK] [default: 0.8].
    #[arg(long)]
    pub mlm_mask: Option<f64>,
    /// Share of MLM selections replaced by a random vocabulary token [default: 0.1].
    #[arg(long)]
    pub mlm_random: Option<f64>,
    /// Share of MLM selections left unchanged [default: 0.1].
    #[arg(long)]
    pub mlm_keep: Option<f64>,
    /// Random seed (required, here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: 1; env LOGICORP_WORKERS].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Skip MLM masking so a trainer can mask dynamically.
    #[arg(long)]
    pub no_mlm: bool,
    /// Never replace excluded high-frequency phrases with [LGMASK].
    #[arg(long)]
    pub protect_excluded: bool,
    /// Drop lines that look like leftover wiki markup.
    #[arg(long)]
    pub wiki: bool,
    /// Report progress every N paragraphs [default: 10000].
    #[arg(long, value_name = "N")]
    pub progress_every: Option<u64>,
    /// Suppress progress output.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Records file produced by `build`.
    pub file: PathBuf,
    /// Density histogram bucket width, in indicators per 100 tokens [default: 5].
    #[arg(long)]
    pub hist_bucket: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Input records file.
    pub input: PathBuf,
    /// Output records file [default: standard output].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Categories to remove: a comma list of pmi, cli, nti, ati, cni, or `all`.
    #[arg(long, value_name = "LIST")]
    pub remove: Option<String>,
    /// `delete` (with punctuation repair) or `placeholder` [default: delete].
    #[arg(long)]
    pub mode: Option<String>,
    /// Name of the text field [default: text].
    #[arg(long)]
    pub field: Option<String>,
    /// Lexicon file, or `builtin`.
    #[arg(long, value_name = "FILE|builtin")]
    pub lexicon: Option<String>,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Line-delimited `{"logits": [[6 floats]...], "gold": [codes...]}` records.
    pub file: PathBuf,
    /// Weight of the category-prediction loss [default: 0.8].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// MLM loss value to combine with [default: 0].
    #[arg(long)]
    pub mlm_loss: Option<f64>,
    /// `paper-sum` (sum over samples) or `batch-mean` [default: paper-sum].
    #[arg(long)]
    pub reduction: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum LexiconAction {
    /// Print a lexicon in the `category<TAB>phrase` file format.
    Dump {
        /// Lexicon file, or `builtin` [default: builtin].
        #[arg(long, value_name = "FILE|builtin")]
        lexicon: Option<String>,
    },
    /// Validate a lexicon file and print its entry count per category.
    Check { file: PathBuf },
}

fn lexicon_path(flag: Option<&str>, file: &ConfigFile) -> Option<PathBuf> {
    match flag.or(file.raw("lexicon")) {
        None => None,
        Some(v) if v.eq_ignore_ascii_case("builtin") => None,
        Some(v) => Some(PathBuf::from(v)),
    }
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T, module: &'static str) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(module, e))?;
    writeln!(out, "{text}").map_err(|e| CliError::runtime(module, e))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Build(a) => {
            let flags = BuildOverrides {
                inputs: a.inputs,
                output: a.output,
                lexicon: a.lexicon,
                exclude: a.exclude,
                min_tokens: a.min_tokens,
                min_indicators: a.min_indicators,
                min_density: a.min_density,
                p_lg: a.p_lg,
                p_lui: a.p_lui,
                mlm_rate: a.mlm_rate,
                mlm_mask: a.mlm_mask,
                mlm_random: a.mlm_random,
                mlm_keep: a.mlm_keep,
                seed: a.seed,
                workers: a.workers,
                no_mlm: a.no_mlm,
                protect_excluded: a.protect_excluded,
                wiki: a.wiki,
                progress_every: a.progress_every,
                quiet: a.quiet,
            };
            let env = std::env::var(WORKERS_ENV).ok();
            let config = PipelineConfig::resolve(&file, env.as_deref(), flags)?;
            let summary = run_build(&config)?;
            write_json(out, &summary, "build")
        }
        Command::Stats(a) => {
            let width = match a.hist_bucket {
                Some(w) => w,
                None => file.get("hist_bucket")?.unwrap_or(DEFAULT_BUCKET_WIDTH),
            };
            let report = commands::stats(&a.file, width)?;
            write_json(out, &report, "stats")
        }
        Command::Ablate(a) => {
            let mode: AblationMode = a
                .mode
                .as_deref()
                .or(file.raw("mode"))
                .map(str::parse)
                .transpose()
                .map_err(|e: String| CliError::usage("ablate", e))?
                .unwrap_or_default();
            let remove = a
                .remove
                .as_deref()
                .or(file.raw("remove"))
                .ok_or_else(|| CliError::usage("ablate", "--remove is required"))?;
            let spec = AblationSpec::parse(remove, mode).map_err(|e| CliError::usage("ablate", e))?;
            let field = a.field.as_deref().or(file.raw("field")).unwrap_or("text").to_string();
            let lexicon = load_lexicon(lexicon_path(a.lexicon.as_deref(), &file).as_deref(), file.get_list("exclude").as_deref())?;
            let input = std::fs::File::open(&a.input)
                .map_err(|e| CliError::runtime("ablate", format!("{}: {e}", a.input.display())))?;
            let counts = match &a.output {
                Some(path) => {
                    let f = std::fs::File::create(path)
                        .map_err(|e| CliError::runtime("ablate", format!("{}: {e}", path.display())))?;
                    commands::ablate_records(input, f, &field, &lexicon, &spec)?
                }
                None => commands::ablate_records(input, &mut *out, &field, &lexicon, &spec)?,
            };
            let line = serde_json::to_string(&counts).map_err(|e| CliError::runtime("ablate", e))?;
            writeln!(err, "{line}").map_err(|e| CliError::runtime("ablate", e))
        }
        Command::Loss(a) => {
            let defaults = LossConfig::default();
            let reduction: Reduction = a
                .reduction
                .as_deref()
                .or(file.raw("reduction"))
                .map(str::parse)
                .transpose()
                .map_err(|e: String| CliError::usage("loss", e))?
                .unwrap_or(defaults.reduction);
            let config = LossConfig {
                lambda: match a.lambda {
                    Some(l) => l,
                    None => file.get("lambda")?.unwrap_or(defaults.lambda),
                },
                reduction,
            };
            let mlm = match a.mlm_loss {
                Some(m) => m,
                None => file.get("mlm_loss")?.unwrap_or(0.0),
            };
            let text = std::fs::read_to_string(&a.file)
                .map_err(|e| CliError::runtime("loss", format!("{}: {e}", a.file.display())))?;
            let (report, empty) = commands::loss(&text, mlm, &config)?;
            if empty {
                writeln!(err, "warning[loss]: empty batch, lcp loss reported as 0").map_err(|e| CliError::runtime("loss", e))?;
            }
            let line = serde_json::to_string(&report).map_err(|e| CliError::runtime("loss", e))?;
            writeln!(out, "{line}").map_err(|e| CliError::runtime("loss", e))
        }
        Command::Lexicon { action } => match action {
            LexiconAction::Dump { lexicon } => {
                let lex = load_lexicon(lexicon_path(lexicon.as_deref(), &file).as_deref(), file.get_list("exclude").as_deref())?;
                out.write_all(lex.dump().as_bytes()).map_err(|e| CliError::runtime("lexicon", e))
            }
            LexiconAction::Check { file: path } => {
                let lex = load_lexicon(Some(&path), None)?;
                let mut counts = serde_json::Map::new();
                for c in logicorp::IndicatorCategory::LEXICAL {
                    let n = lex.entries().iter().filter(|e| e.category == c).count();
                    counts.insert(c.name().to_string(), n.into());
                }
                let line = serde_json::to_string(&counts).map_err(|e| CliError::runtime("lexicon", e))?;
                writeln!(out, "{line}").map_err(|e| CliError::runtime("lexicon", e))
            }
        },
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code
        }
    }
}
