//! Flat `key = value` configuration files and the resolved build settings.
//!
//! Values are layered: built-in defaults, then the config file, then the
//! worker-count environment variable, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use logicorp::masker::MlmSplit;
use logicorp::{FilterPolicy, MaskPolicy};

use crate::error::{CliError, Result};

pub const WORKERS_ENV: &str = "LOGICORP_WORKERS";

/// Every key a config file may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "input", "output", "lexicon", "exclude", "min_tokens", "min_indicators", "min_density", "p_lg", "p_lui",
    "mlm_rate", "mlm_mask", "mlm_random", "mlm_keep", "seed", "workers", "no_mlm", "mask_excluded", "wiki",
    "progress_every", "quiet", "hist_bucket", "remove", "mode", "field", "lambda", "mlm_loss", "reduction",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigParseError {
    pub line: usize,
    pub message: String,
}

/// Parsed config file: keys to raw values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Parse INI-style text. `#` and `;` start comment lines, `[section]`
    /// headers are accepted and ignored, and a repeated key keeps its last
    /// value.
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigParseError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let err = |message: String| ConfigParseError { line: idx + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key `{key}`")));
            }
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            values.insert(key, value.to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime("config", format!("reading {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed lookup; a value that does not parse is a usage error.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::usage("config", format!("key `{key}`: invalid value `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(CliError::usage("config", format!("key `{key}`: expected a boolean, got `{v}`"))),
            })
            .transpose()
    }

    pub fn get_list(&self, key: &str) -> Option<Vec<String>> {
        self.raw(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
    }
}

/// Build settings after layering.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    /// `None` selects the built-in lexicon.
    pub lexicon: Option<PathBuf>,
    pub exclude: Option<Vec<String>>,
    pub filter: FilterPolicy,
    pub mask: MaskPolicy,
    pub workers: usize,
    pub wiki: bool,
    pub progress_every: u64,
    pub quiet: bool,
}

/// Values given on the command line; unset fields fall through.
#[derive(Debug, Clone, Default)]
pub struct BuildOverrides {
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub lexicon: Option<String>,
    pub exclude: Option<Vec<String>>,
    pub min_tokens: Option<usize>,
    pub min_indicators: Option<usize>,
    pub min_density: Option<f64>,
    pub p_lg: Option<f64>,
    pub p_lui: Option<f64>,
    pub mlm_rate: Option<f64>,
    pub mlm_mask: Option<f64>,
    pub mlm_random: Option<f64>,
    pub mlm_keep: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub no_mlm: bool,
    pub protect_excluded: bool,
    pub wiki: bool,
    pub progress_every: Option<u64>,
    pub quiet: bool,
}

fn lexicon_choice(v: &str) -> Option<PathBuf> {
    if v.eq_ignore_ascii_case("builtin") {
        None
    } else {
        Some(PathBuf::from(v))
    }
}

impl PipelineConfig {
    pub fn resolve(file: &ConfigFile, env_workers: Option<&str>, flags: BuildOverrides) -> Result<Self> {
        let inputs = if !flags.inputs.is_empty() {
            flags.inputs
        } else {
            file.get_list("input").unwrap_or_default().into_iter().map(PathBuf::from).collect()
        };
        if inputs.is_empty() {
            return Err(CliError::usage("config", "no input paths given"));
        }
        let output = flags
            .output
            .or_else(|| file.raw("output").map(PathBuf::from))
            .ok_or_else(|| CliError::usage("config", "no output path given"))?;
        let lexicon = match flags.lexicon.as_deref().or(file.raw("lexicon")) {
            Some(v) => lexicon_choice(v),
            None => None,
        };
        let seed = match flags.seed {
            Some(s) => s,
            None => file
                .get::<u64>("seed")?
                .ok_or_else(|| CliError::usage("config", "a seed is required for build (--seed or `seed =`)"))?,
        };
        let env_workers = env_workers
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::usage("config", format!("{WORKERS_ENV}=`{v}`: {e}")))
            })
            .transpose()?;
        let workers = flags.workers.or(env_workers).or(file.get("workers")?).unwrap_or(1);
        if workers == 0 {
            return Err(CliError::usage("config", "workers must be at least 1"));
        }

        let defaults_f = FilterPolicy::default();
        let filter = FilterPolicy {
            min_tokens: flags.min_tokens.or(file.get("min_tokens")?).unwrap_or(defaults_f.min_tokens),
            min_indicators: flags.min_indicators.or(file.get("min_indicators")?).unwrap_or(defaults_f.min_indicators),
            min_density: flags.min_density.or(file.get("min_density")?).or(defaults_f.min_density),
        };
        filter.validate().map_err(|e| CliError::usage("config", e))?;

        let d = MaskPolicy::default();
        let no_mlm = flags.no_mlm || file.get_bool("no_mlm")?.unwrap_or(false);
        let mlm_rate = if no_mlm { 0.0 } else { flags.mlm_rate.or(file.get("mlm_rate")?).unwrap_or(d.mlm_rate) };
        let mask = MaskPolicy {
            p_lg: flags.p_lg.or(file.get("p_lg")?).unwrap_or(d.p_lg),
            p_lui: flags.p_lui.or(file.get("p_lui")?).unwrap_or(d.p_lui),
            mlm_rate,
            mlm_split: MlmSplit {
                mask: flags.mlm_mask.or(file.get("mlm_mask")?).unwrap_or(d.mlm_split.mask),
                random: flags.mlm_random.or(file.get("mlm_random")?).unwrap_or(d.mlm_split.random),
                keep: flags.mlm_keep.or(file.get("mlm_keep")?).unwrap_or(d.mlm_split.keep),
            },
            seed,
            mask_excluded: !flags.protect_excluded && file.get_bool("mask_excluded")?.unwrap_or(d.mask_excluded),
        };
        mask.validate().map_err(|e| CliError::usage("config", e))?;

        Ok(PipelineConfig {
            inputs,
            output,
            lexicon,
            exclude: flags.exclude.or_else(|| file.get_list("exclude")),
            filter,
            mask,
            workers,
            wiki: flags.wiki || file.get_bool("wiki")?.unwrap_or(false),
            progress_every: flags.progress_every.or(file.get("progress_every")?).unwrap_or(10_000),
            quiet: flags.quiet || file.get_bool("quiet")?.unwrap_or(false),
        })
    }
}
