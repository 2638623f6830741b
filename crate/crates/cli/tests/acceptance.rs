//! Acceptance suite: one line per criterion, non-zero exit if a gate fails.
//!
//! Run with `cargo test -p logicorp-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use logicorp::lexicon::builtin_phrases;
use logicorp::loss::LcpBatch;
use logicorp::stats::Tally;
use logicorp::tokenize::{normalize, Tokenizer, WordTokenizer};
use logicorp::{
    find_indicators, idol_loss, lcp_loss, split_paragraphs, FilterPolicy, IndicatorCategory, IndicatorLexicon,
    LossConfig, MaskPolicy,
};
use logicorp_cli::build::{build_documents, SourceDoc};
use logicorp_cli::config::PipelineConfig;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

enum Outcome {
    Pass(String),
    Fail(String),
    Warn(String),
}

type Check = fn(&Path) -> Outcome;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logicorp"))
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

/// Every phrase at every position, longest wins, scanning resumes after it.
fn brute_force(tokens: &[String], lexicon: &IndicatorLexicon) -> Vec<(usize, usize, String)> {
    let phrases: Vec<Vec<&str>> = lexicon.entries().iter().map(|e| e.phrase.split(' ').collect()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let best = phrases
            .iter()
            .filter(|p| i + p.len() <= tokens.len() && tokens[i..i + p.len()].iter().zip(p.iter()).all(|(t, w)| t == w))
            .max_by_key(|p| p.len());
        match best {
            Some(p) => {
                out.push((i, i + p.len(), p.join(" ")));
                i += p.len();
            }
            None => i += 1,
        }
    }
    out
}

fn matching_correctness(_: &Path) -> Outcome {
    let lex = IndicatorLexicon::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let phrases: Vec<&str> = IndicatorCategory::LEXICAL.iter().flat_map(|&c| builtin_phrases(c).iter().copied()).collect();
    let filler = ["the", "notable", "Nothing", "butter", "of", "that", "in", "as", "a", "result", "only", "if",
        "even", ",", ".", "(", "x", "thusly", "Because", "NOT", "can\u{2019}t", "isn't", "rather", "than"];
    let mut mismatches = 0;
    let mut total_matches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..50);
        let mut words: Vec<String> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.35) {
                    phrases.choose(&mut rng).unwrap().to_string()
                } else {
                    filler.choose(&mut rng).unwrap().to_string()
                }
            })
            .collect();
        if rng.gen_bool(0.3) {
            words.iter_mut().for_each(|w| *w = w.to_uppercase());
        }
        let text = words.join(" ");
        let fast: Vec<(usize, usize, String)> = split_paragraphs("f", text.as_bytes())
            .unwrap()
            .first()
            .map(|p| find_indicators(p, &lex).into_iter().map(|m| (m.tokens.start, m.tokens.end, m.phrase.to_string())).collect())
            .unwrap_or_default();
        let tokens: Vec<String> = WordTokenizer.tokenize(&text).iter().map(|t| normalize(&t.text).into_owned()).collect();
        let slow = brute_force(&tokens, &lex);
        total_matches += slow.len();
        if fast != slow {
            mismatches += 1;
        }
    }
    let msg = format!("1000 fuzz texts, {total_matches} oracle matches, {mismatches} mismatches");
    if mismatches == 0 { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn table_fidelity(_: &Path) -> Outcome {
    let lex = IndicatorLexicon::builtin();
    let mut failures = Vec::new();
    let mut phrases = 0;
    for cat in IndicatorCategory::LEXICAL {
        for phrase in builtin_phrases(cat) {
            phrases += 1;
            let sentence = format!("Alpha {phrase} zeta.");
            let p = split_paragraphs("t", sentence.as_bytes()).unwrap().remove(0);
            let found = find_indicators(&p, &lex);
            if !found.iter().any(|m| &*m.phrase == *phrase && m.category == cat) {
                failures.push(format!("{cat}:{phrase}"));
            }
        }
    }
    let examples = [
        (IndicatorCategory::Pmi, "because", "The real world contains no political entity exercising literally total control over even one such aspect. This is because any system of control is inefficient, and, therefore, its degree of control is partial."),
        (IndicatorCategory::Cli, "result in", "In the United States, each bushel of corn produced might result in the loss of as much as two bushels of topsoil. Moreover, in the last 100 years, the topsoil in many states, which once was about fourteen inches thick, has been eroded to only six or eight inches."),
        (IndicatorCategory::Nti, "seldom", "A high degree of creativity and a high level of artistic skill are seldom combined in the creation of a work of art."),
        (IndicatorCategory::Ati, "on the contrary", "This advantage accruing to the sentinel does not mean that its watchful behavior is entirely self-interested. On the contrary, the sentinel's behavior is an example of animal behavior motivated at least in part by altruism."),
        (IndicatorCategory::Cni, "in addition", "A graduate degree in policymaking is necessary to serve in the presidential cabinet. In addition, everyone in the cabinet must pass a security clearance."),
    ];
    for (cat, phrase, text) in examples {
        let p = split_paragraphs("ex", text.as_bytes()).unwrap().remove(0);
        if !find_indicators(&p, &lex).iter().any(|m| &*m.phrase == phrase && m.category == cat) {
            failures.push(format!("example {cat}:{phrase}"));
        }
    }
    let msg = format!("{phrases} library phrases + 5 example sentences, failures: {failures:?}");
    if failures.is_empty() { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

const FILLER: &[&str] = &[
    "river", "stone", "garden", "window", "copper", "valley", "market", "lantern", "harbor", "meadow", "pencil",
    "castle", "forest", "winter", "signal", "engine", "bridge", "candle", "letter", "mirror", "orchard", "saddle",
];

fn construction_parameters(dir: &Path) -> Outcome {
    let lex = IndicatorLexicon::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let counted: Vec<&str> = IndicatorCategory::LEXICAL
        .iter()
        .flat_map(|&c| builtin_phrases(c).iter().copied())
        .filter(|p| !lex.is_excluded(p))
        .collect();

    // Short paragraphs, each carrying an indicator, must all be dropped.
    let mut short_kept = 0;
    let mut six_dropped = 0;
    for len in 1..=6usize {
        for _ in 0..200 {
            let mut words: Vec<&str> = (0..len - 1).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            words.insert(rng.gen_range(0..len), "because");
            let text = words.join(" ");
            let ps = split_paragraphs("s", text.as_bytes()).unwrap();
            let kept = logicorp::filter_paragraphs(ps, &lex, &FilterPolicy::default()).len();
            if len <= 5 {
                short_kept += kept;
            } else if kept == 0 {
                six_dropped += 1;
            }
        }
    }

    // Synthetic corpus with exactly 100,000 counted indicator occurrences.
    let mut docs = Vec::new();
    for d in 0..100 {
        let mut text = String::new();
        for _ in 0..500 {
            let mut words: Vec<&str> = (0..18).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            for _ in 0..2 {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, counted.choose(&mut rng).unwrap());
            }
            text.push_str(&words.join(" "));
            text.push_str(".\n\n");
        }
        docs.push(SourceDoc { source_id: format!("synthetic-{d}"), text });
    }
    let out = dir.join("synthetic.jsonl");
    let config = PipelineConfig {
        inputs: Vec::new(),
        output: out.clone(),
        lexicon: None,
        exclude: None,
        filter: FilterPolicy::default(),
        mask: MaskPolicy { seed: 2024, ..MaskPolicy::default() },
        workers: 4,
        wiki: false,
        progress_every: 0,
        quiet: true,
    };
    let summary = build_documents(&docs, &lex, &config, &out).unwrap();
    let report = logicorp::report(&out, 5.0).unwrap();
    let occurrences: u64 = IndicatorCategory::LEXICAL.iter().map(|&c| report.occurrences.get(c)).sum();
    let lg = report.rates.lgmask;
    let lui = report.rates.lui;
    let lg_rate = lg.rate.unwrap();
    let lui_rate = lui.rate.unwrap();
    let lg_sigma = (0.7f64 * 0.3 / lg.trials as f64).sqrt();
    let lui_sigma = (0.006f64 * 0.994 / lui.trials as f64).sqrt();
    let ok = short_kept == 0
        && six_dropped == 0
        && summary.records == 50_000
        && occurrences == 100_000
        && (lg_rate - 0.70).abs() <= 0.01
        && (lui_rate - 0.006).abs() <= 0.0006;
    let msg = format!(
        "short kept={short_kept}, 6-token dropped={six_dropped}; {occurrences} indicators: [LGMASK] rate {lg_rate:.5} \
         (|Δ|={:.5} ≤ 0.01, 3σ={:.5}); LUI rate {lui_rate:.6} over {} tokens (|Δ|={:.6} ≤ 0.0006, 3σ={:.6})",
        (lg_rate - 0.7).abs(),
        3.0 * lg_sigma,
        lui.trials,
        (lui_rate - 0.006).abs(),
        3.0 * lui_sigma
    );
    if ok { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn lcp_oracle(_: &Path) -> Outcome {
    let cfg = LossConfig::default();
    let mut uniform = LcpBatch::new();
    uniform.push_sample(&[vec![0.0; 6]], &[2]).unwrap();
    let u = lcp_loss(&uniform, &cfg).value;
    let uniform_err = (u - 6f64.ln()).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_shift: f64 = 0.0;
    for _ in 0..2000 {
        let logits: Vec<f64> = (0..6).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let gold = rng.gen_range(0..6u8);
        let shift = rng.gen_range(-500.0..500.0);
        let mut a = LcpBatch::new();
        a.push_sample(std::slice::from_ref(&logits), &[gold]).unwrap();
        let mut b = LcpBatch::new();
        b.push_sample(&[logits.iter().map(|x| x + shift).collect()], &[gold]).unwrap();
        worst_shift = worst_shift.max((lcp_loss(&a, &cfg).value - lcp_loss(&b, &cfg).value).abs());
    }

    let sample = vec![vec![1.5, -0.25, 0.75, 3.0, -2.0, 0.125], vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5]];
    let gold = [3u8, 0];
    let mut one = LcpBatch::new();
    one.push_sample(&sample, &gold).unwrap();
    let mut two = LcpBatch::new();
    two.push_sample(&sample, &gold).unwrap();
    two.push_sample(&sample, &gold).unwrap();
    let single = lcp_loss(&one, &cfg).value;
    let double = lcp_loss(&two, &cfg).value;

    let ok = uniform_err <= 1e-9 && worst_shift <= 1e-9 && double == 2.0 * single;
    let msg = format!(
        "uniform |loss−ln6|={uniform_err:.1e} ≤ 1e-9; max shift deviation {worst_shift:.1e} ≤ 1e-9; \
         two-sample sum {double} vs 2×{single} exact={}",
        double == 2.0 * single
    );
    if ok { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn idol_endpoints(_: &Path) -> Outcome {
    let at = |lambda: f64, lcp: f64, mlm: f64| idol_loss(lcp, mlm, &LossConfig { lambda, ..LossConfig::default() }).unwrap();
    let one = at(1.0, 2.5, 7.0);
    let zero = at(0.0, 2.5, 7.0);
    let mid = at(0.8, 2.0, 1.0);
    let ok = one == 2.5 && zero == 7.0 && (mid - 1.8).abs() <= 1e-12;
    let msg = format!("λ=1 → {one}, λ=0 → {zero}, λ=0.8 → {mid} (|Δ|={:.1e} ≤ 1e-12)", (mid - 1.8).abs());
    if ok { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn determinism(dir: &Path) -> Outcome {
    let mut hashes = Vec::new();
    for run in 0..2 {
        for workers in [1, 8] {
            let out = dir.join(format!("det-{run}-{workers}.jsonl"));
            let status = bin()
                .args(["build", "--seed", "42", "--quiet", "--workers", &workers.to_string(), "-o"])
                .arg(&out)
                .arg(fixture("corpus200.txt"))
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome::Fail(format!("build failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            hashes.push(sha256(&out));
        }
    }
    let distinct: std::collections::BTreeSet<_> = hashes.iter().collect();
    let msg = format!("4 builds (2 runs × workers 1, 8): {} distinct hash(es), {}", distinct.len(), &hashes[0][..16]);
    if distinct.len() == 1 { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn ablation_completeness(dir: &Path) -> Outcome {
    let lex = IndicatorLexicon::builtin();
    let mut notes = Vec::new();
    let mut ok = true;
    for remove in ["pmi,cli", "nti", "ati", "cni", "all"] {
        let once = dir.join(format!("abl-{remove}-1.jsonl"));
        let twice = dir.join(format!("abl-{remove}-2.jsonl"));
        for (input, output) in [(fixture("reasoning.jsonl"), &once), (once.clone(), &twice)] {
            let st = bin().args(["ablate", "--remove", remove, "-o"]).arg(output).arg(input).output().unwrap();
            if !st.status.success() {
                return Outcome::Fail(format!("ablate {remove}: {}", String::from_utf8_lossy(&st.stderr)));
            }
        }
        let spec = logicorp::AblationSpec::parse(remove, Default::default()).unwrap();
        let mut left = 0;
        for line in std::fs::read_to_string(&once).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let text = v["text"].as_str().unwrap();
            left += lex
                .match_tokens(&WordTokenizer.tokenize(text))
                .iter()
                .filter(|(_, e)| spec.removes(e.category))
                .count();
        }
        let idempotent = std::fs::read(&once).unwrap() == std::fs::read(&twice).unwrap();
        let max_passes = std::fs::read_to_string(fixture("reasoning.jsonl"))
            .unwrap()
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                logicorp::ablate_text(v["text"].as_str().unwrap(), &lex, &spec).passes
            })
            .max()
            .unwrap_or(0);
        ok &= left == 0 && idempotent && max_passes <= 3;
        notes.push(format!("{remove}: {left} left, idempotent={idempotent}, passes≤{max_passes}"));
    }
    let msg = notes.join("; ");
    if ok { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn throughput(dir: &Path) -> Outcome {
    let base = std::fs::read_to_string(fixture("corpus200.txt")).unwrap();
    let target = 100 * 1024 * 1024;
    let input = dir.join("scaled.txt");
    {
        let mut text = String::with_capacity(target + base.len());
        while text.len() < target {
            text.push_str(&base);
            text.push('\n');
        }
        std::fs::write(&input, text).unwrap();
    }
    let bytes = std::fs::metadata(&input).unwrap().len() as f64;
    let out = dir.join("scaled.jsonl");
    let start = Instant::now();
    let st = bin()
        .args(["build", "--seed", "42", "--quiet", "--workers", "1", "-o"])
        .arg(&out)
        .arg(&input)
        .output()
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    std::fs::remove_file(&input).ok();
    std::fs::remove_file(&out).ok();
    if !st.status.success() {
        return Outcome::Fail(format!("build failed: {}", String::from_utf8_lossy(&st.stderr)));
    }
    let mbps = bytes / 1e6 / secs;
    let msg = format!("{:.0} MB in {secs:.1}s on 1 worker = {mbps:.1} MB/s (target ≥ 10, soft)", bytes / 1e6);
    if mbps >= 10.0 { Outcome::Pass(msg) } else { Outcome::Warn(msg) }
}

fn streaming_equivalence(dir: &Path) -> Outcome {
    let out = dir.join("stream.jsonl");
    let st = bin()
        .args(["build", "--seed", "7", "--quiet", "-o"])
        .arg(&out)
        .arg(fixture("corpus200.txt"))
        .output()
        .unwrap();
    assert!(st.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut sequential = Tally::default();
    sequential.add_lines(text.as_bytes(), 1).unwrap();
    let expected = sequential.finish(5.0).unwrap();
    let mut all_equal = true;
    for shards in 1..=9 {
        let size = lines.len().div_ceil(shards);
        let mut merged = Tally::default();
        for (i, chunk) in lines.chunks(size).enumerate() {
            let mut t = Tally::default();
            t.add_lines(chunk.join("\n").as_bytes(), i * size + 1).unwrap();
            merged.merge(&t);
        }
        all_equal &= merged == sequential && merged.finish(5.0).unwrap() == expected;
    }
    let msg = format!(
        "{} records; merged shard reports (1..=9 shards) equal the sequential report: {all_equal}; \
         full-scale sample count not reproduced at desk scale",
        expected.samples
    );
    if all_equal { Outcome::Pass(msg) } else { Outcome::Fail(msg) }
}

fn main() {
    let checks: &[(&str, Check)] = &[
        ("matching correctness", matching_correctness),
        ("indicator library fidelity", table_fidelity),
        ("construction parameters", construction_parameters),
        ("category loss oracle", lcp_oracle),
        ("combined loss endpoints", idol_endpoints),
        ("build determinism", determinism),
        ("ablation completeness", ablation_completeness),
        ("throughput (soft)", throughput),
        ("streaming equivalence (scale substitute)", streaming_equivalence),
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut failed = 0;
    for (name, check) in checks {
        match check(dir.path()) {
            Outcome::Pass(msg) => println!("[PASS] {name}: {msg}"),
            Outcome::Warn(msg) => println!("[WARN] {name}: {msg}"),
            Outcome::Fail(msg) => {
                failed += 1;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} criteria, {failed} failed", checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
