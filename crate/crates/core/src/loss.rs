//! Forward values of the category-prediction loss and the combined
//! pre-training loss.
//!
//! The category loss sums, over samples, the mean cross-entropy of that
//! sample's `[LGMASK]` predictions. Samples without any `[LGMASK]`
//! contribute zero. The combined loss is `λ·lcp + (1−λ)·mlm`.

use serde::{Deserialize, Serialize};

use crate::category::IndicatorCategory;

pub const NUM_CATEGORIES: usize = 6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LossError {
    #[error("sample {sample}, mask {mask}: non-finite logit {value}")]
    NonFinite { sample: usize, mask: usize, value: f64 },
    #[error("sample {sample}, mask {mask}: gold code {code} outside 0..=5")]
    BadGold { sample: usize, mask: usize, code: u8 },
    #[error("sample {sample}: {logits} logit vectors but {gold} gold labels")]
    Shape { sample: usize, logits: usize, gold: usize },
    #[error("sample {sample}, mask {mask}: expected 6 logits, got {len}")]
    Width { sample: usize, mask: usize, len: usize },
    #[error("lambda must lie in [0, 1], got {0}")]
    Lambda(f64),
    #[error("{name} loss must be finite and non-negative, got {value}")]
    Component { name: &'static str, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Sum over samples, as written in the loss definition.
    #[default]
    PaperSum,
    /// The summed loss divided by the number of samples in the batch.
    BatchMean,
}

impl std::str::FromStr for Reduction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-sum" | "sum" => Ok(Reduction::PaperSum),
            "batch-mean" | "mean" => Ok(Reduction::BatchMean),
            other => Err(format!("unknown reduction `{other}` (expected paper-sum or batch-mean)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub lambda: f64,
    pub reduction: Reduction,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { lambda: 0.8, reduction: Reduction::PaperSum }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), LossError> {
        if (0.0..=1.0).contains(&self.lambda) {
            Ok(())
        } else {
            Err(LossError::Lambda(self.lambda))
        }
    }
}

/// One `[LGMASK]` prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskPrediction {
    pub logits: [f64; NUM_CATEGORIES],
    pub gold: IndicatorCategory,
}

/// Per-sample `[LGMASK]` predictions with gold categories. Only valid
/// (finite) inputs can be added.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LcpBatch {
    samples: Vec<Vec<MaskPrediction>>,
}

impl LcpBatch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a sample from parallel logit and gold-code lists.
    pub fn push_sample(&mut self, logits: &[Vec<f64>], gold: &[u8]) -> Result<(), LossError> {
        let sample = self.samples.len();
        if logits.len() != gold.len() {
            return Err(LossError::Shape { sample, logits: logits.len(), gold: gold.len() });
        }
        let mut masks = Vec::with_capacity(gold.len());
        for (mask, (row, &code)) in logits.iter().zip(gold).enumerate() {
            let row: [f64; NUM_CATEGORIES] = row
                .as_slice()
                .try_into()
                .map_err(|_| LossError::Width { sample, mask, len: row.len() })?;
            if let Some(&value) = row.iter().find(|v| !v.is_finite()) {
                return Err(LossError::NonFinite { sample, mask, value });
            }
            let gold = IndicatorCategory::from_code(code).ok_or(LossError::BadGold { sample, mask, code })?;
            masks.push(MaskPrediction { logits: row, gold });
        }
        self.samples.push(masks);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<MaskPrediction>] {
        &self.samples
    }

    pub fn mask_count(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// Parse `{"logits": [[6 floats]...], "gold": [codes...]}` lines.
    pub fn parse_jsonl(text: &str) -> Result<Self, LossError> {
        #[derive(Deserialize)]
        struct Line {
            logits: Vec<Vec<f64>>,
            gold: Vec<u8>,
        }
        let mut batch = LcpBatch::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(raw).map_err(|e| LossError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            batch.push_sample(&line.logits, &line.gold).map_err(|e| LossError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(batch)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if !t.is_finite() {
            // Overflow: the carry would turn into inf - inf.
            self.sum = t;
            self.carry = 0.0;
            return;
        }
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if !self.sum.is_finite() {
            return self.sum;
        }
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// `-ln softmax(logits)[gold]`, stable for any finite logits. Saturates to
/// `+inf` when the true value exceeds `f64::MAX`.
pub fn cross_entropy(logits: &[f64; NUM_CATEGORIES], gold: usize) -> f64 {
    let g = logits[gold];
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if g >= max {
        // ln(1 + Σ_{k≠g} e^{l_k − l_g}) keeps full relative precision near 0.
        let rest: CompensatedSum = logits
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != gold)
            .map(|(_, &l)| (l - g).exp())
            .collect();
        rest.value().ln_1p()
    } else {
        let sum: CompensatedSum = logits.iter().map(|&l| (l - max).exp()).collect();
        max - g + sum.value().ln()
    }
}

/// Result of [`lcp_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcpLoss {
    pub value: f64,
    /// Set when the batch had no samples; `value` is then 0.
    pub empty_batch: bool,
}

pub fn lcp_loss(batch: &LcpBatch, config: &LossConfig) -> LcpLoss {
    if batch.is_empty() {
        return LcpLoss { value: 0.0, empty_batch: true };
    }
    let mut total = CompensatedSum::default();
    for masks in batch.samples() {
        if masks.is_empty() {
            continue;
        }
        let inner: CompensatedSum = masks
            .iter()
            .map(|m| cross_entropy(&m.logits, m.gold.index()))
            .collect();
        total.add(inner.value() / masks.len() as f64);
    }
    let value = match config.reduction {
        Reduction::PaperSum => total.value(),
        Reduction::BatchMean => total.value() / batch.len() as f64,
    };
    LcpLoss { value, empty_batch: false }
}

pub fn idol_loss(lcp: f64, mlm: f64, config: &LossConfig) -> Result<f64, LossError> {
    config.validate()?;
    for (name, value) in [("lcp", lcp), ("mlm", mlm)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(LossError::Component { name, value });
        }
    }
    Ok(config.lambda * lcp + (1.0 - config.lambda) * mlm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(samples: &[(&[[f64; 6]], &[u8])]) -> LcpBatch {
        let mut b = LcpBatch::new();
        for (logits, gold) in samples {
            let rows: Vec<Vec<f64>> = logits.iter().map(|r| r.to_vec()).collect();
            b.push_sample(&rows, gold).unwrap();
        }
        b
    }

    #[test]
    fn uniform_logits_give_ln6() {
        let b = batch(&[(&[[0.0; 6], [0.0; 6]], &[0, 3])]);
        let l = lcp_loss(&b, &LossConfig::default());
        assert!((l.value - 6f64.ln()).abs() < 1e-12);
        assert!((l.value - 1.791759).abs() < 1e-6);
        assert!(!l.empty_batch);
    }

    #[test]
    fn saturated_correct_is_near_zero() {
        let mut row = [0.0; 6];
        row[2] = 1000.0;
        let b = batch(&[(&[row], &[2])]);
        assert!(lcp_loss(&b, &LossConfig::default()).value < 1e-6);
    }

    #[test]
    fn paper_sum_doubles_for_identical_samples() {
        let rows = [[0.3, -1.2, 2.0, 0.0, 0.5, 1.1]];
        let one = lcp_loss(&batch(&[(&rows, &[4])]), &LossConfig::default()).value;
        let two = lcp_loss(&batch(&[(&rows, &[4]), (&rows, &[4])]), &LossConfig::default()).value;
        assert_eq!(two, 2.0 * one);
        let mean = LossConfig { reduction: Reduction::BatchMean, ..LossConfig::default() };
        assert_eq!(lcp_loss(&batch(&[(&rows, &[4]), (&rows, &[4])]), &mean).value, one);
    }

    #[test]
    fn empty_samples_contribute_zero() {
        let rows = [[0.0; 6]];
        let b = batch(&[(&rows, &[1]), (&[], &[])]);
        assert!((lcp_loss(&b, &LossConfig::default()).value - 6f64.ln()).abs() < 1e-12);
        let empty = lcp_loss(&LcpBatch::new(), &LossConfig::default());
        assert_eq!(empty.value, 0.0);
        assert!(empty.empty_batch);
    }

    #[test]
    fn invalid_inputs() {
        let mut b = LcpBatch::new();
        assert!(matches!(b.push_sample(&[vec![f64::NAN; 6]], &[0]), Err(LossError::NonFinite { .. })));
        assert!(matches!(b.push_sample(&[vec![0.0; 5]], &[0]), Err(LossError::Width { .. })));
        assert!(matches!(b.push_sample(&[vec![0.0; 6]], &[6]), Err(LossError::BadGold { .. })));
        assert!(matches!(b.push_sample(&[vec![0.0; 6]], &[]), Err(LossError::Shape { .. })));
        assert!(b.is_empty());
    }

    #[test]
    fn idol_combination() {
        let cfg = |lambda| LossConfig { lambda, ..LossConfig::default() };
        assert_eq!(idol_loss(2.5, 7.0, &cfg(1.0)).unwrap(), 2.5);
        assert_eq!(idol_loss(2.5, 7.0, &cfg(0.0)).unwrap(), 7.0);
        assert!((idol_loss(2.0, 1.0, &cfg(0.8)).unwrap() - 1.8).abs() < 1e-12);
        assert_eq!(idol_loss(1.0, 1.0, &cfg(1.5)), Err(LossError::Lambda(1.5)));
        assert!(idol_loss(f64::NAN, 1.0, &cfg(0.5)).is_err());
        assert!(idol_loss(-1.0, 1.0, &cfg(0.5)).is_err());
    }

    #[test]
    fn parse_logits_file() {
        let text = "{\"logits\": [[0,0,0,0,0,0]], \"gold\": [1]}\n\n{\"logits\": [], \"gold\": []}\n";
        let b = LcpBatch::parse_jsonl(text).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.mask_count(), 1);
        let err = LcpBatch::parse_jsonl("{\"logits\": [[0,0]], \"gold\": [1]}").unwrap_err();
        assert!(matches!(err, LossError::Parse { line: 1, .. }));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn overflow_saturates_instead_of_nan() {
        let s: CompensatedSum = [f64::MAX, f64::MAX, 1.0].into_iter().collect();
        assert_eq!(s.value(), f64::INFINITY);
        let mut batch = LcpBatch::new();
        batch.push_sample(&[vec![1e308, -1e308, 0.0, 0.0, 0.0, 0.0], vec![0.0; 6]], &[1, 0]).unwrap();
        assert_eq!(lcp_loss(&batch, &LossConfig::default()).value, f64::INFINITY);
    }
}
