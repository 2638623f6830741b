#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::{lcp_loss, LcpBatch, LossConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(batch) = LcpBatch::parse_jsonl(text) {
        let loss = lcp_loss(&batch, &LossConfig::default());
        assert!(loss.value >= 0.0 || loss.value.is_nan());
    }
});
