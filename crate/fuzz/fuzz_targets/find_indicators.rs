#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::{find_indicators, split_paragraphs, IndicatorLexicon};

fuzz_target!(|data: &[u8]| {
    let Ok(paragraphs) = split_paragraphs("fuzz", data) else { return };
    let lex = IndicatorLexicon::builtin();
    for p in &paragraphs {
        let mut end = 0;
        for m in find_indicators(p, &lex) {
            assert!(m.tokens.start >= end && m.tokens.end > m.tokens.start);
            end = m.tokens.end;
        }
        assert!(end <= p.tokens.len());
    }
});
