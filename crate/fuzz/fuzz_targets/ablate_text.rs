#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::ablate::MAX_PASSES;
use logicorp::{ablate_text, AblationMode, AblationSpec, IndicatorLexicon, WordTokenizer, Tokenizer};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let lex = IndicatorLexicon::builtin();
    let spec = AblationSpec::all(AblationMode::DeleteAndRepair);
    let out = ablate_text(text, &lex, &spec);
    if out.passes >= MAX_PASSES {
        return;
    }
    let left = lex.match_tokens(&WordTokenizer.tokenize(&out.text));
    assert!(left.is_empty(), "{:?} left in {:?}", left, out.text);
});
