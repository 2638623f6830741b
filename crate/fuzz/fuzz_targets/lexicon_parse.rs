#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::IndicatorLexicon;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lex) = IndicatorLexicon::parse(text, "fuzz") {
        let again = IndicatorLexicon::parse(&lex.dump(), "fuzz").expect("dump must parse");
        assert_eq!(lex.len(), again.len());
    }
});
