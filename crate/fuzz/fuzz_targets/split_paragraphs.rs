#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::split_paragraphs;

fuzz_target!(|data: &[u8]| {
    let Ok(paragraphs) = split_paragraphs("fuzz", data) else { return };
    let text = std::str::from_utf8(data).unwrap();
    for p in paragraphs {
        assert!(!p.tokens.is_empty());
        let mut last = 0;
        for t in &p.tokens {
            assert!(t.bytes.start >= last);
            assert_eq!(&text[t.bytes.clone()], t.text);
            last = t.bytes.end;
        }
    }
});
