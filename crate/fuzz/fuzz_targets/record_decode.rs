#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::record::{parse_records, to_line};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(samples) = parse_records(text) {
        for s in samples {
            let line = to_line(&s);
            let back = logicorp::record::parse_line(&line, 1).expect("emitted record must parse");
            assert_eq!(back, s);
        }
    }
});
