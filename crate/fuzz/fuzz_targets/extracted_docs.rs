#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::ingest::{split_extracted_docs, strip_markup_residue};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for doc in split_extracted_docs(text) {
        let stripped = strip_markup_residue(&doc.text);
        assert!(stripped.len() <= doc.text.len());
    }
});
