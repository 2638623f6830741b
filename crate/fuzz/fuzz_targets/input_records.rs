#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp::ingest::parse_records;

fuzz_target!(|data: &[u8]| {
    let _ = parse_records("fuzz", data);
});
