#![no_main]

use libfuzzer_sys::fuzz_target;
use logicorp_cli::ConfigFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = ConfigFile::parse(text) {
        let _ = file.get::<f64>("p_lg");
        let _ = file.get_bool("quiet");
        let _ = file.get_list("exclude");
    }
});
