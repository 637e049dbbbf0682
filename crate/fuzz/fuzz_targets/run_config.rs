#![no_main]

use libfuzzer_sys::fuzz_target;
use morsebott_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = RunConfig::parse(text) {
        // A valid config serializes back to a valid config.
        let again = serde_json::to_string(&c).expect("config serializes");
        RunConfig::parse(&again).expect("serialized config parses");
        let _ = c.landscape();
    }
});
