#![no_main]

use libfuzzer_sys::fuzz_target;
use morsebott_cli::CoeffFlag;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(flag) = text.parse::<CoeffFlag>() {
        assert_eq!(flag.to_string().parse::<CoeffFlag>().ok(), Some(flag));
    }
});
