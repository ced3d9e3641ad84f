#![no_main]

use libfuzzer_sys::fuzz_target;
use mg_edge_core::config::{parse_config, to_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        assert_eq!(parse_config(&to_text(&config)).expect("round trip"), config);
    }
});
