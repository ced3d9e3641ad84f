#![no_main]

use libfuzzer_sys::fuzz_target;
use mg_edge_core::PolicySpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<PolicySpec>() {
        let again: PolicySpec = spec.to_string().parse().expect("canonical form parses");
        assert_eq!(again, spec);
    }
});
