#![no_main]

use libfuzzer_sys::fuzz_target;
use mg_edge_core::report::{parse_results, write_results};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_results(text) {
        let _ = write_results(&table.metadata, &table.rows);
    }
});
