#![no_main]

use libfuzzer_sys::fuzz_target;
use nsw_core::io::{allocation_to_json, parse_allocation};

// first two bytes pick the instance dimensions
fuzz_target!(|data: &[u8]| {
    let [n, m, rest @ ..] = data else { return };
    let (n, m) = (usize::from(*n % 8) + 1, usize::from(*m % 16) + 1);
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(alloc) = parse_allocation(text, n, m) {
        assert_eq!(alloc.owners().len(), m);
        let back = parse_allocation(&allocation_to_json(&alloc), n, m).expect("own output parses");
        assert_eq!(back, alloc);
    }
});
