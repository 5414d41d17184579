#![no_main]

use libfuzzer_sys::fuzz_target;
use nsw_core::io::parse_instance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_instance(text) {
        // canonical output must parse back to the same document
        let canonical = doc.to_json();
        let again = parse_instance(&canonical).expect("canonical form parses");
        assert_eq!(again, doc);
        assert_eq!(again.to_json(), canonical);
    }
});
