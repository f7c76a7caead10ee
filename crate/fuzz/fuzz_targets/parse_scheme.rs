#![no_main]

use cflab::io::{parse_scheme, scheme_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(loaded) = parse_scheme(text) {
        let again = parse_scheme(&scheme_to_string(&loaded.scheme)).expect("stored schemes load");
        assert_eq!(again.scheme, loaded.scheme);
    }
});
