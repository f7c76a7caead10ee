#![no_main]

use std::sync::OnceLock;

use cflab::cfspace::measure;
use cflab::io::{parse_compact_open, parse_scheme};
use cflab::scheme::CFScheme;
use libfuzzer_sys::fuzz_target;

fn scheme() -> &'static CFScheme {
    static S: OnceLock<CFScheme> = OnceLock::new();
    S.get_or_init(|| parse_scheme(include_str!("../s1.json")).expect("seed scheme").scheme)
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_compact_open(scheme(), text) {
        let _ = measure(scheme(), &a);
    }
});
