#![no_main]

use std::sync::OnceLock;

use cflab::io::{parse_sample, parse_scheme};
use cflab::scheme::CFScheme;
use libfuzzer_sys::fuzz_target;

fn scheme() -> &'static CFScheme {
    static S: OnceLock<CFScheme> = OnceLock::new();
    S.get_or_init(|| parse_scheme(include_str!("../s1.json")).expect("seed scheme").scheme)
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_sample(scheme(), text) {
        let stored = serde_json::to_string(&x).expect("serializable");
        assert_eq!(parse_sample(scheme(), &stored).expect("stored samples load"), x);
    }
});
