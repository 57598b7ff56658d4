#![no_main]
use libfuzzer_sys::fuzz_target;
use stackcat::dsl;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = dsl::decode_json(text);
    }
});
