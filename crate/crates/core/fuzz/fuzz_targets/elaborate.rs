#![no_main]
use libfuzzer_sys::fuzz_target;
use stackcat::{dsl, Limits};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let limits = Limits { max_homset: 16, max_sieves_per_object: 256, max_descent: 1_000, max_closure: 200 };
    if let Ok(doc) = dsl::load_text(text, &limits) {
        let canonical = dsl::canonical_text(&doc);
        let again = dsl::load_text(&canonical, &limits).expect("canonical text elaborates");
        assert_eq!(dsl::canonical_text(&again), canonical);
    }
});
