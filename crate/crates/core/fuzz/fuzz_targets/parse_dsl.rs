#![no_main]
use libfuzzer_sys::fuzz_target;
use stackcat::dsl;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(doc) = dsl::parse(text) {
            // printing then parsing again must succeed
            let printed = dsl::print(&doc);
            dsl::parse(&printed).expect("printed documents parse");
        }
    }
});
