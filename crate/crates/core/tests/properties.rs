use std::sync::Arc;

use proptest::prelude::*;
use stackcat::corpus::{random_indexed, random_presheaf, random_site, rng};
use stackcat::dsl::{self, Document, IndexedEntry, SiteEntry};
use stackcat::indexed::embed_discrete;
use stackcat::site::saturate;
use stackcat::Limits;

fn document(seed: u64) -> Document {
    let mut r = rng(seed);
    let j = random_site(&mut r);
    let c = j.base.clone();
    let mut doc = Document::default();
    doc.categories.push(("C".into(), c.clone()));
    doc.sites.push(SiteEntry { category: "C".into(), topology: j, saturated: true });
    let p = random_presheaf(&mut r, &c, 2);
    doc.indexed.push(IndexedEntry { name: "F".into(), base: "C".into(), indexed: Arc::new(embed_discrete(&p)), presheaf: Some(p) });
    doc.indexed.push(IndexedEntry { name: "D".into(), base: "C".into(), indexed: random_indexed(&mut r, &c), presheaf: None });
    doc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_text_is_a_fixed_point(seed in 0u64..10_000) {
        let text = dsl::canonical_text(&document(seed));
        let back = dsl::load_text(&text, &Limits::default()).map_err(|d| TestCaseError::fail(d.to_string()))?;
        prop_assert_eq!(dsl::canonical_text(&back), text);
    }

    #[test]
    fn elaboration_recovers_the_structures(seed in 0u64..10_000) {
        let doc = document(seed);
        let back = dsl::load_text(&dsl::canonical_text(&doc), &Limits::default()).unwrap();
        prop_assert_eq!(&*back.categories[0].1, &*doc.categories[0].1);
        prop_assert_eq!(&back.sites[0].topology.covers, &doc.sites[0].topology.covers);
        let (d, e) = (&doc.indexed("D").unwrap().indexed, &back.indexed("D").unwrap().indexed);
        prop_assert_eq!(&d.compositor, &e.compositor);
        prop_assert_eq!(&d.unitor, &e.unitor);
        prop_assert_eq!(&doc.indexed("F").unwrap().presheaf, &back.indexed("F").unwrap().presheaf);
    }

    #[test]
    fn json_envelope_round_trips(seed in 0u64..10_000) {
        let doc = document(seed);
        let json = dsl::encode_json(&dsl::export(&doc));
        let back = dsl::decode_json(&json).unwrap();
        prop_assert_eq!(dsl::print(&back), dsl::canonical_text(&doc));
    }

    #[test]
    fn saturation_is_idempotent(seed in 0u64..10_000) {
        let j = random_site(&mut rng(seed));
        let again = saturate(&j.base, &j.as_coverage(), &Limits::default()).unwrap();
        prop_assert_eq!(again.covers, j.covers);
    }

    #[test]
    fn parser_never_panics(text in "[a-z{}:;,<=>\\[\\]()\\-. \n\"*_]{0,80}") {
        if let Ok(doc) = dsl::parse(&text) {
            let _ = dsl::elaborate(&doc, &Limits::default());
        }
    }
}
