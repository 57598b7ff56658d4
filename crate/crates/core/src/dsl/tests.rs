use super::*;
use crate::corpus::{arrow_site, span_site, twisted_z2};
use crate::indexed::validate_indexed;
use crate::site::Sieve;

fn lim() -> Limits {
    Limits::default()
}

const ARROW: &str = "poset C { a <= b; }\ncoverage on C { b: [a_b]; }\n";

fn round_trip(text: &str) {
    let doc = load_text(text, &lim()).unwrap();
    let once = canonical_text(&doc);
    let again = load_text(&once, &lim()).unwrap();
    assert_eq!(canonical_text(&again), once);
    for ((n1, c1), (n2, c2)) in doc.categories.iter().zip(&again.categories) {
        assert_eq!(n1, n2);
        assert_eq!(c1, c2);
    }
    for (s1, s2) in doc.sites.iter().zip(&again.sites) {
        assert_eq!(s1.topology.covers, s2.topology.covers);
    }
}

#[test]
fn arrow_corpus_elaborates_to_the_arrow_site() {
    let doc = load_text(ARROW, &lim()).unwrap();
    let j = &doc.site("C").unwrap().topology;
    assert_eq!(j, &arrow_site());
}

#[test]
fn poset_sugar_gives_the_arrow_category() {
    let doc = load_text("poset P { a <= b; }", &lim()).unwrap();
    let c = doc.category("P").unwrap();
    assert_eq!(c.num_objects(), 2);
    assert_eq!(c.num_morphisms(), 3);
    assert_eq!(c.hom(0, 1).len(), 1);
    assert!(c.hom(1, 0).is_empty());
}

#[test]
fn unknown_morphism_in_coverage_is_positioned() {
    let e = load_text("poset C { a <= b; }\ncoverage on C { b: [nope]; }", &lim()).unwrap_err();
    assert_eq!(e.pos, Pos { line: 2, col: 21 });
    assert!(e.message.contains("nope"));
}

#[test]
fn span_site_covers() {
    let text = "category S {\n  objects: P, Q, X;\n  morphisms: j_p: P -> X, j_q: Q -> X;\n}\ncoverage on S { X: [j_p, j_q]; }\n";
    let doc = load_text(text, &lim()).unwrap();
    let j = &doc.site("S").unwrap().topology;
    let c = &j.base;
    let x = c.find_object("X").unwrap();
    assert_eq!(j.covers(x).len(), 2);
    assert!(j.covers(x).contains(&Sieve::maximal(c, x)));
    assert_eq!(j.covers, span_site().covers);
}

#[test]
fn non_functorial_strict_restriction_is_rejected() {
    // two composable arrows whose restrictions compose to the wrong functor
    let text = "poset C { a <= b <= c; }\ncategory K = discrete(p, q);\n\
        functor swap: K -> K { objects: p -> q, q -> p; }\n\
        functor one: K -> K { objects: p -> p, q -> q; }\n\
        indexed D over C { fiber a = K; fiber b = K; fiber c = K; restrict a_b = swap; restrict b_c = swap; restrict a_c = swap; strict; }";
    let e = load_text(text, &lim()).unwrap_err();
    assert!(e.message.contains("not an indexed category"), "{e}");
}

#[test]
fn composite_restrictions_are_derived() {
    let text = "poset C { a <= b <= c; }\ncategory K = discrete(p, q);\n\
        functor swap: K -> K { objects: p -> q, q -> p; }\n\
        indexed D over C { fiber a = K; fiber b = K; fiber c = K; restrict a_b = swap; restrict b_c = swap; strict; }";
    let doc = load_text(text, &lim()).unwrap();
    let d = &doc.indexed("D").unwrap().indexed;
    let c = &d.base;
    let ac = c.find_morphism("a_c").unwrap();
    assert_eq!(d.restrict[ac].obj, vec![0, 1]);
    assert!(validate_indexed(d).is_empty());
}

#[test]
fn presheaf_embeds() {
    let doc = load_text(&format!("{ARROW}presheaf F over C {{ a = {{x0, x1}}; b = {{y}}; a_b: y -> x0; }}"), &lim()).unwrap();
    let e = doc.indexed("F").unwrap();
    assert!(e.presheaf.is_some());
    assert_eq!(e.indexed.fibers[0].num_objects(), 2);
}

#[test]
fn closure_cap_is_reported_as_a_cap() {
    let e = load_text("category M { objects: s; morphisms: t: s -> s; }", &lim()).unwrap_err();
    assert!(e.cap);
}

#[test]
fn canonical_form_round_trips() {
    round_trip(ARROW);
    round_trip(&format!("{ARROW}presheaf F over C {{ a = {{x0, x1}}; b = {{y}}; a_b: y -> x0; }}"));
    round_trip("category Z = cyclic(3);\ncategory K { objects: s; morphisms: t: s -> s; compose: t . t = id_s; }");
}

#[test]
fn twisted_indexed_category_round_trips_through_export() {
    let z = twisted_z2();
    let mut doc = Document::default();
    doc.categories.push(("Z2".into(), z.base.clone()));
    doc.indexed.push(IndexedEntry { name: "T".into(), base: "Z2".into(), indexed: z.clone(), presheaf: None });
    let text = canonical_text(&doc);
    let back = load_text(&text, &lim()).unwrap();
    let t = &back.indexed("T").unwrap().indexed;
    assert_eq!(t.compositor, z.compositor);
    assert_eq!(t.unitor, z.unitor);
    assert_eq!(canonical_text(&back), text);
}

#[test]
fn json_envelope_round_trips_and_detects_tampering() {
    let doc = parse(ARROW).unwrap();
    let json = encode_json(&export(&elaborate(&doc, &lim()).unwrap()));
    let back = decode_json(&json).unwrap();
    assert_eq!(print(&back), canonical_text(&load_text(ARROW, &lim()).unwrap()));
    let tampered = json.replacen("\"b\"", "\"c\"", 1);
    assert!(decode_json(&tampered).is_err());
}
