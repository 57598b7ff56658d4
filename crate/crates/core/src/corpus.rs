//! Named sites and seeded random instances used by the test suites and the
//! CLI.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fibadj::{fiberwise_grothendieck, is_indexed_fibration, IndexedFibration};
use crate::fincat::FinCat;
use crate::groth::grothendieck;
use crate::indexed::{embed_discrete, product_indexed, DiscretePresheaf, IndexedCat, IndexedFun};
use crate::oracle::embed_map;
use crate::site::{saturate, CoveringFamily, Topology};
use crate::Limits;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn site(c: FinCat, families: &[(&str, &[&str])]) -> Topology {
    let c = Arc::new(c);
    let coverage: Vec<CoveringFamily> = families
        .iter()
        .map(|(apex, arrows)| CoveringFamily {
            apex: c.find_object(apex).expect("apex"),
            arrows: arrows.iter().map(|m| c.find_morphism(m).expect("arrow")).collect(),
        })
        .collect();
    saturate(&c, &coverage, &Limits::default()).expect("corpus site")
}

pub fn terminal_site() -> Topology {
    Topology::trivial(&Arc::new(FinCat::terminal()))
}

/// `a → b` with `b` covered by `{a → b}`.
pub fn arrow_site() -> Topology {
    site(FinCat::preorder(&["a", "b"], |i, j| i <= j), &[("b", &["a_b"])])
}

/// `P → X ← Q` with `X` covered by both legs.
pub fn span_site() -> Topology {
    let morphisms = vec![
        ("id_P".to_string(), 0, 0),
        ("id_Q".to_string(), 1, 1),
        ("id_X".to_string(), 2, 2),
        ("j_p".to_string(), 0, 2),
        ("j_q".to_string(), 1, 2),
    ];
    let c = FinCat::build(vec!["P".into(), "Q".into(), "X".into()], morphisms, vec![0, 1, 2], |g, f| {
        Ok(if g <= 2 { f } else { g })
    })
    .expect("span");
    site(c, &[("X", &["j_p", "j_q"])])
}

/// Three opens `u, v, w` covering `x`, with their pairwise and triple
/// intersections, ordered by inclusion.
pub fn three_patch_site() -> Topology {
    let names = ["uvw", "uv", "uw", "vw", "u", "v", "w", "x"];
    let sets: [&str; 8] = ["uvw", "uv", "uw", "vw", "u", "v", "w", ""];
    // i ≤ j iff the open i is contained in j: more letters means smaller, "" is everything
    let le = |i: usize, j: usize| sets[j].is_empty() || sets[j].chars().all(|ch| sets[i].contains(ch));
    site(FinCat::preorder(&names, le), &[("x", &["u_x", "v_x", "w_x"])])
}

pub fn named_sites() -> Vec<(&'static str, Topology)> {
    vec![
        ("terminal", terminal_site()),
        ("arrow", arrow_site()),
        ("span", span_site()),
        ("three-patch", three_patch_site()),
    ]
}

/// `Z/2` acting on itself with the compositor at `(g, g)` given by `g`.
pub fn twisted_z2() -> Arc<IndexedCat> {
    let z2 = Arc::new(FinCat::cyclic_group(2));
    let mut d = IndexedCat::constant(&z2, &z2);
    d.compositor.insert((1, 1), vec![1]);
    Arc::new(d)
}

fn random_preorder(rng: &mut impl Rng, n: usize) -> FinCat {
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
        for cell in row.iter_mut().skip(i + 1) {
            *cell = rng.gen_bool(0.5);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
    FinCat::preorder(&names, |i, j| rel[i][j])
}

/// A random preorder on one to four objects, the span, or `Z/2`, with a random
/// coverage, saturated.
pub fn random_site(rng: &mut impl Rng) -> Topology {
    let c = if rng.gen_bool(0.15) {
        span_site().base.as_ref().clone()
    } else if rng.gen_bool(0.08) {
        FinCat::cyclic_group(2)
    } else {
        let n = rng.gen_range(1..=4);
        random_preorder(rng, n)
    };
    let c = Arc::new(c);
    let mut coverage = Vec::new();
    for x in c.objects() {
        let incoming: Vec<_> = c.incoming(x).iter().copied().filter(|&f| !c.is_identity(f)).collect();
        for _ in 0..rng.gen_range(0..=2) {
            if incoming.is_empty() {
                if rng.gen_bool(0.05) {
                    coverage.push(CoveringFamily { apex: x, arrows: vec![] });
                }
                continue;
            }
            let arrows: Vec<_> = incoming.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            if !arrows.is_empty() {
                coverage.push(CoveringFamily { apex: x, arrows });
            }
        }
    }
    saturate(&c, &coverage, &Limits::default()).expect("random site within caps")
}

/// A random functorial action found by rejection with at most `max_size`
/// elements per value, falling back to a coproduct of representables.
pub fn random_presheaf(rng: &mut impl Rng, base: &Arc<FinCat>, max_size: usize) -> DiscretePresheaf {
    let c = &**base;
    for _ in 0..50 {
        let sizes: Vec<usize> = c.objects().map(|_| rng.gen_range(1..=max_size.max(1))).collect();
        let mut actions: Vec<Vec<usize>> = Vec::with_capacity(c.num_morphisms());
        for y in c.morphisms() {
            let (src, tgt) = (sizes[c.cod(y)], sizes[c.dom(y)]);
            if c.is_identity(y) {
                actions.push((0..src).collect());
            } else if c.dom(y) == c.cod(y) {
                let mut perm: Vec<usize> = (0..src).collect();
                perm.shuffle(rng);
                actions.push(perm);
            } else {
                actions.push((0..src).map(|_| rng.gen_range(0..tgt)).collect());
            }
        }
        let f = presheaf_from(base, &sizes, actions);
        if f.validate().is_empty() {
            return f;
        }
    }
    representables(rng, base)
}

fn presheaf_from(base: &Arc<FinCat>, sizes: &[usize], actions: Vec<Vec<usize>>) -> DiscretePresheaf {
    DiscretePresheaf {
        base: base.clone(),
        values: sizes.iter().map(|&n| (0..n).map(|k| format!("s{k}")).collect()).collect(),
        actions,
    }
}

fn representables(rng: &mut impl Rng, base: &Arc<FinCat>) -> DiscretePresheaf {
    let c = &**base;
    let reps: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..c.num_objects())).collect();
    // elements of F(x) are pairs (i, h: x → reps[i])
    let elems: Vec<Vec<(usize, usize)>> = c
        .objects()
        .map(|x| reps.iter().enumerate().flat_map(|(i, &r)| c.hom(x, r).iter().map(move |&h| (i, h))).collect())
        .collect();
    let values = elems.iter().map(|es| es.iter().map(|(i, h)| format!("{i}.{}", c.mor_name(*h))).collect()).collect();
    let actions = c
        .morphisms()
        .map(|y| {
            elems[c.cod(y)]
                .iter()
                .map(|&(i, h)| elems[c.dom(y)].iter().position(|&e| e == (i, c.comp(h, y))).expect("closed"))
                .collect()
        })
        .collect();
    DiscretePresheaf { base: base.clone(), values, actions }
}

pub fn random_small_category(rng: &mut impl Rng) -> Arc<FinCat> {
    Arc::new(match rng.gen_range(0..5) {
        0 => FinCat::terminal(),
        1 => FinCat::discrete(&["k0", "k1"]),
        2 => FinCat::preorder(&["k0", "k1"], |i, j| i <= j),
        3 => FinCat::chaotic(&["k0", "k1"]),
        _ => FinCat::cyclic_group(2),
    })
}

/// A discrete presheaf, a constant family, or a presheaf times a constant
/// family. Over a one-object group base it may also be the twisted `Z/2`.
pub fn random_indexed(rng: &mut impl Rng, base: &Arc<FinCat>) -> Arc<IndexedCat> {
    let t = twisted_z2();
    if **base == *t.base && rng.gen_bool(0.3) {
        return Arc::new(IndexedCat { base: base.clone(), ..(*t).clone() });
    }
    match rng.gen_range(0..4) {
        0 | 1 => Arc::new(embed_discrete(&random_presheaf(rng, base, 2))),
        2 => Arc::new(IndexedCat::constant(base, &random_small_category(rng))),
        _ => {
            let f = Arc::new(embed_discrete(&random_presheaf(rng, base, 2)));
            let k = Arc::new(IndexedCat::constant(base, &random_small_category(rng)));
            product_indexed(&f, &k).expect("product within caps").0
        }
    }
}

/// An indexed fibration over `d`: the identity, a projection from a product
/// with a constant family, the fiberwise Grothendieck construction of a
/// random presheaf on the total category, or (for discrete `d`) a map of
/// presheaves.
pub fn random_fibration(rng: &mut impl Rng, d: &Arc<IndexedCat>) -> IndexedFibration {
    let limits = Limits::default();
    let p = match rng.gen_range(0..4) {
        0 => IndexedFun::identity(d),
        1 => {
            let k = Arc::new(IndexedCat::constant(&d.base, &random_small_category(rng)));
            product_indexed(d, &k).expect("product within caps").1
        }
        2 => {
            let g = Arc::new(grothendieck(d, &limits).expect("total category within caps"));
            let a = Arc::new(embed_discrete(&random_presheaf(rng, &g.total, 2)));
            return fiberwise_grothendieck(&a, &g, &limits).expect("fiberwise construction").fibration;
        }
        _ => match discrete_values(d) {
            Some(target) => {
                let source = random_presheaf(rng, &d.base, 2);
                match random_presheaf_map(rng, &source, &target) {
                    Some(maps) => embed_map(&Arc::new(embed_discrete(&source)), d, &maps),
                    None => IndexedFun::identity(d),
                }
            }
            None => IndexedFun::identity(d),
        },
    };
    is_indexed_fibration(&p).expect("corpus fibration")
}

/// Recovers the presheaf when every fiber of `d` is discrete and `d` is
/// strict.
pub fn discrete_values(d: &IndexedCat) -> Option<DiscretePresheaf> {
    if !d.fibers.iter().all(|f| f.is_discrete()) || !d.is_strict() {
        return None;
    }
    Some(DiscretePresheaf {
        base: d.base.clone(),
        values: d.fibers.iter().map(|f| f.obj_names().to_vec()).collect(),
        actions: d.restrict.iter().map(|r| r.obj.clone()).collect(),
    })
}

/// A natural map `source → target` found by random search over its
/// components, if one turns up.
pub fn random_presheaf_map(rng: &mut impl Rng, source: &DiscretePresheaf, target: &DiscretePresheaf) -> Option<Vec<Vec<usize>>> {
    let c = &*source.base;
    for _ in 0..50 {
        let maps: Vec<Vec<usize>> = c
            .objects()
            .map(|x| (0..source.size(x)).map(|_| rng.gen_range(0..target.size(x).max(1))).collect())
            .collect();
        if c.objects().any(|x| target.size(x) == 0 && source.size(x) > 0) {
            return None;
        }
        let natural = c.morphisms().all(|y| {
            (0..source.size(c.cod(y))).all(|s| maps[c.dom(y)][source.act(y, s)] == target.act(y, maps[c.cod(y)][s]))
        });
        if natural {
            return Some(maps);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::validate_indexed;
    use crate::site::validate_topology;

    #[test]
    fn named_sites_are_valid() {
        for (name, j) in named_sites() {
            assert!(validate_topology(&j, &Limits::default()).unwrap().is_empty(), "{name}");
        }
        let s = span_site();
        assert_eq!(s.covers(2).len(), 2);
        let t = three_patch_site();
        assert_eq!(t.base.num_objects(), 8);
    }

    #[test]
    fn random_instances_are_valid() {
        let mut r = rng(7);
        for _ in 0..40 {
            let j = random_site(&mut r);
            assert!(validate_topology(&j, &Limits::default()).unwrap().is_empty());
            let f = random_presheaf(&mut r, &j.base, 3);
            assert!(f.validate().is_empty());
            let d = random_indexed(&mut r, &j.base);
            assert!(validate_indexed(&d).is_empty());
            let p = random_fibration(&mut r, &d);
            assert!(p.p.validate().is_empty());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_site(&mut rng(3));
        let b = random_site(&mut rng(3));
        assert_eq!(a.covers, b.covers);
    }
}
