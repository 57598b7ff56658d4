//! Classical sheafification of presheaves of finite sets by matching
//! families, written directly against sets and functions. It shares only
//! the site layer with the categorical construction, so it can serve as an
//! independent reference for [`crate::stackify`] on discrete inputs.

use std::sync::Arc;

use crate::descent::DescentDatum;
use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Obj};
use crate::indexed::{
    compose_indexed, embed_discrete, find_invertible_modification, is_indexed_equivalence, DiscretePresheaf, IndexedCat,
    IndexedFun,
};
use crate::site::{minimal_cover, Sieve, Topology};
use crate::stackify::StackifyResult;

/// All compatible families `(s_f)_{f ∈ R}` with `F(g)(s_f) = s_{f∘g}`,
/// listed in lexicographic order of the member values.
pub fn matching_families(f: &DiscretePresheaf, r: &Sieve) -> Vec<Vec<usize>> {
    let c = &*f.base;
    let members = &r.members;
    let pos = |m: usize| members.binary_search(&m).ok();
    let mut out = Vec::new();
    let mut cur = vec![usize::MAX; members.len()];
    fn rec(
        f: &DiscretePresheaf,
        c: &FinCat,
        members: &[usize],
        pos: &dyn Fn(usize) -> Option<usize>,
        i: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == members.len() {
            out.push(cur.clone());
            return;
        }
        let m = members[i];
        for s in 0..f.size(c.dom(m)) {
            cur[i] = s;
            // compare against every already-chosen member related by precomposition
            let ok = (0..=i).all(|k| {
                let mk = members[k];
                c.incoming(c.dom(mk)).iter().all(|&g| match pos(c.comp(mk, g)) {
                    Some(j) if j <= i => f.act(g, cur[k]) == cur[j],
                    _ => true,
                })
            });
            if ok {
                rec(f, c, members, pos, i + 1, cur, out);
            }
        }
        cur[i] = usize::MAX;
    }
    rec(f, c, members, &pos, 0, &mut cur, &mut out);
    out
}

/// One application of the plus construction on sets, with its unit.
#[derive(Clone, Debug)]
pub struct PresheafPlus {
    pub output: DiscretePresheaf,
    /// `families[X][k]`: the matching family on `M_X` that element `k`
    /// of `output` at `X` stands for.
    pub families: Vec<Vec<Vec<usize>>>,
    /// `unit[X][s]`: the element of `output` at `X` represented by the
    /// family of restrictions of `s`.
    pub unit: Vec<Vec<usize>>,
}

pub fn presheaf_plus(f: &DiscretePresheaf, j: &Topology) -> PresheafPlus {
    let c = &*f.base;
    let covers: Vec<Sieve> = c.objects().map(|x| minimal_cover(j, x)).collect();
    let families: Vec<Vec<Vec<usize>>> = c.objects().map(|x| matching_families(f, &covers[x])).collect();
    let values = families
        .iter()
        .enumerate()
        .map(|(x, fams)| {
            fams.iter()
                .map(|fam| {
                    let parts: Vec<&str> = fam
                        .iter()
                        .zip(&covers[x].members)
                        .map(|(&s, &m)| f.values[c.dom(m)][s].as_str())
                        .collect();
                    format!("({})", parts.join(","))
                })
                .collect()
        })
        .collect();
    let lookup = |x: Obj, fam: &[usize]| families[x].iter().position(|g| g == fam).expect("matching family");
    let actions = c
        .morphisms()
        .map(|y| {
            let (x, yy) = (c.cod(y), c.dom(y));
            families[x]
                .iter()
                .map(|fam| {
                    let restricted: Vec<usize> = covers[yy]
                        .members
                        .iter()
                        .map(|&g| fam[covers[x].members.binary_search(&c.comp(y, g)).expect("nested covers")])
                        .collect();
                    lookup(yy, &restricted)
                })
                .collect()
        })
        .collect();
    let unit = c
        .objects()
        .map(|x| {
            (0..f.size(x))
                .map(|s| {
                    let fam: Vec<usize> = covers[x].members.iter().map(|&m| f.act(m, s)).collect();
                    lookup(x, &fam)
                })
                .collect()
        })
        .collect();
    PresheafPlus { output: DiscretePresheaf { base: f.base.clone(), values, actions }, families, unit }
}

/// The classical associated sheaf `F^{++}` together with the unit
/// `F → F^{++}` (per object, a function on elements).
#[derive(Clone, Debug)]
pub struct OracleSheafification {
    pub first: PresheafPlus,
    pub second: PresheafPlus,
    pub unit: Vec<Vec<usize>>,
}

pub fn sheafify_with_unit(f: &DiscretePresheaf, j: &Topology) -> OracleSheafification {
    let first = presheaf_plus(f, j);
    let second = presheaf_plus(&first.output, j);
    let unit = first
        .unit
        .iter()
        .enumerate()
        .map(|(x, u)| u.iter().map(|&s| second.unit[x][s]).collect())
        .collect();
    OracleSheafification { first, second, unit }
}

pub fn sheafify_oracle(f: &DiscretePresheaf, j: &Topology) -> DiscretePresheaf {
    sheafify_with_unit(f, j).second.output
}

/// Every matching family on every covering sieve has exactly one
/// amalgamation.
pub fn is_sheaf(f: &DiscretePresheaf, j: &Topology) -> bool {
    let c = &*f.base;
    c.objects().all(|x| {
        j.covers(x).iter().all(|r| {
            let fams = matching_families(f, r);
            let restrictions: Vec<Vec<usize>> =
                (0..f.size(x)).map(|s| r.members.iter().map(|&m| f.act(m, s)).collect()).collect();
            fams.iter().all(|fam| restrictions.iter().filter(|v| *v == fam).count() == 1)
        })
    })
}

/// A natural bijection `F ≅ G`, if one exists (exhaustive).
pub fn find_presheaf_iso(f: &DiscretePresheaf, g: &DiscretePresheaf) -> Option<Vec<Vec<usize>>> {
    let c = &*f.base;
    if c.objects().any(|x| f.size(x) != g.size(x)) {
        return None;
    }
    let mut maps: Vec<Vec<usize>> = c.objects().map(|x| vec![usize::MAX; f.size(x)]).collect();
    let slots: Vec<(Obj, usize)> = c.objects().flat_map(|x| (0..f.size(x)).map(move |s| (x, s))).collect();
    fn rec(f: &DiscretePresheaf, g: &DiscretePresheaf, slots: &[(Obj, usize)], i: usize, maps: &mut Vec<Vec<usize>>) -> bool {
        let c = &*f.base;
        let Some(&(x, s)) = slots.get(i) else {
            return true;
        };
        for t in 0..g.size(x) {
            if maps[x].contains(&t) {
                continue;
            }
            maps[x][s] = t;
            let ok = c.morphisms().all(|y| {
                let (cx, dy) = (c.cod(y), c.dom(y));
                (0..f.size(cx)).all(|e| {
                    let (a, b) = (maps[cx][e], maps[dy][f.act(y, e)]);
                    a == usize::MAX || b == usize::MAX || g.act(y, a) == b
                })
            });
            if ok && rec(f, g, slots, i + 1, maps) {
                return true;
            }
        }
        maps[x][s] = usize::MAX;
        false
    }
    rec(f, g, &slots, 0, &mut maps).then_some(maps)
}

/// The discrete indexed functor `embed(F) → embed(G)` of a natural map.
pub fn embed_map(source: &Arc<IndexedCat>, target: &Arc<IndexedCat>, maps: &[Vec<usize>]) -> IndexedFun {
    let c = &*source.base;
    IndexedFun {
        source: source.clone(),
        target: target.clone(),
        components: c
            .objects()
            .map(|x| Functor {
                source: source.fibers[x].clone(),
                target: target.fibers[x].clone(),
                obj: maps[x].clone(),
                mor: maps[x].iter().map(|&t| target.fibers[x].id(t)).collect(),
            })
            .collect(),
        cells: c
            .morphisms()
            .map(|y| (0..source.fibers[c.cod(y)].num_objects()).map(|s| target.fibers[c.dom(y)].id(target.ro(y, maps[c.cod(y)][s]))).collect())
            .collect(),
    }
}

/// Result of comparing the categorical stackification of a discrete input
/// with the set-level oracle.
#[derive(Clone, Debug)]
pub struct OracleComparison {
    /// `embed(F^{++}) → s_J(embed(F))`, built by matching families with
    /// descent data level by level.
    pub comparison: IndexedFun,
    pub equivalence: bool,
    pub units_intertwined: bool,
}

/// Compares `s` (the stackification of `embed_discrete(f)`) with the
/// oracle. Fails with an internal error if some matching family has no
/// corresponding descent datum, which would mean the two constructions
/// disagree on objects.
pub fn compare_with_stackify(
    f: &DiscretePresheaf,
    j: &Topology,
    s: &StackifyResult,
    limits: &Limits,
) -> Result<OracleComparison> {
    let c = &*f.base;
    let oracle = sheafify_with_unit(f, j);
    // level one: F^+(X) → D^+(X)
    let level = |plus: &crate::stackify::PlusResult, fams: &Vec<Vec<Vec<usize>>>, inner: &dyn Fn(Obj, usize) -> usize| -> Result<Vec<Vec<usize>>> {
        c.objects()
            .map(|x| {
                let desc = &plus.descs[x];
                let sc = &desc.sieve_cat;
                fams[x]
                    .iter()
                    .map(|fam| {
                        let obj: Vec<usize> =
                            sc.member_of.iter().enumerate().map(|(i, &m)| inner(c.dom(m), fam[i])).collect();
                        let coh = sc
                            .arrow_of
                            .iter()
                            .map(|&(m, g)| {
                                let fg = sc.member_index(c.comp(m, g)).expect("member");
                                plus.input.fibers[c.dom(g)].id(obj[fg])
                            })
                            .collect();
                        desc.find_datum(&DescentDatum { obj, coh })
                            .ok_or_else(|| Error::internal("matching family without a descent datum"))
                    })
                    .collect()
            })
            .collect()
    };
    let phi1 = level(&s.first, &oracle.first.families, &|_, e| e)?;
    let phi2 = level(&s.second, &oracle.second.families, &|x, e| phi1[x][e])?;
    let sheaf = Arc::new(embed_discrete(&oracle.second.output));
    let comparison = embed_map(&sheaf, &s.stack, &phi2);
    let valid = comparison.validate().is_empty();
    let equivalence = valid && is_indexed_equivalence(&comparison);
    let input = s.first.input.clone();
    let oracle_unit = embed_map(&input, &sheaf, &oracle.unit);
    let units_intertwined = valid
        && oracle_unit.validate().is_empty()
        && find_invertible_modification(&compose_indexed(&comparison, &oracle_unit)?, &s.unit, limits.max_descent)?
            .is_some();
    Ok(OracleComparison { comparison, equivalence, units_intertwined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::{saturate, CoveringFamily};
    use crate::stackify::stackify;

    fn arrow() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j))
    }

    fn presheaf(c: &Arc<FinCat>, sizes: &[usize], maps: &[(&str, Vec<usize>)]) -> DiscretePresheaf {
        let values = sizes.iter().map(|&n| (0..n).map(|k| k.to_string()).collect()).collect();
        let actions = c
            .morphisms()
            .map(|y| {
                if c.is_identity(y) {
                    (0..sizes[c.dom(y)]).collect()
                } else {
                    maps.iter().find(|(n, _)| *n == c.mor_name(y)).expect("map").1.clone()
                }
            })
            .collect();
        DiscretePresheaf { base: c.clone(), values, actions }
    }

    fn arrow_site() -> Topology {
        let c = arrow();
        let i = c.find_morphism("a_b").unwrap();
        saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap()
    }

    #[test]
    fn sheaf_is_fixed() {
        let j = arrow_site();
        let f = presheaf(&j.base, &[2, 2], &[("a_b", vec![1, 0])]);
        assert!(is_sheaf(&f, &j));
        let g = sheafify_oracle(&f, &j);
        assert!(find_presheaf_iso(&f, &g).is_some());
    }

    #[test]
    fn non_separated_collapses() {
        let j = arrow_site();
        let f = presheaf(&j.base, &[1, 2], &[("a_b", vec![0, 0])]);
        assert!(!is_sheaf(&f, &j));
        let g = sheafify_oracle(&f, &j);
        assert_eq!(g.size(1), 1);
        assert!(g.validate().is_empty());
        assert!(is_sheaf(&g, &j));
    }

    #[test]
    fn span_product_of_sections() {
        let c = Arc::new(FinCat::preorder(&["p", "q", "X"], |i, j| i == j || j == 2));
        let (jp, jq) = (c.find_morphism("p_X").unwrap(), c.find_morphism("q_X").unwrap());
        let j = saturate(&c, &[CoveringFamily { apex: 2, arrows: vec![jp, jq] }], &Limits::default()).unwrap();
        let f = presheaf(&c, &[2, 2, 1], &[("p_X", vec![0]), ("q_X", vec![0])]);
        assert_eq!(sheafify_oracle(&f, &j).size(2), 4);
    }

    #[test]
    fn agrees_with_stackify() {
        let limits = Limits::default();
        let j = arrow_site();
        for f in [
            presheaf(&j.base, &[1, 2], &[("a_b", vec![0, 0])]),
            presheaf(&j.base, &[2, 1], &[("a_b", vec![0])]),
            presheaf(&j.base, &[2, 2], &[("a_b", vec![1, 0])]),
        ] {
            let d = Arc::new(embed_discrete(&f));
            let s = stackify(&d, &j, &limits).unwrap();
            let cmp = compare_with_stackify(&f, &j, &s, &limits).unwrap();
            assert!(cmp.equivalence);
            assert!(cmp.units_intertwined);
        }
    }

    #[test]
    fn presheaf_iso_search() {
        let c = arrow();
        let f = presheaf(&c, &[2, 2], &[("a_b", vec![1, 0])]);
        let g = presheaf(&c, &[2, 2], &[("a_b", vec![0, 1])]);
        let h = presheaf(&c, &[2, 2], &[("a_b", vec![0, 0])]);
        assert!(find_presheaf_iso(&f, &g).is_some());
        assert!(find_presheaf_iso(&f, &h).is_none());
    }
}
