//! The plus construction, its double application, and the factorization of
//! indexed functors into stacks through the unit.
//!
//! The fiber of `D^+` over `X` is `Desc(M_X, D)` where `M_X` is the minimal
//! covering sieve at `X`. Since `M_Y ⊆ y*(M_X)` for every `y: Y → X`,
//! restriction of data is strictly functorial, so `D^+` is a strict indexed
//! category whatever the coherence cells of `D` are.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descent::{
    check_stack, comparison, comparison_datum, desc_category, enumerate_morphisms, restriction_functor, Desc,
    DescentDatum, SieveCat,
};
use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Mor, Obj};
use crate::indexed::{
    compose_indexed, enumerate_indexed_functors, find_invertible_modification, IndexedCat, IndexedFun, Modification,
};
use crate::site::{intersect_sieves, minimal_cover, Sieve, Topology};

#[derive(Clone, Debug)]
pub struct PlusResult {
    pub input: Arc<IndexedCat>,
    pub output: Arc<IndexedCat>,
    pub unit: IndexedFun,
    /// `Desc(M_X, input)` for every base object `X`; the fiber of `output`
    /// over `X` is its category.
    pub descs: Vec<Desc>,
}

pub fn plus(d: &Arc<IndexedCat>, j: &Topology, limits: &Limits) -> Result<PlusResult> {
    let c = &*d.base;
    if !crate::indexed::same_cat(&d.base, &j.base) {
        return Err(Error::Precondition("indexed category and topology live over different bases".into()));
    }
    let descs: Vec<Desc> =
        c.objects().map(|x| desc_category(&minimal_cover(j, x), d, limits)).collect::<Result<_>>()?;
    let fibers: Vec<Arc<FinCat>> = descs.iter().map(|e| e.category.clone()).collect();
    let restrict: Vec<Functor> = c
        .morphisms()
        .map(|y| restriction_functor(c, &descs[c.cod(y)], y, &descs[c.dom(y)]))
        .collect::<Result<_>>()?;
    let output = Arc::new(IndexedCat::strict(&d.base, fibers, restrict));
    let components: Vec<Functor> = c.objects().map(|x| comparison(&descs[x], d)).collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(c.num_morphisms());
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let sc = &descs[yy].sieve_cat;
        let mut row = Vec::new();
        for v in d.fibers[x].objects() {
            let src = output.ro(y, components[x].obj[v]);
            let tgt = components[yy].obj[d.ro(y, v)];
            let comps: Vec<Mor> = sc
                .member_of
                .iter()
                .map(|&g| d.fibers[c.dom(g)].inverse(d.cc(y, g, v)).expect("compositor is invertible"))
                .collect();
            row.push(
                descs[yy]
                    .find_mor(src, tgt, &comps)
                    .ok_or_else(|| Error::internal("unit cell is not a morphism of descent data"))?,
            );
        }
        cells.push(row);
    }
    let unit = IndexedFun { source: d.clone(), target: output.clone(), components, cells };
    Ok(PlusResult { input: d.clone(), output, unit, descs })
}

#[derive(Clone, Debug)]
pub struct StackifyResult {
    pub first: PlusResult,
    pub second: PlusResult,
    pub stack: Arc<IndexedCat>,
    /// `η2 ∘ η1: D → D^{++}`.
    pub unit: IndexedFun,
}

pub fn stackify(d: &Arc<IndexedCat>, j: &Topology, limits: &Limits) -> Result<StackifyResult> {
    let first = plus(d, j, limits)?;
    let second = plus(&first.output, j, limits)?;
    let unit = compose_indexed(&second.unit, &first.unit)?;
    Ok(StackifyResult { stack: second.output.clone(), first, second, unit })
}

/// `φ_*(a)`: objects `φ(U_f)`, coherences `φ(coh(f, g)) ∘ cellφ_g[U_f]`.
pub fn push_datum(phi: &IndexedFun, sc: &SieveCat, a: &DescentDatum) -> DescentDatum {
    let c = &*phi.source.base;
    DescentDatum {
        obj: sc.member_of.iter().enumerate().map(|(i, &f)| phi.fo(c.dom(f), a.obj[i])).collect(),
        coh: sc
            .arrow_of
            .iter()
            .enumerate()
            .map(|(k, &(f, g))| {
                let u = a.obj[sc.member_index(f).expect("member")];
                phi.target.fibers[c.dom(g)].comp(phi.fm(c.dom(g), a.coh[k]), phi.cell(g, u))
            })
            .collect(),
    }
}

/// `φ^+: S^+ → T^+` for `φ: S → T`, given both plus constructions over the
/// same topology. Cells are identities.
pub fn plus_fun(phi: &IndexedFun, ps: &PlusResult, pt: &PlusResult) -> Result<IndexedFun> {
    let c = &*phi.source.base;
    let mut components = Vec::with_capacity(c.num_objects());
    for x in c.objects() {
        let (ds, dt) = (&ps.descs[x], &pt.descs[x]);
        let sc = &ds.sieve_cat;
        let obj: Vec<Obj> = ds
            .data
            .iter()
            .map(|a| dt.find_datum(&push_datum(phi, sc, a)).ok_or_else(|| Error::internal("pushed datum missing")))
            .collect::<Result<_>>()?;
        let mor: Vec<Mor> = ds
            .morphisms
            .iter()
            .map(|m| {
                let comps: Vec<Mor> =
                    sc.member_of.iter().enumerate().map(|(i, &f)| phi.fm(c.dom(f), m.components[i])).collect();
                dt.find_mor(obj[m.source], obj[m.target], &comps).ok_or_else(|| Error::internal("pushed morphism missing"))
            })
            .collect::<Result<_>>()?;
        components.push(Functor { source: ds.category.clone(), target: dt.category.clone(), obj, mor });
    }
    let cells = c
        .morphisms()
        .map(|y| {
            let yy = c.dom(y);
            ps.output.fibers[c.cod(y)]
                .objects()
                .map(|a| pt.output.fibers[yy].id(components[yy].obj[ps.output.ro(y, a)]))
                .collect()
        })
        .collect();
    Ok(IndexedFun { source: ps.output.clone(), target: pt.output.clone(), components, cells })
}

/// A factorization `ψ: s_J(D) → F` with an invertible modification
/// `ψ ∘ η ⇒ φ`.
#[derive(Clone, Debug)]
pub struct Reflection {
    pub psi: IndexedFun,
    pub witness: Modification,
}

pub fn reflect_through_unit(phi: &IndexedFun, s: &StackifyResult, j: &Topology, limits: &Limits) -> Result<Reflection> {
    if !Arc::ptr_eq(&phi.source, &s.first.input) {
        return Err(Error::Precondition("the stackification is not of the source of the functor".into()));
    }
    if let Some(w) = check_stack(&phi.target, j, limits)? {
        return Err(Error::Precondition(format!("target is not a stack: {}", w.detail)));
    }
    let psi1 = reflect_step(phi, &s.first, limits)?;
    let psi = reflect_step(&psi1, &s.second, limits)?;
    let composite = compose_indexed(&psi, &s.unit)?;
    let witness = find_invertible_modification(&composite, phi, limits.max_descent)?
        .ok_or_else(|| Error::internal("factorization through the unit is not isomorphic to the original functor"))?;
    Ok(Reflection { psi, witness })
}

/// Component list of a composite of descent morphisms.
fn compose_components(d: &IndexedCat, sc: &SieveCat, second: &[Mor], first: &[Mor]) -> Vec<Mor> {
    let c = &*d.base;
    sc.member_of.iter().enumerate().map(|(i, &f)| d.fibers[c.dom(f)].comp(second[i], first[i])).collect()
}

fn invert_components(d: &IndexedCat, sc: &SieveCat, comps: &[Mor]) -> Option<Vec<Mor>> {
    let c = &*d.base;
    sc.member_of.iter().enumerate().map(|(i, &f)| d.fibers[c.dom(f)].inverse(comps[i])).collect()
}

/// An object `V` of `F(X)` together with an isomorphism of data
/// `comparison(V) → a`, the first in index order.
fn glue(f: &IndexedCat, sc: &SieveCat, a: &DescentDatum, limits: &Limits) -> Result<Option<(Obj, Vec<Mor>)>> {
    let c = &*f.base;
    for v in f.fibers[sc.sieve.apex].objects() {
        let cv = comparison_datum(f, sc, v);
        for comps in enumerate_morphisms(f, sc, &cv, a, limits)? {
            if sc.member_of.iter().enumerate().all(|(i, &g)| f.fibers[c.dom(g)].is_iso(comps[i])) {
                return Ok(Some((v, comps)));
            }
        }
    }
    Ok(None)
}

/// The unique `m: v → w` whose comparison image has the given components.
fn preimage(f: &IndexedCat, sc: &SieveCat, v: Obj, w: Obj, comps: &[Mor]) -> Option<Mor> {
    let fx = &*f.fibers[sc.sieve.apex];
    fx.hom(v, w).iter().copied().find(|&m| sc.member_of.iter().enumerate().all(|(i, &g)| f.rm(g, m) == comps[i]))
}

/// One level of the factorization: `ψ: D^+ → F` with `ψ ∘ η ≅ φ`.
fn reflect_step(phi: &IndexedFun, p: &PlusResult, limits: &Limits) -> Result<IndexedFun> {
    let f = &*phi.target;
    let c = &*f.base;
    let mut glued: Vec<Vec<(Obj, Vec<Mor>)>> = Vec::with_capacity(c.num_objects());
    let mut components = Vec::with_capacity(c.num_objects());
    for x in c.objects() {
        let desc = &p.descs[x];
        let sc = &desc.sieve_cat;
        let mut row = Vec::with_capacity(desc.data.len());
        for a in &desc.data {
            let pushed = push_datum(phi, sc, a);
            let g = glue(f, sc, &pushed, limits)?
                .ok_or_else(|| Error::internal("a descent datum in a stack failed to glue"))?;
            row.push(g);
        }
        let mut mor = Vec::with_capacity(desc.morphisms.len());
        for m in &desc.morphisms {
            let (va, theta_a) = &row[m.source];
            let (vb, theta_b) = &row[m.target];
            let pushed: Vec<Mor> = sc.member_of.iter().enumerate().map(|(i, &g)| phi.fm(c.dom(g), m.components[i])).collect();
            let inv_b = invert_components(f, sc, theta_b).ok_or_else(|| Error::internal("gluing iso not invertible"))?;
            let conj = compose_components(f, sc, &inv_b, &compose_components(f, sc, &pushed, theta_a));
            mor.push(
                preimage(f, sc, *va, *vb, &conj)
                    .ok_or_else(|| Error::internal("morphism of glued data has no unique preimage"))?,
            );
        }
        components.push(Functor {
            source: desc.category.clone(),
            target: f.fibers[x].clone(),
            obj: row.iter().map(|(v, _)| *v).collect(),
            mor,
        });
        glued.push(row);
    }
    let mut cells = Vec::with_capacity(c.num_morphisms());
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let (dx, dy) = (&p.descs[x], &p.descs[yy]);
        let sc_y = &dy.sieve_cat;
        let mut row = Vec::with_capacity(dx.data.len());
        for (ai, _) in dx.data.iter().enumerate() {
            let (v, theta_a) = &glued[x][ai];
            let restricted = p.output.ro(y, ai);
            let (w, theta_r) = &glued[yy][restricted];
            // components at g ∈ M_Y of θ_r^{-1} ∘ y*(θ_a) ∘ κ, with κ_g = c_{y,g,V}
            let comps: Vec<Mor> = sc_y
                .member_of
                .iter()
                .enumerate()
                .map(|(i, &g)| {
                    let fib = &*f.fibers[c.dom(g)];
                    let k = dx.sieve_cat.member_index(c.comp(y, g)).expect("minimal covers are nested");
                    let inv = fib.inverse(theta_r[i]).expect("gluing iso");
                    fib.comp_all(&[inv, theta_a[k], f.cc(y, g, *v)])
                })
                .collect();
            row.push(
                preimage(f, sc_y, f.ro(y, *v), *w, &comps)
                    .ok_or_else(|| Error::internal("pseudonaturality cell has no preimage"))?,
            );
        }
        cells.push(row);
    }
    Ok(IndexedFun { source: p.output.clone(), target: phi.target.clone(), components, cells })
}

/// Exhaustively checks that every `χ: s_J(D) → F` with `χ ∘ η ≅ φ` is
/// isomorphic to `ψ`. Returns `None` when some fiber has more than
/// `max_fiber` objects and the search is skipped.
pub fn check_reflection_uniqueness(
    phi: &IndexedFun,
    s: &StackifyResult,
    r: &Reflection,
    max_fiber: usize,
    limits: &Limits,
) -> Result<Option<bool>> {
    let too_big = |d: &IndexedCat| d.fibers.iter().any(|f| f.num_objects() > max_fiber);
    if too_big(&s.stack) || too_big(&phi.target) {
        return Ok(None);
    }
    let all = enumerate_indexed_functors(&s.stack, &phi.target, limits.max_descent)?;
    for chi in &all {
        let composite = compose_indexed(chi, &s.unit)?;
        if find_invertible_modification(&composite, phi, limits.max_descent)?.is_some()
            && find_invertible_modification(chi, &r.psi, limits.max_descent)?.is_none()
        {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Outcome of comparing `Desc(M_X, D)` with the colimit of `Desc(R, D)`
/// over all covering sieves `R` at `X` ordered by refinement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColimitAudit {
    pub object: Obj,
    pub covering_sieves: usize,
    pub colimit_objects: usize,
    pub colimit_morphisms: usize,
    pub equivalent: bool,
}

/// Builds the colimit of descent categories over the refinement poset of
/// covering sieves at `x` (objects: pairs `(R, a)`; morphisms: germs of
/// descent morphisms, identified when they agree on some common covering
/// refinement) and checks that `Desc(M_x, D)` maps to it by an equivalence.
pub fn colimit_audit(d: &IndexedCat, j: &Topology, x: Obj, limits: &Limits) -> Result<ColimitAudit> {
    let c = &*d.base;
    let covers: Vec<Sieve> = j.covers(x).iter().cloned().collect();
    let descs: Vec<Desc> = covers.iter().map(|r| desc_category(r, d, limits)).collect::<Result<_>>()?;
    let id = c.id(x);
    // restriction functors S ⊆ R
    let mut restr: HashMap<(usize, usize), Functor> = HashMap::new();
    for (ri, r) in covers.iter().enumerate() {
        for (si, s) in covers.iter().enumerate() {
            if s.is_subset(r) {
                restr.insert((ri, si), restriction_functor(c, &descs[ri], id, &descs[si])?);
            }
        }
    }
    let cover_index: HashMap<&Sieve, usize> = covers.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // common covering refinements of R and R'
    let below = |ri: usize, rj: usize| -> Vec<usize> {
        (0..covers.len()).filter(|&s| covers[s].is_subset(&covers[ri]) && covers[s].is_subset(&covers[rj])).collect()
    };
    // objects of the colimit
    let objects: Vec<(usize, Obj)> =
        (0..covers.len()).flat_map(|ri| (0..descs[ri].data.len()).map(move |a| (ri, a))).collect();
    // germ representatives (S, δ) for a pair of objects, identified by local equality
    let germs_between = |p: (usize, Obj), q: (usize, Obj)| -> Vec<Vec<(usize, Mor)>> {
        let mut classes: Vec<Vec<(usize, Mor)>> = Vec::new();
        for s in below(p.0, q.0) {
            let (ap, aq) = (restr[&(p.0, s)].obj[p.1], restr[&(q.0, s)].obj[q.1]);
            for &m in descs[s].category.hom(ap, aq) {
                let germ = (s, m);
                let locally_equal = |other: &(usize, Mor)| {
                    below(s, other.0).iter().any(|&t| restr[&(s, t)].mor[m] == restr[&(other.0, t)].mor[other.1])
                };
                match classes.iter_mut().find(|cls| cls.iter().any(locally_equal)) {
                    Some(cls) => cls.push(germ),
                    None => classes.push(vec![germ]),
                }
            }
        }
        classes
    };
    let mut morphisms: Vec<(String, Obj, Obj)> = Vec::new();
    let mut germs: Vec<Vec<(usize, Mor)>> = Vec::new();
    let mut identity = vec![usize::MAX; objects.len()];
    for (pi, &p) in objects.iter().enumerate() {
        for (qi, &q) in objects.iter().enumerate() {
            for cls in germs_between(p, q) {
                let (s, m) = cls[0];
                if pi == qi && cls.iter().any(|&(s2, m2)| descs[s2].category.is_identity(m2)) {
                    identity[pi] = morphisms.len();
                }
                morphisms.push((format!("{}:{}", s, descs[s].category.mor_name(m)), pi, qi));
                germs.push(cls);
            }
        }
    }
    if identity.contains(&usize::MAX) {
        return Err(Error::internal("colimit object without identity germ"));
    }
    let class_of = |pi: Obj, qi: Obj, germ: (usize, Mor)| -> Option<Mor> {
        (0..morphisms.len()).find(|&k| {
            morphisms[k].1 == pi
                && morphisms[k].2 == qi
                && germs[k].iter().any(|&(s, m)| {
                    below(s, germ.0).iter().any(|&t| restr[&(s, t)].mor[m] == restr[&(germ.0, t)].mor[germ.1])
                })
        })
    };
    let ends: Vec<(Obj, Obj)> = morphisms.iter().map(|(_, s, t)| (*s, *t)).collect();
    let category = FinCat::build(
        objects.iter().map(|&(ri, a)| format!("{}@{}", ri, descs[ri].category.obj_name(a))).collect(),
        morphisms.clone(),
        identity,
        |second, first| {
            let (s1, m1) = germs[first][0];
            let (s2, m2) = germs[second][0];
            let t = cover_index[&intersect_sieves(&covers[s1], &covers[s2])?];
            let composite = descs[t].category.comp(restr[&(s2, t)].mor[m2], restr[&(s1, t)].mor[m1]);
            class_of(ends[first].0, ends[second].1, (t, composite))
                .ok_or_else(|| Error::internal("composite germ has no class"))
        },
    )?
    .into_arc();
    let m_index = cover_index[&minimal_cover(j, x)];
    let into = Functor {
        source: descs[m_index].category.clone(),
        target: category.clone(),
        obj: (0..descs[m_index].data.len()).map(|a| objects.iter().position(|&o| o == (m_index, a)).expect("object")).collect(),
        mor: descs[m_index]
            .category
            .morphisms()
            .map(|m| {
                let cat = &descs[m_index].category;
                let p = objects.iter().position(|&o| o == (m_index, cat.dom(m))).expect("object");
                let q = objects.iter().position(|&o| o == (m_index, cat.cod(m))).expect("object");
                class_of(p, q, (m_index, m)).ok_or_else(|| Error::internal("germ without class"))
            })
            .collect::<Result<_>>()?,
    };
    Ok(ColimitAudit {
        object: x,
        covering_sieves: covers.len(),
        colimit_objects: category.num_objects(),
        colimit_morphisms: category.num_morphisms(),
        equivalent: into.validate().is_empty() && category.validate().is_empty() && into.is_equivalence(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{is_prestack, is_stack};
    use crate::indexed::{embed_discrete, is_indexed_equivalence, validate_indexed, DiscretePresheaf};
    use crate::site::{saturate, CoveringFamily};

    fn arrow() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j))
    }

    fn span() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["p", "q", "X"], |i, j| i == j || j == 2))
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
    fn plus_on_trivial_topology_is_equivalent() {
        let c = arrow();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[1, 2], &[("a_b", vec![0, 0])])));
        let p = plus(&d, &Topology::trivial(&c), &Limits::default()).unwrap();
        assert!(validate_indexed(&p.output).is_empty());
        assert!(p.unit.validate().is_empty());
        assert!(is_indexed_equivalence(&p.unit));
    }

    #[test]
    fn plus_of_non_separated_presheaf() {
        let j = arrow_site();
        let c = j.base.clone();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[1, 2], &[("a_b", vec![0, 0])])));
        let limits = Limits::default();
        let p = plus(&d, &j, &limits).unwrap();
        assert_eq!(p.output.fibers[1].num_objects(), 1);
        assert_eq!(p.output.fibers[0].num_objects(), 1);
        assert!(validate_indexed(&p.output).is_empty());
        assert!(p.unit.validate().is_empty());
        assert!(is_prestack(&p.output, &j, &limits).unwrap());
    }

    #[test]
    fn plus_on_span() {
        let c = span();
        let (jp, jq) = (c.find_morphism("p_X").unwrap(), c.find_morphism("q_X").unwrap());
        let j = saturate(&c, &[CoveringFamily { apex: 2, arrows: vec![jp, jq] }], &Limits::default()).unwrap();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[2, 2, 1], &[("p_X", vec![0]), ("q_X", vec![0])])));
        let p = plus(&d, &j, &Limits::default()).unwrap();
        assert_eq!(p.output.fibers[2].num_objects(), 4);
    }

    #[test]
    fn stackify_yields_stacks() {
        let limits = Limits::default();
        let j = arrow_site();
        let c = j.base.clone();
        for f in [
            presheaf(&c, &[1, 2], &[("a_b", vec![0, 0])]),
            presheaf(&c, &[2, 1], &[("a_b", vec![0])]),
            presheaf(&c, &[3, 2], &[("a_b", vec![0, 2])]),
        ] {
            let d = Arc::new(embed_discrete(&f));
            let s = stackify(&d, &j, &limits).unwrap();
            assert!(validate_indexed(&s.stack).is_empty());
            assert!(s.unit.validate().is_empty());
            assert!(is_stack(&s.stack, &j, &limits).unwrap());
            let again = stackify(&s.stack, &j, &limits).unwrap();
            assert!(is_indexed_equivalence(&again.unit));
        }
    }

    #[test]
    fn stackify_non_strict_groupoid_fibers() {
        // Z/2-torsor-like fibers over the arrow site with a twisted compositor.
        let limits = Limits::default();
        let j = arrow_site();
        let c = j.base.clone();
        let k = Arc::new(FinCat::cyclic_group(2));
        let d = Arc::new(IndexedCat::constant(&c, &k));
        let s = stackify(&d, &j, &limits).unwrap();
        assert!(is_stack(&s.stack, &j, &limits).unwrap());
    }

    #[test]
    fn reflection_of_identity_on_a_stack() {
        let limits = Limits::default();
        let j = arrow_site();
        let c = j.base.clone();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[2, 2], &[("a_b", vec![1, 0])])));
        assert!(is_stack(&d, &j, &limits).unwrap());
        let s = stackify(&d, &j, &limits).unwrap();
        let phi = IndexedFun::identity(&d);
        let r = reflect_through_unit(&phi, &s, &j, &limits).unwrap();
        assert!(r.psi.validate().is_empty());
        assert!(is_indexed_equivalence(&r.psi));
        assert_eq!(check_reflection_uniqueness(&phi, &s, &r, 3, &limits).unwrap(), Some(true));
    }

    #[test]
    fn reflection_requires_a_stack() {
        let limits = Limits::default();
        let j = arrow_site();
        let c = j.base.clone();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[1, 2], &[("a_b", vec![0, 0])])));
        let s = stackify(&d, &j, &limits).unwrap();
        let phi = IndexedFun::identity(&d);
        assert!(matches!(reflect_through_unit(&phi, &s, &j, &limits), Err(Error::Precondition(_))));
    }

    #[test]
    fn plus_fun_of_identity_is_identity() {
        let limits = Limits::default();
        let j = arrow_site();
        let c = j.base.clone();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[1, 2], &[("a_b", vec![0, 0])])));
        let p = plus(&d, &j, &limits).unwrap();
        let f = plus_fun(&IndexedFun::identity(&d), &p, &p).unwrap();
        assert!(f.validate().is_empty());
        assert_eq!(f, IndexedFun::identity(&p.output));
    }

    #[test]
    fn colimit_collapses_to_minimal_cover() {
        // Three-patch site: u, v, w below X, with X covered by {u,v} and {v,w}.
        let c = Arc::new(FinCat::preorder(&["u", "v", "w", "X"], |i, j| i == j || j == 3));
        let m = |n: &str| c.find_morphism(n).unwrap();
        let j = saturate(
            &c,
            &[
                CoveringFamily { apex: 3, arrows: vec![m("u_X"), m("v_X")] },
                CoveringFamily { apex: 3, arrows: vec![m("v_X"), m("w_X")] },
            ],
            &Limits::default(),
        )
        .unwrap();
        assert!(j.covers(3).len() >= 3);
        let d = embed_discrete(&presheaf(&c, &[2, 1, 2, 1], &[("u_X", vec![0]), ("v_X", vec![0]), ("w_X", vec![1])]));
        let audit = colimit_audit(&d, &j, 3, &Limits::default()).unwrap();
        assert!(audit.equivalent);
    }
}
