//! The Grothendieck construction of an indexed category, its cartesian
//! morphisms, the Giraud topology, and the fiberwise stack criterion.
//!
//! Objects of the total category are pairs `(X, U)` with `U ∈ D(X)`. A
//! morphism `(Y, V) → (X, U)` is a pair `(y, a)` with `y: Y → X` and
//! `a: V → D(y)U` in `D(Y)`. Composition:
//! `(y, a) ∘ (z, b) = (y∘z, c_{y,z,U} ∘ D(z)(a) ∘ b)`; identity `(id_X, u_U)`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descent::check_stack;
use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Mor, Obj};
use crate::indexed::{pullback_indexed, IndexedCat};
use crate::site::{saturate, slice_site, CoveringFamily, Topology};

#[derive(Clone, Debug)]
pub struct GrothCat {
    pub source: Arc<IndexedCat>,
    pub total: Arc<FinCat>,
    pub proj: Functor,
    /// `(X, U)` for every total object.
    pub object_of: Vec<(Obj, Obj)>,
    /// `(y, U, a)` for every total morphism `(y, a)` into `(cod y, U)`.
    pub morphism_of: Vec<(Mor, Obj, Mor)>,
    obj_index: HashMap<(Obj, Obj), Obj>,
    mor_index: HashMap<(Mor, Obj, Mor), Mor>,
}

impl GrothCat {
    pub fn object(&self, x: Obj, u: Obj) -> Obj {
        self.obj_index[&(x, u)]
    }

    /// The morphism `(y, a)` with codomain `(cod y, u)`.
    pub fn morphism(&self, y: Mor, u: Obj, a: Mor) -> Option<Mor> {
        self.mor_index.get(&(y, u, a)).copied()
    }
}

pub fn grothendieck(d: &Arc<IndexedCat>, limits: &Limits) -> Result<GrothCat> {
    let c = &*d.base;
    let mut object_of = Vec::new();
    let mut names = Vec::new();
    for x in c.objects() {
        for u in d.fibers[x].objects() {
            object_of.push((x, u));
            names.push(format!("{}@{}", c.obj_name(x), d.fibers[x].obj_name(u)));
        }
    }
    let obj_index: HashMap<(Obj, Obj), Obj> = object_of.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut morphism_of = Vec::new();
    let mut morphisms = Vec::new();
    let mut hom_sizes: HashMap<(Obj, Obj), usize> = HashMap::new();
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let dy = &*d.fibers[yy];
        for u in d.fibers[x].objects() {
            let target = d.ro(y, u);
            for v in dy.objects() {
                for &a in dy.hom(v, target) {
                    let (s, t) = (obj_index[&(yy, v)], obj_index[&(x, u)]);
                    let n = hom_sizes.entry((s, t)).or_insert(0);
                    *n += 1;
                    if *n > limits.max_homset {
                        return Err(Error::cap("total category hom-set", limits.max_homset));
                    }
                    morphism_of.push((y, u, a));
                    let name = format!("{}@{}/{}", c.mor_name(y), dy.mor_name(a), d.fibers[x].obj_name(u));
                    morphisms.push((name, s, t));
                }
            }
        }
    }
    let mor_index: HashMap<(Mor, Obj, Mor), Mor> = morphism_of.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let identity = object_of.iter().map(|&(x, u)| mor_index[&(c.id(x), u, d.uc(x, u))]).collect();
    let total = FinCat::build(names, morphisms, identity, |second, first| {
        // second = (y, a): (Y, V) → (X, U); first = (z, b): (Z, W) → (Y, V)
        let (y, u, a) = morphism_of[second];
        let (z, _, b) = morphism_of[first];
        let dz = &*d.fibers[c.dom(z)];
        let comp = dz.comp_all(&[d.cc(y, z, u), d.rm(z, a), b]);
        mor_index
            .get(&(c.comp(y, z), u, comp))
            .copied()
            .ok_or_else(|| Error::internal("composite outside the total category"))
    })?
    .into_arc();
    let proj = Functor {
        source: total.clone(),
        target: d.base.clone(),
        obj: object_of.iter().map(|&(x, _)| x).collect(),
        mor: morphism_of.iter().map(|&(y, _, _)| y).collect(),
    };
    Ok(GrothCat { source: d.clone(), total, proj, object_of, morphism_of, obj_index, mor_index })
}

/// Whether `m = (y, a)` is cartesian over the base: its fiber component is
/// invertible. The universal-property characterization is recomputed and a
/// disagreement is reported as an internal error.
pub fn is_cartesian(g: &GrothCat, m: Mor) -> Result<bool> {
    let (y, _, a) = g.morphism_of[m];
    let by_component = g.source.fibers[g.source.base.dom(y)].is_iso(a);
    let by_universal = g.proj.is_cartesian(m);
    if by_component != by_universal {
        return Err(Error::internal(format!(
            "cartesian characterizations disagree at {}",
            g.total.mor_name(m)
        )));
    }
    Ok(by_component)
}

/// For every `(y, U)` with `U ∈ D(cod y)`, a cartesian morphism over `y`
/// with codomain `(cod y, U)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cleavage {
    pub lifts: HashMap<(Mor, Obj), Mor>,
}

impl Cleavage {
    pub fn lift(&self, y: Mor, u: Obj) -> Mor {
        self.lifts[&(y, u)]
    }
}

/// Chooses `(y, id_{D(y)U}): (Y, D(y)U) → (X, U)`.
pub fn canonical_cleavage(g: &GrothCat) -> Cleavage {
    let d = &*g.source;
    let c = &*d.base;
    let mut lifts = HashMap::new();
    for y in c.morphisms() {
        for u in d.fibers[c.cod(y)].objects() {
            let id = d.fibers[c.dom(y)].id(d.ro(y, u));
            lifts.insert((y, u), g.mor_index[&(y, u, id)]);
        }
    }
    Cleavage { lifts }
}

/// Seeds a sieve at `(X, U)` for each `R ∈ covers(X)` by the canonical lifts
/// of the members of `R`, then saturates.
pub fn giraud_topology(g: &GrothCat, j: &Topology, limits: &Limits) -> Result<Topology> {
    let cl = canonical_cleavage(g);
    let mut coverage = Vec::new();
    for (t, &(x, u)) in g.object_of.iter().enumerate() {
        for r in j.covers(x) {
            coverage.push(CoveringFamily { apex: t, arrows: r.members.iter().map(|&f| cl.lift(f, u)).collect() });
        }
    }
    saturate(&g.total, &coverage, limits)
}

/// The inclusion of the fiber `D(X)` into the total category:
/// `U ↦ (X, U)`, `a ↦ (id_X, u_{U'} ∘ a)`.
pub fn fiber_inclusion(g: &GrothCat, x: Obj) -> Functor {
    let d = &*g.source;
    let dx = &d.fibers[x];
    let idx = d.base.id(x);
    Functor {
        source: dx.clone(),
        target: g.total.clone(),
        obj: dx.objects().map(|u| g.object(x, u)).collect(),
        mor: dx.morphisms().map(|a| g.mor_index[&(idx, dx.cod(a), dx.comp(d.uc(x, dx.cod(a)), a))]).collect(),
    }
}

/// An object of the essential fibre of the projection at `X`: a total
/// object `A` with an isomorphism `α: X → p(A)` in the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibreObject {
    pub object: Obj,
    pub alpha: Mor,
}

/// One representative per isomorphism class of the essential fibre at `x`.
pub fn essential_fibre_representatives(g: &GrothCat, x: Obj) -> Vec<FibreObject> {
    let c = &*g.source.base;
    let t = &*g.total;
    let mut all = Vec::new();
    for a in t.objects() {
        for alpha in c.isos(x, g.proj.obj[a]) {
            all.push(FibreObject { object: a, alpha });
        }
    }
    let mut reps: Vec<FibreObject> = Vec::new();
    for fo in all {
        let known = reps.iter().any(|r| {
            t.isos(r.object, fo.object).any(|w| c.comp(g.proj.mor[w], r.alpha) == fo.alpha)
        });
        if !known {
            reps.push(fo);
        }
    }
    reps
}

/// `[g: Y → X] ↦ dom` of the chosen lift of `α ∘ g` at `A`; slice morphisms
/// go to the unique factorizations between lifts.
pub fn fiber_transport(g: &GrothCat, slice: &crate::site::SliceSite, fo: FibreObject, cl: &Cleavage) -> Result<Functor> {
    let c = &*g.source.base;
    let u = g.object_of[fo.object].1;
    let lift_of = |arrow: Mor| cl.lift(c.comp(fo.alpha, arrow), u);
    let obj = slice.arrow_of.iter().map(|&a| g.total.dom(lift_of(a))).collect();
    let mor = slice
        .triangle_of
        .iter()
        .map(|&(h, arrow)| {
            let m = lift_of(arrow);
            let n = lift_of(c.comp(arrow, h));
            g.proj
                .factor_through(m, n, h)
                .ok_or_else(|| Error::internal("cartesian lift does not factor uniquely"))
        })
        .collect::<Result<_>>()?;
    Ok(Functor { source: slice.category.clone(), target: g.total.clone(), obj, mor })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibrewiseInstance {
    pub base_object: Obj,
    pub fibre_object: FibreObject,
    pub is_stack: bool,
}

/// Both sides of the fiberwise stack criterion for `E` over the total
/// category: `E` is a stack for the Giraud topology iff every pullback of `E`
/// along a fiber transport is a stack on the corresponding slice site.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberwiseReport {
    pub total_is_stack: bool,
    pub fibrewise_is_stack: bool,
    pub instances: Vec<FibrewiseInstance>,
    pub agree: bool,
}

pub fn check_fiberwise_criterion(e: &IndexedCat, g: &GrothCat, j: &Topology, limits: &Limits) -> Result<FiberwiseReport> {
    if !crate::indexed::same_cat(&e.base, &g.total) {
        return Err(Error::Precondition("indexed category is not over the total category".into()));
    }
    let c = &*g.source.base;
    let jd = giraud_topology(g, j, limits)?;
    let total_is_stack = check_stack(e, &jd, limits)?.is_none();
    let cl = canonical_cleavage(g);
    let mut instances = Vec::new();
    for x in c.objects() {
        let slice = slice_site(j, x);
        for fo in essential_fibre_representatives(g, x) {
            let f = fiber_transport(g, &slice, fo, &cl)?;
            let pulled = pullback_indexed(e, &f);
            let is_stack = check_stack(&pulled, &slice.topology, limits)?.is_none();
            instances.push(FibrewiseInstance { base_object: x, fibre_object: fo, is_stack });
        }
    }
    let fibrewise_is_stack = instances.iter().all(|i| i.is_stack);
    Ok(FiberwiseReport { total_is_stack, fibrewise_is_stack, agree: total_is_stack == fibrewise_is_stack, instances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::{embed_discrete, validate_indexed, DiscretePresheaf};
    use crate::site::validate_topology;

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

    #[test]
    fn constant_terminal_total_is_base() {
        let c = arrow();
        let d = Arc::new(IndexedCat::constant(&c, &Arc::new(FinCat::terminal())));
        let g = grothendieck(&d, &Limits::default()).unwrap();
        assert!(g.total.validate().is_empty());
        assert!(g.proj.validate().is_empty());
        assert!(g.proj.is_fully_faithful());
        assert_eq!(g.total.num_objects(), 2);
        assert_eq!(g.total.num_morphisms(), 3);
    }

    #[test]
    fn elements_of_a_presheaf() {
        let c = arrow();
        let f = presheaf(&c, &[2, 3], &[("a_b", vec![0, 1, 1])]);
        let g = grothendieck(&Arc::new(embed_discrete(&f)), &Limits::default()).unwrap();
        assert_eq!(g.total.num_objects(), 5);
        // identities plus one arrow (a, F(i)t) → (b, t) per t ∈ F(b)
        assert_eq!(g.total.num_morphisms(), 5 + 3);
        assert!(g.total.validate().is_empty());
    }

    #[test]
    fn over_terminal_base_total_is_fiber() {
        let t = Arc::new(FinCat::terminal());
        let k = Arc::new(FinCat::chaotic(&["p", "q"]));
        let g = grothendieck(&Arc::new(IndexedCat::constant(&t, &k)), &Limits::default()).unwrap();
        assert!(fiber_inclusion(&g, 0).is_equivalence());
    }

    #[test]
    fn twisted_total_is_a_category() {
        let z2 = Arc::new(FinCat::cyclic_group(2));
        let mut d = IndexedCat::constant(&z2, &z2);
        d.compositor.insert((1, 1), vec![1]);
        assert!(validate_indexed(&d).is_empty());
        let g = grothendieck(&Arc::new(d), &Limits::default()).unwrap();
        assert!(g.total.validate().is_empty());
        assert_eq!(g.total.num_morphisms(), 4);
        for m in g.total.morphisms() {
            assert!(is_cartesian(&g, m).unwrap());
        }
    }

    #[test]
    fn cartesian_morphisms_and_cleavage() {
        let c = arrow();
        let k = Arc::new(FinCat::preorder(&["0", "1"], |i, j| i <= j));
        let d = Arc::new(IndexedCat::constant(&c, &k));
        let g = grothendieck(&d, &Limits::default()).unwrap();
        let cl = canonical_cleavage(&g);
        assert_eq!(cl, canonical_cleavage(&g));
        for &m in cl.lifts.values() {
            assert!(is_cartesian(&g, m).unwrap());
        }
        let non_iso = k.find_morphism("0_1").unwrap();
        let m = g.morphism(c.id(0), 1, non_iso).unwrap();
        assert!(!is_cartesian(&g, m).unwrap());
        for m in g.total.morphisms() {
            is_cartesian(&g, m).unwrap();
        }
    }

    #[test]
    fn giraud_topologies() {
        let c = arrow();
        let i = c.find_morphism("a_b").unwrap();
        let f = presheaf(&c, &[2, 2], &[("a_b", vec![1, 0])]);
        let d = Arc::new(embed_discrete(&f));
        let g = grothendieck(&d, &Limits::default()).unwrap();
        let trivial = giraud_topology(&g, &Topology::trivial(&c), &Limits::default()).unwrap();
        assert!(trivial.is_trivial());

        let j = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap();
        let jd = giraud_topology(&g, &j, &Limits::default()).unwrap();
        assert!(validate_topology(&jd, &Limits::default()).unwrap().is_empty());
        let top = g.object(1, 0);
        let lift = canonical_cleavage(&g).lift(i, 0);
        assert!(jd.covers(top).iter().any(|s| s.members == vec![lift]));
    }

    #[test]
    fn transport_recovers_dom() {
        let c = arrow();
        let i = c.find_morphism("a_b").unwrap();
        let j = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap();
        let d = Arc::new(IndexedCat::constant(&c, &Arc::new(FinCat::chaotic(&["p", "q"]))));
        let g = grothendieck(&d, &Limits::default()).unwrap();
        let cl = canonical_cleavage(&g);
        for x in c.objects() {
            let slice = slice_site(&j, x);
            let reps = essential_fibre_representatives(&g, x);
            assert_eq!(reps.len(), 1);
            for fo in reps {
                let f = fiber_transport(&g, &slice, fo, &cl).unwrap();
                assert!(f.validate().is_empty());
                let composed = g.proj.after(&f);
                assert_eq!((composed.obj, composed.mor), (slice.dom.obj.clone(), slice.dom.mor.clone()));
            }
        }
    }

    #[test]
    fn fiberwise_criterion_on_small_instances() {
        let c = arrow();
        let i = c.find_morphism("a_b").unwrap();
        let j = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap();
        let d = Arc::new(embed_discrete(&presheaf(&c, &[2, 2], &[("a_b", vec![1, 0])])));
        let g = grothendieck(&d, &Limits::default()).unwrap();
        let t = Arc::new(FinCat::terminal());
        let e = IndexedCat::constant(&g.total, &t);
        let r = check_fiberwise_criterion(&e, &g, &j, &Limits::default()).unwrap();
        assert!(r.total_is_stack && r.fibrewise_is_stack);

        // a non-stack over the total category: two points over (b, *) that
        // restrict to one point.
        let total = g.total.clone();
        let sizes: Vec<usize> = total.objects().map(|o| if g.object_of[o].0 == 1 { 2 } else { 1 }).collect();
        let values = sizes.iter().map(|&n| (0..n).map(|k| k.to_string()).collect()).collect();
        let actions = total.morphisms().map(|m| if total.is_identity(m) { (0..sizes[total.dom(m)]).collect() } else { vec![0; sizes[total.cod(m)]] }).collect();
        let bad = DiscretePresheaf { base: total.clone(), values, actions };
        assert!(bad.validate().is_empty());
        let r = check_fiberwise_criterion(&embed_discrete(&bad), &g, &j, &Limits::default()).unwrap();
        assert!(!r.total_is_stack && !r.fibrewise_is_stack);
    }
}
