//! Indexed fibrations over an indexed category `D` and indexed categories
//! over the total category of `D`: the essential-fibre construction, the
//! fiberwise Grothendieck construction, their unit and counit, transposes,
//! and the behavior of both under stackification.
//!
//! Lifts are exact: a cartesian lift of `x: U → p(A)` is a morphism `m` with
//! `p(m) = x` on the nose.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descent::{check_stack, StackWitness};
use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Mor, Obj};
use crate::groth::{canonical_cleavage, fiber_inclusion, giraud_topology, grothendieck, GrothCat};
use crate::indexed::{
    compose_indexed, find_invertible_modification, is_indexed_equivalence, pullback_indexed, same_indexed, IndexedCat,
    IndexedFun, Modification,
};
use crate::site::{validate_topology, Topology};
use crate::stackify::{plus_fun, stackify};

fn inv(c: &FinCat, m: Mor) -> Result<Mor> {
    c.inverse(m).ok_or_else(|| Error::internal(format!("{} is not invertible", c.mor_name(m))))
}

fn factor(p: &Functor, m: Mor, n: Mor, v: Mor) -> Result<Mor> {
    p.factor_through(m, n, v)
        .ok_or_else(|| Error::internal("no unique factorization through a cartesian morphism"))
}

fn missing(what: &str) -> Error {
    Error::internal(format!("{what} not found"))
}

/// Chosen cartesian lifts of `p: E → B`, keyed by `(x, A)` for
/// `x: U → p(A)`. The lift `m` has `p(m) = x` and `cod m = A`.
pub type Lifts = HashMap<(Mor, Obj), Mor>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftChoice {
    First,
    Last,
}

fn cartesian_flags(p: &Functor) -> Vec<bool> {
    p.source.morphisms().map(|m| p.is_cartesian(m)).collect()
}

fn cleave_with(p: &Functor, flags: &[bool], choice: LiftChoice) -> std::result::Result<Lifts, (Mor, Obj)> {
    let (e, b) = (&*p.source, &*p.target);
    let mut lifts = HashMap::new();
    for a in e.objects() {
        for &x in b.incoming(p.obj[a]) {
            let mut cands = e.incoming(a).iter().copied().filter(|&m| flags[m] && p.mor[m] == x);
            let pick = match choice {
                LiftChoice::First => cands.next(),
                LiftChoice::Last => cands.last(),
            };
            match pick {
                Some(m) => {
                    lifts.insert((x, a), m);
                }
                None => return Err((x, a)),
            }
        }
    }
    Ok(lifts)
}

/// Chooses a cartesian lift for every `(x, A)`, or returns a pair without one.
pub fn cleave(p: &Functor, choice: LiftChoice) -> std::result::Result<Lifts, (Mor, Obj)> {
    cleave_with(p, &cartesian_flags(p), choice)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FibrationFailure {
    NoLift { base_object: Obj, morphism: Mor, object: Obj, detail: String },
    NotPreserved { restriction: Mor, morphism: Mor, detail: String },
}

#[derive(Clone, Debug)]
pub struct IndexedFibration {
    pub p: IndexedFun,
    /// Lifts for `p^X`, one table per base object.
    pub lifts: Vec<Lifts>,
}

impl IndexedFibration {
    pub fn lift(&self, x: Obj, m: Mor, a: Obj) -> Mor {
        self.lifts[x][&(m, a)]
    }
}

/// Every component is a fibration and every restriction of the source sends
/// cartesian morphisms to cartesian morphisms.
pub fn is_indexed_fibration(p: &IndexedFun) -> std::result::Result<IndexedFibration, FibrationFailure> {
    indexed_fibration_with(p, LiftChoice::First)
}

pub fn indexed_fibration_with(p: &IndexedFun, choice: LiftChoice) -> std::result::Result<IndexedFibration, FibrationFailure> {
    let c = &*p.source.base;
    let flags: Vec<Vec<bool>> = c.objects().map(|x| cartesian_flags(&p.components[x])).collect();
    let mut lifts = Vec::new();
    for x in c.objects() {
        match cleave_with(&p.components[x], &flags[x], choice) {
            Ok(l) => lifts.push(l),
            Err((m, a)) => {
                let detail = format!(
                    "no cartesian lift of {} at {} over {}",
                    p.target.fibers[x].mor_name(m),
                    p.source.fibers[x].obj_name(a),
                    c.obj_name(x)
                );
                return Err(FibrationFailure::NoLift { base_object: x, morphism: m, object: a, detail });
            }
        }
    }
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let r = &p.source.restrict[y];
        for m in p.source.fibers[x].morphisms() {
            if flags[x][m] && !flags[yy][r.mor[m]] {
                let detail = format!(
                    "restriction along {} sends cartesian {} to a non-cartesian morphism",
                    c.mor_name(y),
                    p.source.fibers[x].mor_name(m)
                );
                return Err(FibrationFailure::NotPreserved { restriction: y, morphism: m, detail });
            }
        }
    }
    Ok(IndexedFibration { p: p.clone(), lifts })
}

/// The essential fibre of `p` at `U`: objects `(A, α)` with `α: U → p(A)`
/// invertible, morphisms `ω: A → B` with `p(ω) ∘ α = β`.
#[derive(Clone, Debug)]
pub struct EssentialFibre {
    pub category: Arc<FinCat>,
    pub objects: Vec<(Obj, Mor)>,
    /// The underlying morphism of each morphism.
    pub morphisms: Vec<Mor>,
    obj_index: HashMap<(Obj, Mor), Obj>,
    mor_index: HashMap<(Obj, Mor), Mor>,
}

impl EssentialFibre {
    pub fn object(&self, a: Obj, alpha: Mor) -> Option<Obj> {
        self.obj_index.get(&(a, alpha)).copied()
    }

    /// The morphism with underlying `omega` out of `source`; its target is
    /// determined.
    pub fn morphism(&self, source: Obj, omega: Mor) -> Option<Mor> {
        self.mor_index.get(&(source, omega)).copied()
    }
}

pub fn essential_fibre(p: &Functor, u: Obj, limits: &Limits) -> Result<EssentialFibre> {
    let (e, b) = (&*p.source, &*p.target);
    let mut objects = Vec::new();
    let mut names = Vec::new();
    for a in e.objects() {
        for alpha in b.isos(u, p.obj[a]) {
            objects.push((a, alpha));
            names.push(format!("{}:{}", e.obj_name(a), b.mor_name(alpha)));
        }
    }
    let obj_index: HashMap<(Obj, Mor), Obj> = objects.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut morphisms = Vec::new();
    let mut sources = Vec::new();
    let mut arrows = Vec::new();
    let mut mor_index = HashMap::new();
    for (s, &(a, alpha)) in objects.iter().enumerate() {
        for &w in e.outgoing(a) {
            if let Some(&t) = obj_index.get(&(e.cod(w), b.comp(p.mor[w], alpha))) {
                mor_index.insert((s, w), morphisms.len());
                arrows.push((format!("{}@{}", e.mor_name(w), names[s]), s, t));
                morphisms.push(w);
                sources.push(s);
            }
        }
    }
    let identity = objects.iter().enumerate().map(|(s, &(a, _))| mor_index[&(s, e.id(a))]).collect();
    let category = FinCat::build(names, arrows, identity, |second, first| {
        mor_index
            .get(&(sources[first], e.comp(morphisms[second], morphisms[first])))
            .copied()
            .ok_or_else(|| missing("essential fibre composite"))
    })?
    .into_arc();
    category.check_homset_cap(limits)?;
    Ok(EssentialFibre { category, objects, morphisms, obj_index, mor_index })
}

/// The indexed category over the total category of `D` whose fibre at
/// `(X, U)` is the essential fibre of `p^X` at `U`.
#[derive(Clone, Debug)]
pub struct EssentialFibres {
    pub groth: Arc<GrothCat>,
    pub fibres: Vec<EssentialFibre>,
    pub indexed: Arc<IndexedCat>,
    /// The lift used to restrict each fibre object along each total morphism,
    /// keyed by `(t, object of the fibre at cod t)`.
    pub lifts: HashMap<(Mor, Obj), Mor>,
}

pub fn essential_fibres(p: &IndexedFibration, g: &Arc<GrothCat>, limits: &Limits) -> Result<EssentialFibres> {
    if !same_indexed(&p.p.target, &g.source) {
        return Err(Error::Precondition("fibration target differs from the indexed category of the total category".into()));
    }
    let (d, e) = (&*g.source, &*p.p.source);
    let c = &*d.base;
    let total = &*g.total;
    let fibres: Vec<EssentialFibre> = total
        .objects()
        .map(|o| {
            let (x, u) = g.object_of[o];
            essential_fibre(&p.p.components[x], u, limits)
        })
        .collect::<Result<_>>()?;

    let mut lifts = HashMap::new();
    let mut restrict = Vec::with_capacity(total.num_morphisms());
    for t in total.morphisms() {
        let (y, _, a) = g.morphism_of[t];
        let (src, tgt) = (total.cod(t), total.dom(t));
        let yy = c.dom(y);
        let v = g.object_of[tgt].1;
        let (dy, ey, py) = (&*d.fibers[yy], &*e.fibers[yy], &p.p.components[yy]);
        let (fs, ft) = (&fibres[src], &fibres[tgt]);
        let mut obj = Vec::with_capacity(fs.objects.len());
        for (i, &(aa, alpha)) in fs.objects.iter().enumerate() {
            let k = dy.comp_all(&[p.p.cell(y, aa), d.rm(y, alpha), a]);
            let m = p.lift(yy, k, e.ro(y, aa));
            lifts.insert((t, i), m);
            obj.push(ft.object(ey.dom(m), dy.id(v)).ok_or_else(|| missing("restricted fibre object"))?);
        }
        let mut mor = Vec::with_capacity(fs.morphisms.len());
        for (j, &w) in fs.morphisms.iter().enumerate() {
            let (s0, s1) = (fs.category.dom(j), fs.category.cod(j));
            let n = ey.comp(e.rm(y, w), lifts[&(t, s0)]);
            let w2 = factor(py, lifts[&(t, s1)], n, dy.id(v))?;
            mor.push(ft.morphism(obj[s0], w2).ok_or_else(|| missing("restricted fibre morphism"))?);
        }
        restrict.push(Functor { source: fs.category.clone(), target: ft.category.clone(), obj, mor });
    }

    let mut compositor = HashMap::new();
    for t in total.morphisms() {
        for &s in total.incoming(total.dom(t)) {
            let ts = total.comp(t, s);
            let o = total.dom(s);
            let (y, _, _) = g.morphism_of[t];
            let (z, _, _) = g.morphism_of[s];
            let zz = c.dom(z);
            let w = g.object_of[o].1;
            let (dz, ez, pz) = (&*d.fibers[zz], &*e.fibers[zz], &p.p.components[zz]);
            let comps = fibres[total.cod(t)]
                .objects
                .iter()
                .enumerate()
                .map(|(i, &(aa, _))| {
                    let i1 = restrict[t].obj[i];
                    let n = ez.comp_all(&[e.cc(y, z, aa), e.rm(z, lifts[&(t, i)]), lifts[&(s, i1)]]);
                    let k = factor(pz, lifts[&(ts, i)], n, dz.id(w))?;
                    fibres[o].morphism(restrict[s].obj[i1], k).ok_or_else(|| missing("compositor component"))
                })
                .collect::<Result<Vec<_>>>()?;
            compositor.insert((t, s), comps);
        }
    }

    let unitor = total
        .objects()
        .map(|o| {
            let (x, _) = g.object_of[o];
            let i = total.id(o);
            let dx = &*d.fibers[x];
            fibres[o]
                .objects
                .iter()
                .enumerate()
                .map(|(idx, &(aa, alpha))| {
                    let k = factor(&p.p.components[x], lifts[&(i, idx)], e.uc(x, aa), inv(dx, alpha)?)?;
                    fibres[o].morphism(idx, k).ok_or_else(|| missing("unitor component"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let indexed = Arc::new(IndexedCat {
        base: g.total.clone(),
        fibers: fibres.iter().map(|f| f.category.clone()).collect(),
        restrict,
        compositor,
        unitor,
    });
    Ok(EssentialFibres { groth: g.clone(), fibres, indexed, lifts })
}

/// The identity-on-fibres comparison between two essential-fibre indexed
/// categories of the same fibration built from different lifts.
pub fn compare_lifts(p: &IndexedFibration, a: &EssentialFibres, b: &EssentialFibres) -> Result<IndexedFun> {
    let g = &*a.groth;
    let total = &*g.total;
    let components = total
        .objects()
        .map(|o| Functor {
            source: a.fibres[o].category.clone(),
            target: b.fibres[o].category.clone(),
            obj: a.fibres[o].category.objects().collect(),
            mor: a.fibres[o].category.morphisms().collect(),
        })
        .collect();
    let cells = total
        .morphisms()
        .map(|t| {
            let (y, _, _) = g.morphism_of[t];
            let yy = g.source.base.dom(y);
            let v = g.object_of[total.dom(t)].1;
            let id = g.source.fibers[yy].id(v);
            (0..a.fibres[total.cod(t)].objects.len())
                .map(|idx| {
                    let w = factor(&p.p.components[yy], a.lifts[&(t, idx)], b.lifts[&(t, idx)], id)?;
                    b.fibres[total.dom(t)]
                        .morphism(b.indexed.restrict[t].obj[idx], w)
                        .ok_or_else(|| missing("comparison cell"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(IndexedFun { source: a.indexed.clone(), target: b.indexed.clone(), components, cells })
}

/// The fibration over `D` whose component at `X` is the projection of the
/// Grothendieck construction of `A` restricted to the fiber over `X`.
#[derive(Clone, Debug)]
pub struct FiberwiseGroth {
    pub groth: Arc<GrothCat>,
    pub pieces: Vec<GrothCat>,
    pub fibration: IndexedFibration,
}

pub fn fiberwise_grothendieck(a: &Arc<IndexedCat>, g: &Arc<GrothCat>, limits: &Limits) -> Result<FiberwiseGroth> {
    if !crate::indexed::same_cat(&a.base, &g.total) {
        return Err(Error::Precondition("indexed category is not over the total category".into()));
    }
    let d = &g.source;
    let c = &*d.base;
    let total = &*g.total;
    let incl: Vec<Functor> = c.objects().map(|x| fiber_inclusion(g, x)).collect();
    let pieces: Vec<GrothCat> = c
        .objects()
        .map(|x| grothendieck(&Arc::new(pullback_indexed(a, &incl[x])), limits))
        .collect::<Result<_>>()?;
    let cl = canonical_cleavage(g);
    let mismatch = || Error::internal("lifted morphisms disagree in the total category");

    let mut restrict = Vec::with_capacity(c.num_morphisms());
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let (gx, gy) = (&pieces[x], &pieces[yy]);
        let obj = gx
            .object_of
            .iter()
            .map(|&(u, xo)| gy.object(d.ro(y, u), a.ro(cl.lift(y, u), xo)))
            .collect();
        let mor = gx
            .morphism_of
            .iter()
            .map(|&(aa, xo, f)| {
                let dx = &*d.fibers[x];
                let (l_u, l_u1) = (cl.lift(y, dx.cod(aa)), cl.lift(y, dx.dom(aa)));
                let (ia, iya) = (incl[x].mor[aa], incl[yy].mor[d.rm(y, aa)]);
                if total.comp(ia, l_u1) != total.comp(l_u, iya) {
                    return Err(mismatch());
                }
                let fib = &*a.fibers[total.dom(l_u1)];
                let f2 = fib.comp_all(&[inv(fib, a.cc(l_u, iya, xo))?, a.cc(ia, l_u1, xo), a.rm(l_u1, f)]);
                gy.morphism(d.rm(y, aa), a.ro(l_u, xo), f2).ok_or_else(|| missing("restricted total morphism"))
            })
            .collect::<Result<_>>()?;
        restrict.push(Functor { source: gx.total.clone(), target: gy.total.clone(), obj, mor });
    }

    let mut compositor = HashMap::new();
    for y in c.morphisms() {
        for &z in c.incoming(c.dom(y)) {
            let zz = c.dom(z);
            let comps = pieces[c.cod(y)]
                .object_of
                .iter()
                .map(|&(u, xo)| {
                    let cd = d.cc(y, z, u);
                    let (l_y, l_z, l_yz) = (cl.lift(y, u), cl.lift(z, d.ro(y, u)), cl.lift(c.comp(y, z), u));
                    let ic = incl[zz].mor[cd];
                    if total.comp(l_y, l_z) != total.comp(l_yz, ic) {
                        return Err(mismatch());
                    }
                    let fib = &*a.fibers[total.dom(l_z)];
                    let f = fib.comp(inv(fib, a.cc(l_yz, ic, xo))?, a.cc(l_y, l_z, xo));
                    pieces[zz].morphism(cd, a.ro(l_yz, xo), f).ok_or_else(|| missing("compositor component"))
                })
                .collect::<Result<Vec<_>>>()?;
            compositor.insert((y, z), comps);
        }
    }

    let unitor = c
        .objects()
        .map(|x| {
            pieces[x]
                .object_of
                .iter()
                .map(|&(u, xo)| {
                    let l = cl.lift(c.id(x), u);
                    let uu = d.uc(x, u);
                    let iu = incl[x].mor[uu];
                    let o = g.object(x, u);
                    if total.comp(l, iu) != total.id(o) {
                        return Err(mismatch());
                    }
                    let fib = &*a.fibers[o];
                    let f = fib.comp(inv(fib, a.cc(l, iu, xo))?, a.uc(o, xo));
                    pieces[x].morphism(uu, a.ro(l, xo), f).ok_or_else(|| missing("unitor component"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let source = Arc::new(IndexedCat {
        base: d.base.clone(),
        fibers: pieces.iter().map(|p| p.total.clone()).collect(),
        restrict,
        compositor,
        unitor,
    });
    let cells = c
        .morphisms()
        .map(|y| {
            let dy = &*d.fibers[c.dom(y)];
            pieces[c.cod(y)].object_of.iter().map(|&(u, _)| dy.id(d.ro(y, u))).collect()
        })
        .collect();
    let p = IndexedFun {
        source,
        target: d.clone(),
        components: pieces.iter().map(|p| p.proj.clone()).collect(),
        cells,
    };
    let fibration = is_indexed_fibration(&p).map_err(|w| Error::internal(format!("fiberwise projection: {w:?}")))?;
    Ok(FiberwiseGroth { groth: g.clone(), pieces, fibration })
}

/// `η_A: A → R(L(A))`, sending `x ∈ A(X, U)` to `[(U, x), id_U]`.
#[derive(Clone, Debug)]
pub struct Unit {
    pub left: FiberwiseGroth,
    pub right: EssentialFibres,
    pub eta: IndexedFun,
}

pub fn unit_eta(a: &Arc<IndexedCat>, g: &Arc<GrothCat>, limits: &Limits) -> Result<Unit> {
    let left = fiberwise_grothendieck(a, g, limits)?;
    let right = essential_fibres(&left.fibration, g, limits)?;
    let d = &*g.source;
    let c = &*d.base;
    let total = &*g.total;
    let cl = canonical_cleavage(g);
    let incl: Vec<Functor> = c.objects().map(|x| fiber_inclusion(g, x)).collect();
    let components: Vec<Functor> = total
        .objects()
        .map(|o| {
            let (x, u) = g.object_of[o];
            let (dx, fib, rf) = (&*d.fibers[x], &*a.fibers[o], &right.fibres[o]);
            let obj: Vec<Obj> = fib
                .objects()
                .map(|xo| rf.object(left.pieces[x].object(u, xo), dx.id(u)).ok_or_else(|| missing("unit object")))
                .collect::<Result<_>>()?;
            let mor = fib
                .morphisms()
                .map(|f| {
                    let x2 = fib.cod(f);
                    let w = left.pieces[x]
                        .morphism(dx.id(u), x2, fib.comp(a.uc(o, x2), f))
                        .ok_or_else(|| missing("unit morphism"))?;
                    rf.morphism(obj[fib.dom(f)], w).ok_or_else(|| missing("unit fibre morphism"))
                })
                .collect::<Result<_>>()?;
            Ok(Functor { source: a.fibers[o].clone(), target: rf.category.clone(), obj, mor })
        })
        .collect::<Result<_>>()?;
    let cells = total
        .morphisms()
        .map(|t| {
            let (y, u, aa) = g.morphism_of[t];
            let (o, o1) = (total.cod(t), total.dom(t));
            let yy = c.dom(y);
            let v = g.object_of[o1].1;
            let l_u = cl.lift(y, u);
            let iya = incl[yy].mor[aa];
            if total.comp(l_u, iya) != t {
                return Err(Error::internal("canonical lift does not factor the total morphism"));
            }
            let fib1 = &*a.fibers[o1];
            let gy = &left.pieces[yy];
            a.fibers[o]
                .objects()
                .map(|xo| {
                    let idx = components[o].obj[xo];
                    let n = gy
                        .morphism(aa, a.ro(l_u, xo), inv(fib1, a.cc(l_u, iya, xo))?)
                        .ok_or_else(|| missing("unit comparison"))?;
                    let w = factor(&gy.proj, n, right.lifts[&(t, idx)], d.fibers[yy].id(v))?;
                    right.fibres[o1]
                        .morphism(right.indexed.restrict[t].obj[idx], w)
                        .ok_or_else(|| missing("unit cell"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let eta = IndexedFun { source: a.clone(), target: right.indexed.clone(), components, cells };
    Ok(Unit { left, right, eta })
}

/// `ε_p: L(R(p)) → E`, sending `(U, [A, α])` to `A`.
#[derive(Clone, Debug)]
pub struct Counit {
    pub right: EssentialFibres,
    pub left: FiberwiseGroth,
    pub eps: IndexedFun,
}

pub fn counit_eps(p: &IndexedFibration, g: &Arc<GrothCat>, limits: &Limits) -> Result<Counit> {
    let right = essential_fibres(p, g, limits)?;
    let left = fiberwise_grothendieck(&right.indexed, g, limits)?;
    let d = &*g.source;
    let e = &*p.p.source;
    let c = &*d.base;
    let cl = canonical_cleavage(g);
    let components = c
        .objects()
        .map(|x| {
            let gx = &left.pieces[x];
            let ex = &*e.fibers[x];
            let incl = fiber_inclusion(g, x);
            let obj = gx.object_of.iter().map(|&(u, eo)| right.fibres[g.object(x, u)].objects[eo].0).collect();
            let mor = gx
                .morphism_of
                .iter()
                .map(|&(aa, eo, w)| {
                    let dx = &*d.fibers[x];
                    let (u, u1) = (dx.cod(aa), dx.dom(aa));
                    let under = right.fibres[g.object(x, u1)].morphisms[w];
                    let a0 = right.fibres[g.object(x, u)].objects[eo].0;
                    let mt = right.lifts[&(incl.mor[aa], eo)];
                    Ok(ex.comp_all(&[inv(ex, e.uc(x, a0))?, mt, under]))
                })
                .collect::<Result<_>>()?;
            Ok(Functor { source: gx.total.clone(), target: e.fibers[x].clone(), obj, mor })
        })
        .collect::<Result<_>>()?;
    let cells = c
        .morphisms()
        .map(|y| {
            let ey = &*e.fibers[c.dom(y)];
            left.pieces[c.cod(y)]
                .object_of
                .iter()
                .map(|&(u, eo)| inv(ey, right.lifts[&(cl.lift(y, u), eo)]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let eps = IndexedFun { source: left.fibration.p.source.clone(), target: p.p.source.clone(), components, cells };
    Ok(Counit { right, left, eps })
}

/// `H^♭ = ε_p ∘ L(H)` for `H: A → R(p)`; `left` is `L(A)`.
pub fn flat(h: &IndexedFun, left: &FiberwiseGroth, counit: &Counit) -> Result<IndexedFun> {
    let g = &*left.groth;
    let d = &*g.source;
    let c = &*d.base;
    let r = &*counit.right.indexed;
    let a = &*h.source;
    let cl = canonical_cleavage(g);
    let to = &counit.left.pieces;
    let components = c
        .objects()
        .map(|x| {
            let (gx, tx) = (&left.pieces[x], &to[x]);
            let incl = fiber_inclusion(g, x);
            let obj = gx.object_of.iter().map(|&(u, xo)| tx.object(u, h.fo(g.object(x, u), xo))).collect();
            let mor = gx
                .morphism_of
                .iter()
                .map(|&(aa, xo, f)| {
                    let t = incl.mor[aa];
                    let (o, o1) = (g.total.cod(t), g.total.dom(t));
                    let fib = &*r.fibers[o1];
                    let f2 = fib.comp(inv(fib, h.cell(t, xo))?, h.fm(o1, f));
                    tx.morphism(aa, h.fo(o, xo), f2).ok_or_else(|| missing("transposed morphism"))
                })
                .collect::<Result<_>>()?;
            Ok(Functor { source: gx.total.clone(), target: tx.total.clone(), obj, mor })
        })
        .collect::<Result<_>>()?;
    let cells = c
        .morphisms()
        .map(|y| {
            let yy = c.dom(y);
            left.pieces[c.cod(y)]
                .object_of
                .iter()
                .map(|&(u, xo)| {
                    let l = cl.lift(y, u);
                    let o1 = g.total.dom(l);
                    let target = h.fo(o1, a.ro(l, xo));
                    let f = r.fibers[o1].comp(r.uc(o1, target), h.cell(l, xo));
                    to[yy].morphism(d.fibers[yy].id(d.ro(y, u)), target, f).ok_or_else(|| missing("transposed cell"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let lh = IndexedFun {
        source: left.fibration.p.source.clone(),
        target: counit.left.fibration.p.source.clone(),
        components,
        cells,
    };
    compose_indexed(&counit.eps, &lh)
}

/// `(F, φ)^♯ = R(F, φ) ∘ η_A` for `F: L(A) → E` and an invertible
/// `φ: p ∘ F ⇒ p_A`.
pub fn sharp(f: &IndexedFun, phi: &Modification, unit: &Unit, right: &EssentialFibres, p: &IndexedFibration) -> Result<IndexedFun> {
    let g = &*unit.right.groth;
    let d = &*g.source;
    let e = &*p.p.source;
    let c = &*d.base;
    let total = &*g.total;
    let from = &unit.right;
    let components: Vec<Functor> = total
        .objects()
        .map(|o| {
            let (x, _) = g.object_of[o];
            let dx = &*d.fibers[x];
            let (fs, ft) = (&from.fibres[o], &right.fibres[o]);
            let obj: Vec<Obj> = fs
                .objects
                .iter()
                .map(|&(b, alpha)| {
                    let alpha2 = dx.comp(inv(dx, phi.components[x][b])?, alpha);
                    ft.object(f.fo(x, b), alpha2).ok_or_else(|| missing("transported fibre object"))
                })
                .collect::<Result<_>>()?;
            let mor = fs
                .morphisms
                .iter()
                .enumerate()
                .map(|(j, &w)| ft.morphism(obj[fs.category.dom(j)], f.fm(x, w)).ok_or_else(|| missing("transported fibre morphism")))
                .collect::<Result<_>>()?;
            Ok(Functor { source: fs.category.clone(), target: ft.category.clone(), obj, mor })
        })
        .collect::<Result<_>>()?;
    let cells = total
        .morphisms()
        .map(|t| {
            let (y, _, _) = g.morphism_of[t];
            let yy = c.dom(y);
            let ey = &*e.fibers[yy];
            let (o, o1) = (total.cod(t), total.dom(t));
            from.fibres[o]
                .objects
                .iter()
                .enumerate()
                .map(|(idx, &(b, _))| {
                    let i2 = components[o].obj[idx];
                    let m1 = right.lifts[&(t, i2)];
                    let m2 = from.lifts[&(t, idx)];
                    let b2 = unit.left.fibration.p.source.fibers[yy].dom(m2);
                    let n = ey.comp(inv(ey, f.cell(y, b))?, f.fm(yy, m2));
                    let v = factor(&p.p.components[yy], m1, n, phi.components[yy][b2])?;
                    right.fibres[o1]
                        .morphism(right.indexed.restrict[t].obj[i2], inv(ey, v)?)
                        .ok_or_else(|| missing("transported cell"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let rf = IndexedFun { source: from.indexed.clone(), target: right.indexed.clone(), components, cells };
    compose_indexed(&rf, &unit.eta)
}

/// The identity modification of `f`.
pub fn identity_modification(f: &IndexedFun) -> Modification {
    let t = &*f.target;
    Modification {
        components: f
            .components
            .iter()
            .enumerate()
            .map(|(x, comp)| comp.obj.iter().map(|&b| t.fibers[x].id(b)).collect())
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiequivalenceReport {
    pub unit_valid: bool,
    pub unit_equivalence: bool,
    pub counit_valid: bool,
    pub counit_equivalence: bool,
    pub counit_over_base: bool,
    pub flat_then_sharp: bool,
    pub sharp_then_flat: bool,
}

impl BiequivalenceReport {
    pub fn passed(&self) -> bool {
        self.unit_valid
            && self.unit_equivalence
            && self.counit_valid
            && self.counit_equivalence
            && self.counit_over_base
            && self.flat_then_sharp
            && self.sharp_then_flat
    }
}

/// Unit at `R(p)`, counit at `p`, and both round trips of the transposes
/// (starting from the identity of `R(p)` and from the counit).
pub fn check_biequivalence(p: &IndexedFibration, limits: &Limits) -> Result<BiequivalenceReport> {
    let g = Arc::new(grothendieck(&p.p.target, limits)?);
    let counit = counit_eps(p, &g, limits)?;
    let a = counit.right.indexed.clone();
    let unit = unit_eta(&a, &g, limits)?;
    let cap = limits.max_descent;

    let p_eps = compose_indexed(&p.p, &counit.eps)?;
    let phi_eps = find_invertible_modification(&p_eps, &counit.left.fibration.p, cap)?;

    let id = IndexedFun::identity(&a);
    let flat_id = flat(&id, &unit.left, &counit)?;
    let flat_then_sharp = match find_invertible_modification(&compose_indexed(&p.p, &flat_id)?, &unit.left.fibration.p, cap)? {
        Some(phi) => {
            let back = sharp(&flat_id, &phi, &unit, &counit.right, p)?;
            back.validate().is_empty() && find_invertible_modification(&back, &id, cap)?.is_some()
        }
        None => false,
    };
    let sharp_then_flat = match &phi_eps {
        Some(phi) => {
            let sh = sharp(&counit.eps, phi, &unit, &counit.right, p)?;
            let back = flat(&sh, &unit.left, &counit)?;
            sh.validate().is_empty()
                && back.validate().is_empty()
                && find_invertible_modification(&back, &counit.eps, cap)?.is_some()
        }
        None => false,
    };
    Ok(BiequivalenceReport {
        unit_valid: unit.eta.validate().is_empty(),
        unit_equivalence: is_indexed_equivalence(&unit.eta),
        counit_valid: counit.eps.validate().is_empty(),
        counit_equivalence: is_indexed_equivalence(&counit.eps),
        counit_over_base: phi_eps.is_some(),
        flat_then_sharp,
        sharp_then_flat,
    })
}

/// The fiberwise iso-comma of `f: A → T` and `g: B → T`: objects
/// `(a, b, θ: g(b) → f(a))` with `θ` invertible, morphisms `(ω, β)` with
/// `f(ω) ∘ θ = θ' ∘ g(β)`.
#[derive(Clone, Debug)]
pub struct IsoComma {
    pub category: Arc<FinCat>,
    pub objects: Vec<(Obj, Obj, Mor)>,
    pub morphisms: Vec<(Mor, Mor)>,
    obj_index: HashMap<(Obj, Obj, Mor), Obj>,
    mor_index: HashMap<(Obj, Obj, Mor, Mor), Mor>,
}

impl IsoComma {
    pub fn object(&self, a: Obj, b: Obj, theta: Mor) -> Option<Obj> {
        self.obj_index.get(&(a, b, theta)).copied()
    }

    pub fn morphism(&self, source: Obj, target: Obj, omega: Mor, beta: Mor) -> Option<Mor> {
        self.mor_index.get(&(source, target, omega, beta)).copied()
    }
}

pub fn iso_comma(f: &Functor, g: &Functor, limits: &Limits) -> Result<IsoComma> {
    if !crate::indexed::same_cat(&f.target, &g.target) {
        return Err(Error::Precondition("iso-comma of functors with different targets".into()));
    }
    let (sa, sb, t) = (&*f.source, &*g.source, &*f.target);
    let mut objects = Vec::new();
    let mut names = Vec::new();
    for a in sa.objects() {
        for b in sb.objects() {
            for theta in t.isos(g.obj[b], f.obj[a]) {
                objects.push((a, b, theta));
                names.push(format!("{}|{}|{}", sa.obj_name(a), sb.obj_name(b), t.mor_name(theta)));
            }
        }
    }
    let obj_index: HashMap<(Obj, Obj, Mor), Obj> = objects.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut morphisms = Vec::new();
    let mut ends = Vec::new();
    let mut arrows = Vec::new();
    let mut mor_index = HashMap::new();
    for (s, &(a, b, theta)) in objects.iter().enumerate() {
        for &w in sa.outgoing(a) {
            for &beta in sb.outgoing(b) {
                let lhs = t.comp(f.mor[w], theta);
                for theta2 in t.isos(g.obj[sb.cod(beta)], f.obj[sa.cod(w)]) {
                    if t.comp(theta2, g.mor[beta]) != lhs {
                        continue;
                    }
                    let tg = obj_index[&(sa.cod(w), sb.cod(beta), theta2)];
                    mor_index.insert((s, tg, w, beta), morphisms.len());
                    arrows.push((format!("{}|{}#{}>{}", sa.mor_name(w), sb.mor_name(beta), s, tg), s, tg));
                    morphisms.push((w, beta));
                    ends.push((s, tg));
                }
            }
        }
    }
    let identity = objects
        .iter()
        .enumerate()
        .map(|(s, &(a, b, _))| mor_index[&(s, s, sa.id(a), sb.id(b))])
        .collect();
    let category = FinCat::build(names, arrows, identity, |second, first| {
        let (w2, b2) = morphisms[second];
        let (w1, b1) = morphisms[first];
        mor_index
            .get(&(ends[first].0, ends[second].1, sa.comp(w2, w1), sb.comp(b2, b1)))
            .copied()
            .ok_or_else(|| missing("iso-comma composite"))
    })?
    .into_arc();
    category.check_homset_cap(limits)?;
    Ok(IsoComma { category, objects, morphisms, obj_index, mor_index })
}

/// The pseudopullback of `q: S → T` along `e: D → T`, computed fiberwise as
/// an iso-comma, together with its projection to `D`.
pub fn pseudopullback(q: &IndexedFun, e: &IndexedFun, limits: &Limits) -> Result<IndexedFun> {
    if !same_indexed(&q.target, &e.target) {
        return Err(Error::Precondition("pseudopullback of indexed functors with different targets".into()));
    }
    let (s, d, t) = (&*q.source, &*e.source, &*q.target);
    let c = &*s.base;
    let commas: Vec<IsoComma> = c
        .objects()
        .map(|x| iso_comma(&q.components[x], &e.components[x], limits))
        .collect::<Result<_>>()?;
    let restrict = c
        .morphisms()
        .map(|y| {
            let (x, yy) = (c.cod(y), c.dom(y));
            let (cx, cy) = (&commas[x], &commas[yy]);
            let ty = &*t.fibers[yy];
            let obj: Vec<Obj> = cx
                .objects
                .iter()
                .map(|&(a, u, theta)| {
                    let theta2 = ty.comp_all(&[q.cell(y, a), t.rm(y, theta), inv(ty, e.cell(y, u))?]);
                    cy.object(s.ro(y, a), d.ro(y, u), theta2).ok_or_else(|| missing("restricted iso-comma object"))
                })
                .collect::<Result<_>>()?;
            let mor = cx
                .morphisms
                .iter()
                .enumerate()
                .map(|(m, &(w, beta))| {
                    let (s0, s1) = (cx.category.dom(m), cx.category.cod(m));
                    cy.morphism(obj[s0], obj[s1], s.rm(y, w), d.rm(y, beta))
                        .ok_or_else(|| missing("restricted iso-comma morphism"))
                })
                .collect::<Result<_>>()?;
            Ok(Functor { source: cx.category.clone(), target: cy.category.clone(), obj, mor })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut compositor = HashMap::new();
    for y in c.morphisms() {
        for &z in c.incoming(c.dom(y)) {
            let yz = c.comp(y, z);
            let cz = &commas[c.dom(z)];
            let comps = commas[c.cod(y)]
                .objects
                .iter()
                .enumerate()
                .map(|(i, &(a, u, _))| {
                    let src = restrict[z].obj[restrict[y].obj[i]];
                    cz.morphism(src, restrict[yz].obj[i], s.cc(y, z, a), d.cc(y, z, u))
                        .ok_or_else(|| missing("iso-comma compositor"))
                })
                .collect::<Result<Vec<_>>>()?;
            compositor.insert((y, z), comps);
        }
    }
    let unitor = c
        .objects()
        .map(|x| {
            let id = c.id(x);
            commas[x]
                .objects
                .iter()
                .enumerate()
                .map(|(i, &(a, u, _))| {
                    commas[x]
                        .morphism(i, restrict[id].obj[i], s.uc(x, a), d.uc(x, u))
                        .ok_or_else(|| missing("iso-comma unitor"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let source = Arc::new(IndexedCat {
        base: s.base.clone(),
        fibers: commas.iter().map(|k| k.category.clone()).collect(),
        restrict,
        compositor,
        unitor,
    });
    let components = c
        .objects()
        .map(|x| Functor {
            source: commas[x].category.clone(),
            target: d.fibers[x].clone(),
            obj: commas[x].objects.iter().map(|&(_, u, _)| u).collect(),
            mor: commas[x].morphisms.iter().map(|&(_, beta)| beta).collect(),
        })
        .collect();
    let cells = c
        .morphisms()
        .map(|y| {
            let dy = &*d.fibers[c.dom(y)];
            commas[c.cod(y)].objects.iter().map(|&(_, u, _)| dy.id(d.ro(y, u))).collect()
        })
        .collect();
    Ok(IndexedFun { source, target: e.source.clone(), components, cells })
}

/// Whether stackification preserves the fibration: after one plus step and
/// after both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusFibrationReport {
    pub after_plus: Option<FibrationFailure>,
    pub after_stackify: Option<FibrationFailure>,
}

impl PlusFibrationReport {
    pub fn passed(&self) -> bool {
        self.after_plus.is_none() && self.after_stackify.is_none()
    }
}

/// `s_J(p): s_J(E) → s_J(D)` from the two plus steps.
pub fn stackify_fibration(p: &IndexedFun, j: &Topology, limits: &Limits) -> Result<(IndexedFun, IndexedFun, crate::stackify::StackifyResult)> {
    let se = stackify(&p.source, j, limits)?;
    let sd = stackify(&p.target, j, limits)?;
    let p1 = plus_fun(p, &se.first, &sd.first)?;
    let p2 = plus_fun(&p1, &se.second, &sd.second)?;
    Ok((p1, p2, sd))
}

pub fn check_plus_fibration(p: &IndexedFibration, j: &Topology, limits: &Limits) -> Result<PlusFibrationReport> {
    let (p1, p2, _) = stackify_fibration(&p.p, j, limits)?;
    Ok(PlusFibrationReport {
        after_plus: is_indexed_fibration(&p1).err(),
        after_stackify: is_indexed_fibration(&p2).err(),
    })
}

/// Whether the essential fibres of `s_J(p)` pulled back along the unit
/// `D → s_J(D)` form a stack for the Giraud topology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackFibresReport {
    pub pulled_back: Option<FibrationFailure>,
    pub is_stack: bool,
    pub witness: Option<StackWitness>,
}

impl StackFibresReport {
    pub fn passed(&self) -> bool {
        self.pulled_back.is_none() && self.is_stack
    }
}

pub fn check_stack_fibres(p: &IndexedFibration, j: &Topology, limits: &Limits) -> Result<StackFibresReport> {
    let violations = validate_topology(j, limits)?;
    if let Some(v) = violations.first() {
        return Err(Error::Precondition(format!("topology is not valid: {}: {}", v.kind, v.detail)));
    }
    let (_, sp, sd) = stackify_fibration(&p.p, j, limits)?;
    let pb = pseudopullback(&sp, &sd.unit, limits)?;
    let fib = match is_indexed_fibration(&pb) {
        Ok(f) => f,
        Err(w) => return Ok(StackFibresReport { pulled_back: Some(w), is_stack: false, witness: None }),
    };
    let g = Arc::new(grothendieck(&p.p.target, limits)?);
    let r = essential_fibres(&fib, &g, limits)?;
    let jd = giraud_topology(&g, j, limits)?;
    let witness = check_stack(&r.indexed, &jd, limits)?;
    Ok(StackFibresReport { pulled_back: None, is_stack: witness.is_none(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::{embed_discrete, product_indexed, validate_indexed, DiscretePresheaf};
    use crate::site::{saturate, CoveringFamily};

    fn arrow() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j))
    }

    fn lim() -> Limits {
        Limits::default()
    }

    fn swap_presheaf(c: &Arc<FinCat>) -> Arc<IndexedCat> {
        let values = vec![vec!["0".to_string(), "1".to_string()]; 2];
        let actions = c.morphisms().map(|y| if c.is_identity(y) { vec![0, 1] } else { vec![1, 0] }).collect();
        Arc::new(embed_discrete(&DiscretePresheaf { base: c.clone(), values, actions }))
    }

    fn projection(d: &Arc<IndexedCat>, k: &Arc<FinCat>) -> IndexedFun {
        let kk = Arc::new(IndexedCat::constant(&d.base, k));
        product_indexed(d, &kk).unwrap().1
    }

    #[test]
    fn identity_and_projection_are_fibrations() {
        let c = arrow();
        let d = swap_presheaf(&c);
        assert!(is_indexed_fibration(&IndexedFun::identity(&d)).is_ok());
        let k = Arc::new(FinCat::preorder(&["0", "1"], |i, j| i <= j));
        assert!(is_indexed_fibration(&projection(&d, &k)).is_ok());
    }

    #[test]
    fn missing_lift_reported() {
        let t = Arc::new(FinCat::terminal());
        let k = Arc::new(FinCat::chaotic(&["p", "q"]));
        let d = Arc::new(IndexedCat::constant(&t, &k));
        let e = Arc::new(IndexedCat::constant(&t, &t));
        let p = IndexedFun {
            source: e,
            target: d,
            components: vec![Functor::constant(&t, &k, 0)],
            cells: vec![vec![k.id(0)]],
        };
        assert!(p.validate().is_empty());
        assert!(matches!(is_indexed_fibration(&p), Err(FibrationFailure::NoLift { .. })));
    }

    #[test]
    fn essential_fibres_of_identity_are_contractible() {
        let c = arrow();
        let k = Arc::new(FinCat::chaotic(&["p", "q"]));
        let d = Arc::new(IndexedCat::constant(&c, &k));
        let p = is_indexed_fibration(&IndexedFun::identity(&d)).unwrap();
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let r = essential_fibres(&p, &g, &lim()).unwrap();
        assert!(validate_indexed(&r.indexed).is_empty());
        let t = Arc::new(FinCat::terminal());
        for f in &r.fibres {
            assert!(Functor::to_terminal(&f.category, &t).is_equivalence());
        }
    }

    #[test]
    fn essential_fibres_of_projection() {
        let c = arrow();
        let d = swap_presheaf(&c);
        let k = Arc::new(FinCat::preorder(&["0", "1"], |i, j| i <= j));
        let p = is_indexed_fibration(&projection(&d, &k)).unwrap();
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let r = essential_fibres(&p, &g, &lim()).unwrap();
        assert!(validate_indexed(&r.indexed).is_empty());
        for f in &r.fibres {
            assert_eq!(f.category.num_objects(), 2);
            assert_eq!(f.category.num_morphisms(), 3);
        }
    }

    #[test]
    fn empty_essential_fibre() {
        let t = Arc::new(FinCat::terminal());
        let k = Arc::new(FinCat::discrete(&["p", "q"]));
        let d = Arc::new(IndexedCat::constant(&t, &k));
        let e = Arc::new(IndexedCat::constant(&t, &t));
        let p = IndexedFun { source: e, target: d.clone(), components: vec![Functor::constant(&t, &k, 0)], cells: vec![vec![0]] };
        let p = is_indexed_fibration(&p).unwrap();
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let r = essential_fibres(&p, &g, &lim()).unwrap();
        assert_eq!(r.fibres[g.object(0, 1)].category.num_objects(), 0);
        assert!(validate_indexed(&r.indexed).is_empty());
    }

    #[test]
    fn lift_choice_changes_by_equivalence() {
        let t = Arc::new(FinCat::terminal());
        let d = Arc::new(IndexedCat::constant(&t, &t));
        let k = Arc::new(FinCat::chaotic(&["p", "q"]));
        let p = projection(&d, &k);
        let (f1, f2) = (indexed_fibration_with(&p, LiftChoice::First).unwrap(), indexed_fibration_with(&p, LiftChoice::Last).unwrap());
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let (r1, r2) = (essential_fibres(&f1, &g, &lim()).unwrap(), essential_fibres(&f2, &g, &lim()).unwrap());
        let cmp = compare_lifts(&f1, &r1, &r2).unwrap();
        assert!(cmp.validate().is_empty());
        assert!(is_indexed_equivalence(&cmp));
    }

    #[test]
    fn fiberwise_grothendieck_of_constant_terminal() {
        let c = arrow();
        let d = swap_presheaf(&c);
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let a = Arc::new(IndexedCat::constant(&g.total, &Arc::new(FinCat::terminal())));
        let l = fiberwise_grothendieck(&a, &g, &lim()).unwrap();
        assert!(validate_indexed(&l.fibration.p.source).is_empty());
        assert!(l.fibration.p.validate().is_empty());
        assert!(l.fibration.p.components.iter().all(|f| f.is_equivalence()));
    }

    #[test]
    fn unit_and_counit_on_small_cases() {
        let c = arrow();
        let d = swap_presheaf(&c);
        let g = Arc::new(grothendieck(&d, &lim()).unwrap());
        let a = Arc::new(IndexedCat::constant(&g.total, &Arc::new(FinCat::chaotic(&["s", "t"]))));
        let u = unit_eta(&a, &g, &lim()).unwrap();
        assert!(validate_indexed(&u.right.indexed).is_empty());
        assert!(u.eta.validate().is_empty());
        assert!(is_indexed_equivalence(&u.eta));

        let k = Arc::new(FinCat::preorder(&["0", "1"], |i, j| i <= j));
        let p = is_indexed_fibration(&projection(&d, &k)).unwrap();
        let r = check_biequivalence(&p, &lim()).unwrap();
        assert!(r.passed(), "{r:?}");
        let id = is_indexed_fibration(&IndexedFun::identity(&d)).unwrap();
        assert!(check_biequivalence(&id, &lim()).unwrap().passed());
    }

    #[test]
    fn twisted_base() {
        let z2 = Arc::new(FinCat::cyclic_group(2));
        let mut d = IndexedCat::constant(&z2, &z2);
        d.compositor.insert((1, 1), vec![1]);
        let d = Arc::new(d);
        let p = is_indexed_fibration(&IndexedFun::identity(&d)).unwrap();
        let r = check_biequivalence(&p, &lim()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn stackified_fibrations() {
        let c = arrow();
        let i = c.find_morphism("a_b").unwrap();
        let j = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &lim()).unwrap();
        let d = swap_presheaf(&c);
        let k = Arc::new(FinCat::discrete(&["0", "1"]));
        let p = is_indexed_fibration(&projection(&d, &k)).unwrap();
        assert!(check_plus_fibration(&p, &j, &lim()).unwrap().passed());
        assert!(check_stack_fibres(&p, &j, &lim()).unwrap().passed());
        let trivial = Topology::trivial(&c);
        assert!(check_plus_fibration(&p, &trivial, &lim()).unwrap().passed());
    }

    #[test]
    fn invalid_topology_rejected() {
        let c = arrow();
        let d = swap_presheaf(&c);
        let mut covers = Topology::trivial(&c).covers;
        covers[1].insert(crate::site::Sieve::empty(1));
        let broken = Topology::from_covers(&c, covers);
        let p = is_indexed_fibration(&IndexedFun::identity(&d)).unwrap();
        assert!(matches!(check_stack_fibres(&p, &broken, &lim()), Err(Error::Precondition(_))));
    }
}
