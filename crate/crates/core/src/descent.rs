//! Descent data over sieves and the prestack / stack predicates.
//!
//! Data are stored in sieve form. For a sieve `R` at `X` the sieve category
//! `∫R` has one object per member `f` and one arrow `(f, g): fg → f` per
//! `g` into `dom f`. A datum assigns `U_f ∈ D(dom f)` to every member and an
//! isomorphism `coh(f, g): D(g)U_f → U_{fg}` to every arrow, subject to
//!
//! - cocycle: `coh(f, g∘g') ∘ c_{g,g'} = coh(fg, g') ∘ D(g')(coh(f, g))`,
//! - normalization: `coh(f, id) ∘ u = id`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Mor, Obj, Violation};
use crate::indexed::IndexedCat;
use crate::site::{Sieve, Topology};

/// The category of elements `∫R` of a sieve, with its projection.
#[derive(Clone, Debug)]
pub struct SieveCat {
    pub sieve: Sieve,
    pub category: Arc<FinCat>,
    /// Member of `R` represented by each object.
    pub member_of: Vec<Mor>,
    /// `(f, g)` for each arrow `fg → f`.
    pub arrow_of: Vec<(Mor, Mor)>,
    pub projection: Functor,
    member_index: HashMap<Mor, Obj>,
    arrow_index: HashMap<(Mor, Mor), Mor>,
}

impl SieveCat {
    pub fn num_members(&self) -> usize {
        self.member_of.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrow_of.len()
    }

    pub fn member_index(&self, f: Mor) -> Option<Obj> {
        self.member_index.get(&f).copied()
    }

    pub fn arrow_index(&self, f: Mor, g: Mor) -> Option<Mor> {
        self.arrow_index.get(&(f, g)).copied()
    }
}

pub fn sieve_category(base: &Arc<FinCat>, r: &Sieve) -> SieveCat {
    let c = &**base;
    let member_of = r.members.clone();
    let member_index: HashMap<Mor, Obj> = member_of.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut arrow_of = Vec::new();
    let mut arrow_index = HashMap::new();
    let mut morphisms = Vec::new();
    for &f in &member_of {
        for &g in c.incoming(c.dom(f)) {
            let fg = c.comp(f, g);
            arrow_index.insert((f, g), arrow_of.len());
            arrow_of.push((f, g));
            morphisms.push((format!("{}/{}", c.mor_name(g), c.mor_name(f)), member_index[&fg], member_index[&f]));
        }
    }
    let identity = member_of.iter().map(|&f| arrow_index[&(f, c.id(c.dom(f)))]).collect();
    let objects = member_of.iter().map(|&f| c.mor_name(f).to_string()).collect();
    let category = FinCat::build(objects, morphisms, identity, |second, first| {
        // (f, g) ∘ (fg, g') = (f, g∘g')
        let (f, g) = arrow_of[second];
        let (_, g2) = arrow_of[first];
        Ok(arrow_index[&(f, c.comp(g, g2))])
    })
    .expect("sieve category")
    .into_arc();
    let projection = Functor {
        source: category.clone(),
        target: base.clone(),
        obj: member_of.iter().map(|&f| c.dom(f)).collect(),
        mor: arrow_of.iter().map(|&(_, g)| g).collect(),
    };
    SieveCat { sieve: r.clone(), category, member_of, arrow_of, projection, member_index, arrow_index }
}

/// A descent datum relative to a fixed [`SieveCat`]: `obj[i]` lives over
/// member `i`, `coh[k]` over arrow `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DescentDatum {
    pub obj: Vec<Obj>,
    pub coh: Vec<Mor>,
}

/// A morphism of descent data: `components[i]: U_f → V_f` for member `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentMor {
    pub source: Obj,
    pub target: Obj,
    pub components: Vec<Mor>,
}

/// Triples `(arrow (f,g), arrow (fg,g'), arrow (f,g∘g'))` that the cocycle
/// condition relates, with the base morphisms needed for the compositor.
struct Cocycle {
    first: Mor,
    second: Mor,
    composite: Mor,
    g: Mor,
    g2: Mor,
    member: Obj,
}

fn cocycles(c: &FinCat, sc: &SieveCat) -> Vec<Cocycle> {
    let mut out = Vec::new();
    for (i, &f) in sc.member_of.iter().enumerate() {
        for &g in c.incoming(c.dom(f)) {
            let fg = c.comp(f, g);
            for &g2 in c.incoming(c.dom(g)) {
                out.push(Cocycle {
                    first: sc.arrow_index[&(f, g)],
                    second: sc.arrow_index[&(fg, g2)],
                    composite: sc.arrow_index[&(f, c.comp(g, g2))],
                    g,
                    g2,
                    member: i,
                });
            }
        }
    }
    out
}

fn cocycle_holds(d: &IndexedCat, t: &Cocycle, obj: &[Obj], coh: &[Mor]) -> bool {
    let c = &*d.base;
    let fib = &*d.fibers[c.dom(t.g2)];
    let lhs = fib.comp(coh[t.composite], d.cc(t.g, t.g2, obj[t.member]));
    let rhs = fib.comp(coh[t.second], d.rm(t.g2, coh[t.first]));
    lhs == rhs
}

/// Checks endpoints, invertibility, cocycle and normalization.
pub fn check_datum(d: &IndexedCat, sc: &SieveCat, a: &DescentDatum) -> Vec<Violation> {
    let c = &*d.base;
    let mut report = Vec::new();
    if a.obj.len() != sc.num_members() || a.coh.len() != sc.num_arrows() {
        report.push(Violation::new("descent", "datum has the wrong shape for this sieve"));
        return report;
    }
    for (k, &(f, g)) in sc.arrow_of.iter().enumerate() {
        let fib = &*d.fibers[c.dom(g)];
        let m = a.coh[k];
        let (src, tgt) = (d.ro(g, a.obj[sc.member_index[&f]]), a.obj[sc.member_index[&c.comp(f, g)]]);
        if m >= fib.num_morphisms() || fib.dom(m) != src || fib.cod(m) != tgt || !fib.is_iso(m) {
            report.push(Violation::new(
                "descent",
                format!("coherence at ({}, {}) is not an isomorphism of the right type", c.mor_name(f), c.mor_name(g)),
            ));
        }
    }
    if !report.is_empty() {
        return report;
    }
    for t in cocycles(c, sc) {
        if !cocycle_holds(d, &t, &a.obj, &a.coh) {
            report.push(Violation::new(
                "cocycle",
                format!(
                    "cocycle fails at ({}, {}, {})",
                    c.mor_name(sc.member_of[t.member]),
                    c.mor_name(t.g),
                    c.mor_name(t.g2)
                ),
            ));
        }
    }
    for (i, &f) in sc.member_of.iter().enumerate() {
        let y = c.dom(f);
        let k = sc.arrow_index[&(f, c.id(y))];
        let fib = &*d.fibers[y];
        if fib.comp(a.coh[k], d.uc(y, a.obj[i])) != fib.id(a.obj[i]) {
            report.push(Violation::new(
                "normalization",
                format!("coherence at ({}, id) is not inverse to the unitor", c.mor_name(f)),
            ));
        }
    }
    report
}

/// Checks the compatibility square of a morphism of data.
pub fn check_descent_mor(d: &IndexedCat, sc: &SieveCat, u: &DescentDatum, v: &DescentDatum, delta: &[Mor]) -> bool {
    let c = &*d.base;
    sc.arrow_of.iter().enumerate().all(|(k, &(f, g))| {
        let fib = &*d.fibers[c.dom(g)];
        let (i, j) = (sc.member_index[&f], sc.member_index[&c.comp(f, g)]);
        fib.comp(delta[j], u.coh[k]) == fib.comp(v.coh[k], d.rm(g, delta[i]))
    })
}

/// The category `Desc(R, D)` with every datum and every morphism.
#[derive(Clone, Debug)]
pub struct Desc {
    pub sieve_cat: SieveCat,
    pub data: Vec<DescentDatum>,
    pub morphisms: Vec<DescentMor>,
    pub category: Arc<FinCat>,
    datum_index: HashMap<DescentDatum, Obj>,
    mor_index: HashMap<(Obj, Obj, Vec<Mor>), Mor>,
}

impl Desc {
    pub fn find_datum(&self, a: &DescentDatum) -> Option<Obj> {
        self.datum_index.get(a).copied()
    }

    pub fn find_mor(&self, src: Obj, tgt: Obj, components: &[Mor]) -> Option<Mor> {
        self.mor_index.get(&(src, tgt, components.to_vec())).copied()
    }

    pub fn sieve(&self) -> &Sieve {
        &self.sieve_cat.sieve
    }
}

pub fn desc_category(r: &Sieve, d: &IndexedCat, limits: &Limits) -> Result<Desc> {
    let sc = sieve_category(&d.base, r);
    desc_from_sieve_cat(sc, d, limits)
}

pub fn desc_from_sieve_cat(sc: SieveCat, d: &IndexedCat, limits: &Limits) -> Result<Desc> {
    let data = enumerate_data(d, &sc, limits)?;
    let c = &*d.base;
    let datum_index: HashMap<DescentDatum, Obj> = data.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let mut morphisms = Vec::new();
    let mut identity = vec![0; data.len()];
    let mut steps = 0usize;
    for (p, u) in data.iter().enumerate() {
        for (q, v) in data.iter().enumerate() {
            for delta in morphisms_with_budget(d, &sc, u, v, &mut steps, limits)? {
                if p == q && delta.iter().enumerate().all(|(i, &m)| m == d.fibers[c.dom(sc.member_of[i])].id(u.obj[i])) {
                    identity[p] = morphisms.len();
                }
                morphisms.push(DescentMor { source: p, target: q, components: delta });
            }
        }
    }
    let mut hom_sizes: HashMap<(Obj, Obj), usize> = HashMap::new();
    let (mut into, mut out) = (vec![0usize; data.len()], vec![0usize; data.len()]);
    for m in &morphisms {
        *hom_sizes.entry((m.source, m.target)).or_default() += 1;
        into[m.target] += 1;
        out[m.source] += 1;
    }
    if hom_sizes.values().any(|&k| k > limits.max_homset) {
        return Err(Error::cap("descent category hom-set", limits.max_homset));
    }
    let pairs: usize = into.iter().zip(&out).map(|(a, b)| a * b).sum();
    if pairs > limits.max_descent {
        return Err(Error::cap("descent category composable pairs", limits.max_descent));
    }
    let mor_index: HashMap<(Obj, Obj, Vec<Mor>), Mor> =
        morphisms.iter().enumerate().map(|(k, m)| ((m.source, m.target, m.components.clone()), k)).collect();
    let member_fiber: Vec<&FinCat> = sc.member_of.iter().map(|&f| &*d.fibers[c.dom(f)]).collect();
    let names = datum_names(d, &sc, &data);
    let mor_names = morphisms
        .iter()
        .map(|m| {
            let parts: Vec<&str> = m.components.iter().enumerate().map(|(i, &a)| member_fiber[i].mor_name(a)).collect();
            (format!("[{}]", parts.join(",")), m.source, m.target)
        })
        .collect::<Vec<_>>();
    let mut uniq = HashMap::new();
    let mor_names = mor_names
        .into_iter()
        .map(|(n, s, t)| {
            let k = uniq.entry(n.clone()).or_insert(0usize);
            *k += 1;
            (if *k == 1 { n } else { format!("{n}#{k}") }, s, t)
        })
        .collect();
    let category = FinCat::build(names, mor_names, identity, |second, first| {
        let (a, b) = (&morphisms[first], &morphisms[second]);
        let comps: Vec<Mor> = (0..sc.num_members()).map(|i| member_fiber[i].comp(b.components[i], a.components[i])).collect();
        mor_index
            .get(&(a.source, b.target, comps))
            .copied()
            .ok_or_else(|| Error::internal("descent morphisms are not closed under composition"))
    })?
    .into_arc();
    Ok(Desc { sieve_cat: sc, data, morphisms, category, datum_index, mor_index })
}

fn datum_names(d: &IndexedCat, sc: &SieveCat, data: &[DescentDatum]) -> Vec<String> {
    let c = &*d.base;
    let mut seen: HashMap<String, usize> = HashMap::new();
    data.iter()
        .map(|a| {
            let parts: Vec<&str> =
                a.obj.iter().enumerate().map(|(i, &u)| d.fibers[c.dom(sc.member_of[i])].obj_name(u)).collect();
            let base = format!("<{}>", parts.join(","));
            let k = seen.entry(base.clone()).or_insert(0);
            *k += 1;
            if *k == 1 {
                base
            } else {
                format!("{base}#{k}")
            }
        })
        .collect()
}

/// Every descent datum on the sieve, in a deterministic order.
pub fn enumerate_data(d: &IndexedCat, sc: &SieveCat, limits: &Limits) -> Result<Vec<DescentDatum>> {
    let c = &*d.base;
    let n = sc.num_members();
    let mut out = Vec::new();
    let mut budget = 0usize;
    let mut obj = vec![usize::MAX; n];
    let triples = cocycles(c, sc);
    let mut triples_of: Vec<Vec<usize>> = vec![Vec::new(); sc.num_arrows()];
    for (t, tr) in triples.iter().enumerate() {
        triples_of[tr.first].push(t);
        triples_of[tr.second].push(t);
        triples_of[tr.composite].push(t);
    }
    fn objects(
        d: &IndexedCat,
        sc: &SieveCat,
        i: usize,
        obj: &mut Vec<Obj>,
        k: &mut dyn FnMut(&[Obj]) -> Result<()>,
        budget: &mut usize,
        limits: &Limits,
    ) -> Result<()> {
        let c = &*d.base;
        if i == sc.num_members() {
            return k(obj);
        }
        let f = sc.member_of[i];
        let fib = &*d.fibers[c.dom(f)];
        for u in fib.objects() {
            *budget += 1;
            if *budget > limits.max_descent {
                return Err(Error::cap("descent candidates", limits.max_descent));
            }
            obj[i] = u;
            // every arrow between members already assigned must admit an iso
            let ok = sc.arrow_of.iter().all(|&(f1, g)| {
                let (a, b) = (sc.member_index[&f1], sc.member_index[&c.comp(f1, g)]);
                if a > i || b > i {
                    return true;
                }
                d.fibers[c.dom(g)].are_isomorphic(d.ro(g, obj[a]), obj[b])
            });
            if ok {
                objects(d, sc, i + 1, obj, k, budget, limits)?;
            }
        }
        obj[i] = usize::MAX;
        Ok(())
    }
    let mut collect = |obj: &[Obj]| -> Result<()> {
        let mut coh = vec![usize::MAX; sc.num_arrows()];
        // identity arrows are forced by normalization
        for (k, &(f, g)) in sc.arrow_of.iter().enumerate() {
            if c.is_identity(g) {
                let y = c.dom(f);
                let fib = &*d.fibers[y];
                let u = obj[sc.member_index[&f]];
                coh[k] = fib.inverse(d.uc(y, u)).ok_or_else(|| Error::internal("unitor is not invertible"))?;
            }
        }
        coh_rec(d, sc, obj, &triples, &triples_of, 0, &mut coh, &mut out, &mut budget, limits)
    };
    objects(d, sc, 0, &mut obj, &mut collect, &mut 0, limits)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn coh_rec(
    d: &IndexedCat,
    sc: &SieveCat,
    obj: &[Obj],
    triples: &[Cocycle],
    triples_of: &[Vec<usize>],
    k: usize,
    coh: &mut Vec<Mor>,
    out: &mut Vec<DescentDatum>,
    budget: &mut usize,
    limits: &Limits,
) -> Result<()> {
    let c = &*d.base;
    if k == sc.num_arrows() {
        let datum = DescentDatum { obj: obj.to_vec(), coh: coh.clone() };
        debug_assert!(check_datum(d, sc, &datum).is_empty());
        out.push(datum);
        return Ok(());
    }
    let (f, g) = sc.arrow_of[k];
    let check = |coh: &[Mor]| {
        triples_of[k].iter().all(|&t| {
            let tr = &triples[t];
            if coh[tr.first] == usize::MAX || coh[tr.second] == usize::MAX || coh[tr.composite] == usize::MAX {
                return true;
            }
            cocycle_holds(d, tr, obj, coh)
        })
    };
    if c.is_identity(g) {
        if check(coh) {
            coh_rec(d, sc, obj, triples, triples_of, k + 1, coh, out, budget, limits)?;
        }
        return Ok(());
    }
    let fib = &*d.fibers[c.dom(g)];
    let src = d.ro(g, obj[sc.member_index[&f]]);
    let tgt = obj[sc.member_index[&c.comp(f, g)]];
    let candidates: Vec<Mor> = fib.isos(src, tgt).collect();
    for m in candidates {
        *budget += 1;
        if *budget > limits.max_descent {
            return Err(Error::cap("descent candidates", limits.max_descent));
        }
        coh[k] = m;
        if check(coh) {
            coh_rec(d, sc, obj, triples, triples_of, k + 1, coh, out, budget, limits)?;
        }
    }
    coh[k] = usize::MAX;
    Ok(())
}

/// Every morphism `u → v` of descent data. Choosing `δ_f` forces `δ_{fg}`.
pub fn enumerate_morphisms(
    d: &IndexedCat,
    sc: &SieveCat,
    u: &DescentDatum,
    v: &DescentDatum,
    limits: &Limits,
) -> Result<Vec<Vec<Mor>>> {
    morphisms_with_budget(d, sc, u, v, &mut 0, limits)
}

/// As [`enumerate_morphisms`], drawing candidate steps from a budget shared
/// with other calls.
fn morphisms_with_budget(
    d: &IndexedCat,
    sc: &SieveCat,
    u: &DescentDatum,
    v: &DescentDatum,
    steps: &mut usize,
    limits: &Limits,
) -> Result<Vec<Vec<Mor>>> {
    let n = sc.num_members();
    let mut out = Vec::new();
    let mut delta = vec![usize::MAX; n];
    fn propagate(d: &IndexedCat, sc: &SieveCat, u: &DescentDatum, v: &DescentDatum, delta: &mut [Mor], trail: &mut Vec<usize>, i: usize, m: Mor) -> bool {
        let c = &*d.base;
        let mut queue = VecDeque::from([(i, m)]);
        while let Some((i, m)) = queue.pop_front() {
            if delta[i] != usize::MAX {
                if delta[i] != m {
                    return false;
                }
                continue;
            }
            delta[i] = m;
            trail.push(i);
            let f = sc.member_of[i];
            for &g in c.incoming(c.dom(f)) {
                let fib = &*d.fibers[c.dom(g)];
                let k = sc.arrow_index[&(f, g)];
                let j = sc.member_index[&c.comp(f, g)];
                let inv = fib.inverse(u.coh[k]).expect("coherence isomorphism");
                queue.push_back((j, fib.comp_all(&[v.coh[k], d.rm(g, m), inv])));
            }
        }
        true
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        d: &IndexedCat,
        sc: &SieveCat,
        u: &DescentDatum,
        v: &DescentDatum,
        i: usize,
        delta: &mut Vec<Mor>,
        out: &mut Vec<Vec<Mor>>,
        steps: &mut usize,
        limits: &Limits,
    ) -> Result<()> {
        let c = &*d.base;
        if i == sc.num_members() {
            if check_descent_mor(d, sc, u, v, delta) {
                out.push(delta.clone());
            }
            return Ok(());
        }
        if delta[i] != usize::MAX {
            return rec(d, sc, u, v, i + 1, delta, out, steps, limits);
        }
        let fib = &*d.fibers[c.dom(sc.member_of[i])];
        let candidates: Vec<Mor> = fib.hom(u.obj[i], v.obj[i]).to_vec();
        for m in candidates {
            *steps += 1;
            if *steps > limits.max_descent {
                return Err(Error::cap("descent morphism candidates", limits.max_descent));
            }
            let mut trail = Vec::new();
            if propagate(d, sc, u, v, delta, &mut trail, i, m) {
                rec(d, sc, u, v, i + 1, delta, out, steps, limits)?;
            }
            for t in trail {
                delta[t] = usize::MAX;
            }
        }
        Ok(())
    }
    rec(d, sc, u, v, 0, &mut delta, &mut out, steps, limits)?;
    Ok(out)
}

/// The datum `(D(f)V, c_{f,g,V})` of an object `V ∈ D(X)`.
pub fn comparison_datum(d: &IndexedCat, sc: &SieveCat, v: Obj) -> DescentDatum {
    DescentDatum {
        obj: sc.member_of.iter().map(|&f| d.ro(f, v)).collect(),
        coh: sc.arrow_of.iter().map(|&(f, g)| d.cc(f, g, v)).collect(),
    }
}

/// The canonical functor `D(X) → Desc(R, D)`.
pub fn comparison(desc: &Desc, d: &IndexedCat) -> Result<Functor> {
    let sc = &desc.sieve_cat;
    let x = sc.sieve.apex;
    let dx = &d.fibers[x];
    let obj: Vec<Obj> = dx
        .objects()
        .map(|v| {
            desc.find_datum(&comparison_datum(d, sc, v))
                .ok_or_else(|| Error::internal("comparison datum missing from the descent category"))
        })
        .collect::<Result<_>>()?;
    let mor = dx
        .morphisms()
        .map(|a| {
            let comps: Vec<Mor> = sc.member_of.iter().map(|&f| d.rm(f, a)).collect();
            desc.find_mor(obj[dx.dom(a)], obj[dx.cod(a)], &comps)
                .ok_or_else(|| Error::internal("comparison morphism missing from the descent category"))
        })
        .collect::<Result<_>>()?;
    Ok(Functor { source: dx.clone(), target: desc.category.clone(), obj, mor })
}

/// Restriction of a datum along `y: Y → X` to a sieve `S` at `Y` with
/// `y ∘ g ∈ R` for every `g ∈ S` (for instance `S = y*(R)` or any subsieve).
pub fn restrict_datum(c: &FinCat, src: &SieveCat, a: &DescentDatum, y: Mor, dst: &SieveCat) -> Result<DescentDatum> {
    if c.cod(y) != src.sieve.apex || c.dom(y) != dst.sieve.apex {
        return Err(Error::Precondition("restriction morphism does not match the sieves".into()));
    }
    let mut obj = Vec::with_capacity(dst.num_members());
    for &g in &dst.member_of {
        let i = src
            .member_index(c.comp(y, g))
            .ok_or_else(|| Error::Precondition(format!("{} . {} is not in the source sieve", c.mor_name(y), c.mor_name(g))))?;
        obj.push(a.obj[i]);
    }
    let coh = dst.arrow_of.iter().map(|&(g, h)| a.coh[src.arrow_index[&(c.comp(y, g), h)]]).collect();
    Ok(DescentDatum { obj, coh })
}

/// The functor `Desc(R, D) → Desc(S, D)` induced by restriction along `y`.
pub fn restriction_functor(c: &FinCat, src: &Desc, y: Mor, dst: &Desc) -> Result<Functor> {
    let obj: Vec<Obj> = src
        .data
        .iter()
        .map(|a| {
            let b = restrict_datum(c, &src.sieve_cat, a, y, &dst.sieve_cat)?;
            dst.find_datum(&b).ok_or_else(|| Error::internal("restricted datum missing"))
        })
        .collect::<Result<_>>()?;
    let positions: Vec<Obj> = dst.sieve_cat.member_of.iter().map(|&g| src.sieve_cat.member_index[&c.comp(y, g)]).collect();
    let mor = src
        .morphisms
        .iter()
        .map(|m| {
            let comps: Vec<Mor> = positions.iter().map(|&i| m.components[i]).collect();
            dst.find_mor(obj[m.source], obj[m.target], &comps).ok_or_else(|| Error::internal("restricted morphism missing"))
        })
        .collect::<Result<_>>()?;
    Ok(Functor { source: src.category.clone(), target: dst.category.clone(), obj, mor })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DescentFailure {
    /// Two distinct morphisms `u → v` in `D(X)` agree on the cover.
    NotFaithful { u: Obj, v: Obj },
    /// A morphism of descent data between `u` and `v` does not glue.
    NotFull { u: Obj, v: Obj },
    /// A descent datum not isomorphic to any comparison datum.
    NotEffective { datum: DescentDatum },
}

/// Where a prestack or stack condition fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackWitness {
    pub object: Obj,
    pub sieve: Sieve,
    pub failure: DescentFailure,
    pub detail: String,
}

fn check_descent(d: &IndexedCat, j: &Topology, limits: &Limits, effective: bool) -> Result<Option<StackWitness>> {
    let c = &*d.base;
    for x in c.objects() {
        for r in j.covers(x) {
            let desc = desc_category(r, d, limits)?;
            let cmp = comparison(&desc, d)?;
            let dx = &*d.fibers[x];
            if let Err(w) = cmp.fully_faithful() {
                let failure = if w.not_faithful {
                    DescentFailure::NotFaithful { u: w.x, v: w.y }
                } else {
                    DescentFailure::NotFull { u: w.x, v: w.y }
                };
                let detail = format!(
                    "{} morphisms {} -> {} in the fiber over {} but {} between their restrictions to {}",
                    w.source_hom,
                    dx.obj_name(w.x),
                    dx.obj_name(w.y),
                    c.obj_name(x),
                    w.target_hom,
                    r.display(c)
                );
                return Ok(Some(StackWitness { object: x, sieve: r.clone(), failure, detail }));
            }
            if effective {
                if let Err(w) = cmp.essentially_surjective() {
                    let detail = format!(
                        "descent datum {} on {} does not glue",
                        desc.category.obj_name(w.unreached),
                        r.display(c)
                    );
                    return Ok(Some(StackWitness {
                        object: x,
                        sieve: r.clone(),
                        failure: DescentFailure::NotEffective { datum: desc.data[w.unreached].clone() },
                        detail,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// `None` if every comparison functor is fully faithful.
pub fn check_prestack(d: &IndexedCat, j: &Topology, limits: &Limits) -> Result<Option<StackWitness>> {
    check_descent(d, j, limits, false)
}

/// `None` if every comparison functor is an equivalence.
pub fn check_stack(d: &IndexedCat, j: &Topology, limits: &Limits) -> Result<Option<StackWitness>> {
    check_descent(d, j, limits, true)
}

pub fn is_prestack(d: &IndexedCat, j: &Topology, limits: &Limits) -> Result<bool> {
    Ok(check_prestack(d, j, limits)?.is_none())
}

pub fn is_stack(d: &IndexedCat, j: &Topology, limits: &Limits) -> Result<bool> {
    Ok(check_stack(d, j, limits)?.is_none())
}
