//! Indexed categories: pseudofunctors `C^op → FinCat` with explicit
//! compositor and unitor cells.
//!
//! Conventions. For `y: Y → X` the restriction `D(y)` is a functor
//! `D(X) → D(Y)`. For a composable pair `(y, z)` with `z: Z → Y` the
//! compositor at `U ∈ D(X)` is an isomorphism `D(z)D(y)U → D(y∘z)U` in
//! `D(Z)`, and the unitor at `U ∈ D(X)` is an isomorphism `U → D(id_X)U`.

mod fun;
mod presheaf;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::fincat::{product_cat, FinCat, Functor, Mor, Obj, Violation};

pub use fun::{
    compose_indexed, enumerate_indexed_functors, find_invertible_modification, is_indexed_equivalence,
    IndexedFun, Modification,
};
pub use presheaf::{embed_discrete, DiscretePresheaf};
pub(crate) use fun::same_indexed;

#[derive(Clone, Debug)]
pub struct IndexedCat {
    pub base: Arc<FinCat>,
    pub fibers: Vec<Arc<FinCat>>,
    pub restrict: Vec<Functor>,
    /// Keyed by `(y, z)` with `cod z = dom y`; one component per object of
    /// `D(cod y)`.
    pub compositor: HashMap<(Mor, Mor), Vec<Mor>>,
    /// One vector per base object, one component per object of its fiber.
    pub unitor: Vec<Vec<Mor>>,
}

pub(crate) fn same_cat(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl IndexedCat {
    /// Identity compositors and unitors. Only valid if the restrictions are
    /// functorial on the nose; [`validate_indexed`] reports otherwise.
    pub fn strict(base: &Arc<FinCat>, fibers: Vec<Arc<FinCat>>, restrict: Vec<Functor>) -> IndexedCat {
        let c = &**base;
        let mut compositor = HashMap::new();
        for y in c.morphisms() {
            for &z in c.incoming(c.dom(y)) {
                let yz = c.comp(y, z);
                let comps = fibers[c.cod(y)]
                    .objects()
                    .map(|u| fibers[c.dom(z)].id(restrict[yz].on_obj(u)))
                    .collect();
                compositor.insert((y, z), comps);
            }
        }
        let unitor = c.objects().map(|x| fibers[x].objects().map(|u| fibers[x].id(u)).collect()).collect();
        IndexedCat { base: base.clone(), fibers, restrict, compositor, unitor }
    }

    /// Every fiber is `k`, every restriction the identity.
    pub fn constant(base: &Arc<FinCat>, k: &Arc<FinCat>) -> IndexedCat {
        let fibers = vec![k.clone(); base.num_objects()];
        let restrict = vec![Functor::identity(k); base.num_morphisms()];
        IndexedCat::strict(base, fibers, restrict)
    }

    pub fn fiber(&self, x: Obj) -> &Arc<FinCat> {
        &self.fibers[x]
    }

    /// `D(y)(u)`.
    pub fn ro(&self, y: Mor, u: Obj) -> Obj {
        self.restrict[y].obj[u]
    }

    /// `D(y)(a)`.
    pub fn rm(&self, y: Mor, a: Mor) -> Mor {
        self.restrict[y].mor[a]
    }

    /// Compositor component `D(z)D(y)u → D(y∘z)u`.
    pub fn cc(&self, y: Mor, z: Mor, u: Obj) -> Mor {
        self.compositor[&(y, z)][u]
    }

    /// Unitor component `u → D(id_x)u`.
    pub fn uc(&self, x: Obj, u: Obj) -> Mor {
        self.unitor[x][u]
    }

    pub fn is_strict(&self) -> bool {
        let c = &*self.base;
        self.compositor.iter().all(|(&(_, z), comps)| {
            let f = &self.fibers[c.dom(z)];
            comps.iter().all(|&m| f.is_identity(m))
        }) && self.unitor.iter().enumerate().all(|(x, comps)| comps.iter().all(|&m| self.fibers[x].is_identity(m)))
    }

    pub fn total_objects(&self) -> usize {
        self.fibers.iter().map(|f| f.num_objects()).sum()
    }

    /// Restriction of `u ∈ D(x)` along the chain `y0, y1, ..., yk` (applied
    /// in that order, so the result is `D(yk)...D(y0)u`).
    pub fn restrict_along(&self, chain: &[Mor], u: Obj) -> Obj {
        chain.iter().fold(u, |v, &y| self.ro(y, v))
    }

    /// The canonical isomorphism `D(yk)...D(y0)u → D(y0∘...∘yk)u` obtained by
    /// folding compositors; for the empty chain at `x`, the unitor.
    pub fn to_composite(&self, x: Obj, chain: &[Mor], u: Obj) -> Mor {
        let c = &*self.base;
        match chain.len() {
            0 => self.uc(x, u),
            1 => self.fibers[c.dom(chain[0])].id(self.ro(chain[0], u)),
            _ => {
                // D(yk)(D(y(k-1))...D(y0)u) -> D(yk)(D(prefix)u) -> D(prefix∘yk)u
                let k = chain.len() - 1;
                let prefix: Mor = c.comp_all(&chain[..k]);
                let inner = self.to_composite(x, &chain[..k], u);
                let fib = &self.fibers[c.dom(chain[k])];
                fib.comp(self.cc(prefix, chain[k], u), self.rm(chain[k], inner))
            }
        }
    }

    /// For chains with the same composite (and the same start `u ∈ D(x)`),
    /// the canonical isomorphism between the two iterated restrictions.
    pub fn transport(&self, x: Obj, from: &[Mor], to: &[Mor], u: Obj) -> Mor {
        let end = if let Some(&l) = from.last() { self.base.dom(l) } else { x };
        let fib = &self.fibers[end];
        let a = self.to_composite(x, from, u);
        let b = self.to_composite(x, to, u);
        fib.comp(fib.inverse(b).expect("canonical isomorphism"), a)
    }
}

/// Exhaustive validation: fibers, restrictions, cell endpoints, invertibility,
/// naturality, associativity and unit coherence.
pub fn validate_indexed(d: &IndexedCat) -> Vec<Violation> {
    let c = &*d.base;
    let mut report = Vec::new();
    if d.fibers.len() != c.num_objects() || d.restrict.len() != c.num_morphisms() || d.unitor.len() != c.num_objects()
    {
        report.push(Violation::new("indexed", "fiber, restriction or unitor table has the wrong size"));
        return report;
    }
    for x in c.objects() {
        for v in d.fibers[x].validate() {
            report.push(Violation::new("fiber", format!("at {}: {}", c.obj_name(x), v)));
        }
    }
    for y in c.morphisms() {
        let f = &d.restrict[y];
        if !same_cat(&f.source, &d.fibers[c.cod(y)]) || !same_cat(&f.target, &d.fibers[c.dom(y)]) {
            report.push(Violation::new(
                "restriction",
                format!("restriction along {} has the wrong source or target fiber", c.mor_name(y)),
            ));
            continue;
        }
        for v in f.validate() {
            report.push(Violation::new("restriction", format!("along {}: {}", c.mor_name(y), v)));
        }
    }
    if !report.is_empty() {
        return report;
    }
    // compositor endpoints, invertibility, naturality
    for y in c.morphisms() {
        let x = c.cod(y);
        let dx = &*d.fibers[x];
        for &z in c.incoming(c.dom(y)) {
            let yz = c.comp(y, z);
            let dz = &*d.fibers[c.dom(z)];
            let pair = format!("{} . {}", c.mor_name(y), c.mor_name(z));
            let Some(comps) = d.compositor.get(&(y, z)) else {
                report.push(Violation::new("compositor", format!("missing compositor for {pair}")));
                continue;
            };
            if comps.len() != dx.num_objects() || comps.iter().any(|&m| m >= dz.num_morphisms()) {
                report.push(Violation::new("compositor", format!("compositor for {pair} has the wrong size")));
                continue;
            }
            let mut ok = true;
            for u in dx.objects() {
                let m = comps[u];
                let (src, tgt) = (d.ro(z, d.ro(y, u)), d.ro(yz, u));
                if dz.dom(m) != src || dz.cod(m) != tgt {
                    report.push(Violation::new(
                        "compositor",
                        format!(
                            "component of {pair} at {} is not a morphism {} -> {}",
                            dx.obj_name(u),
                            dz.obj_name(src),
                            dz.obj_name(tgt)
                        ),
                    ));
                    ok = false;
                } else if !dz.is_iso(m) {
                    report.push(Violation::new(
                        "compositor",
                        format!("component of {pair} at {} is not invertible", dx.obj_name(u)),
                    ));
                }
            }
            if !ok {
                continue;
            }
            for a in dx.morphisms() {
                let lhs = dz.comp(d.rm(yz, a), comps[dx.dom(a)]);
                let rhs = dz.comp(comps[dx.cod(a)], d.rm(z, d.rm(y, a)));
                if lhs != rhs {
                    report.push(Violation::new(
                        "compositor",
                        format!("compositor for {pair} is not natural at {}", dx.mor_name(a)),
                    ));
                }
            }
        }
    }
    for x in c.objects() {
        let dx = &*d.fibers[x];
        let idx = c.id(x);
        if d.unitor[x].len() != dx.num_objects() || d.unitor[x].iter().any(|&m| m >= dx.num_morphisms()) {
            report.push(Violation::new("unitor", format!("unitor at {} has the wrong size", c.obj_name(x))));
            continue;
        }
        let mut ok = true;
        for u in dx.objects() {
            let m = d.unitor[x][u];
            if dx.dom(m) != u || dx.cod(m) != d.ro(idx, u) {
                report.push(Violation::new(
                    "unitor",
                    format!("unitor at {} has wrong endpoints at {}", c.obj_name(x), dx.obj_name(u)),
                ));
                ok = false;
            } else if !dx.is_iso(m) {
                report.push(Violation::new(
                    "unitor",
                    format!("unitor at {} is not invertible at {}", c.obj_name(x), dx.obj_name(u)),
                ));
            }
        }
        if !ok {
            continue;
        }
        for a in dx.morphisms() {
            if dx.comp(d.rm(idx, a), d.unitor[x][dx.dom(a)]) != dx.comp(d.unitor[x][dx.cod(a)], a) {
                report.push(Violation::new(
                    "unitor",
                    format!("unitor at {} is not natural at {}", c.obj_name(x), dx.mor_name(a)),
                ));
            }
        }
    }
    if !report.is_empty() {
        return report;
    }
    // associativity: y: Y -> X, z: Z -> Y, w: W -> Z
    for y in c.morphisms() {
        let dx = &*d.fibers[c.cod(y)];
        for &z in c.incoming(c.dom(y)) {
            for &w in c.incoming(c.dom(z)) {
                let dw = &*d.fibers[c.dom(w)];
                let (yz, zw) = (c.comp(y, z), c.comp(z, w));
                for u in dx.objects() {
                    let route1 = dw.comp(d.cc(yz, w, u), d.rm(w, d.cc(y, z, u)));
                    let route2 = dw.comp(d.cc(y, zw, u), d.cc(z, w, d.ro(y, u)));
                    if route1 != route2 {
                        report.push(Violation::new(
                            "coherence",
                            format!(
                                "compositors for the triple ({}, {}, {}) disagree at {}",
                                c.mor_name(y),
                                c.mor_name(z),
                                c.mor_name(w),
                                dx.obj_name(u)
                            ),
                        ));
                    }
                }
            }
        }
    }
    // unit coherence
    for y in c.morphisms() {
        let (x, yy) = (c.cod(y), c.dom(y));
        let dx = &*d.fibers[x];
        let dy = &*d.fibers[yy];
        for u in dx.objects() {
            let target = dy.id(d.ro(y, u));
            let left = dy.comp(d.cc(c.id(x), y, u), d.rm(y, d.uc(x, u)));
            let right = dy.comp(d.cc(y, c.id(yy), u), d.uc(yy, d.ro(y, u)));
            if left != target || right != target {
                report.push(Violation::new(
                    "unit-coherence",
                    format!("unitors and compositors disagree along {} at {}", c.mor_name(y), dx.obj_name(u)),
                ));
            }
        }
    }
    report
}

/// `E ∘ F^op` for `F: C' → C` and `E` indexed over `C`.
pub fn pullback_indexed(e: &IndexedCat, f: &Functor) -> IndexedCat {
    let c = &*f.source;
    let fibers = c.objects().map(|x| e.fibers[f.obj[x]].clone()).collect();
    let restrict = c.morphisms().map(|y| e.restrict[f.mor[y]].clone()).collect();
    let mut compositor = HashMap::new();
    for y in c.morphisms() {
        for &z in c.incoming(c.dom(y)) {
            compositor.insert((y, z), e.compositor[&(f.mor[y], f.mor[z])].clone());
        }
    }
    let unitor = c.objects().map(|x| e.unitor[f.obj[x]].clone()).collect();
    IndexedCat { base: f.source.clone(), fibers, restrict, compositor, unitor }
}

/// Fiberwise product `D × E` with its two projections.
pub fn product_indexed(d: &Arc<IndexedCat>, e: &Arc<IndexedCat>) -> Result<(Arc<IndexedCat>, IndexedFun, IndexedFun)> {
    let c = &*d.base;
    let mut fibers = Vec::new();
    let mut projections = Vec::new();
    for x in c.objects() {
        let (p, projs) = product_cat(&[d.fibers[x].clone(), e.fibers[x].clone()])?;
        fibers.push(p);
        projections.push(projs);
    }
    let pair_obj = |x: Obj, u: Obj, v: Obj| u * e.fibers[x].num_objects() + v;
    let pair_mor = |x: Obj, a: Mor, b: Mor| a * e.fibers[x].num_morphisms() + b;
    let restrict: Vec<Functor> = c
        .morphisms()
        .map(|y| {
            let (x, yy) = (c.cod(y), c.dom(y));
            let (pd, pe) = (&projections[x][0], &projections[x][1]);
            Functor {
                source: fibers[x].clone(),
                target: fibers[yy].clone(),
                obj: fibers[x].objects().map(|o| pair_obj(yy, d.ro(y, pd.obj[o]), e.ro(y, pe.obj[o]))).collect(),
                mor: fibers[x].morphisms().map(|m| pair_mor(yy, d.rm(y, pd.mor[m]), e.rm(y, pe.mor[m]))).collect(),
            }
        })
        .collect();
    let mut compositor = HashMap::new();
    for y in c.morphisms() {
        let x = c.cod(y);
        for &z in c.incoming(c.dom(y)) {
            let zz = c.dom(z);
            let (pd, pe) = (&projections[x][0], &projections[x][1]);
            let comps = fibers[x]
                .objects()
                .map(|o| pair_mor(zz, d.cc(y, z, pd.obj[o]), e.cc(y, z, pe.obj[o])))
                .collect();
            compositor.insert((y, z), comps);
        }
    }
    let unitor = c
        .objects()
        .map(|x| {
            let (pd, pe) = (&projections[x][0], &projections[x][1]);
            fibers[x].objects().map(|o| pair_mor(x, d.uc(x, pd.obj[o]), e.uc(x, pe.obj[o]))).collect()
        })
        .collect();
    let prod = Arc::new(IndexedCat { base: d.base.clone(), fibers, restrict, compositor, unitor });
    let proj = |k: usize, t: &Arc<IndexedCat>| IndexedFun {
        source: prod.clone(),
        target: t.clone(),
        components: c.objects().map(|x| projections[x][k].clone()).collect(),
        cells: c
            .morphisms()
            .map(|y| {
                let yy = c.dom(y);
                prod.fibers[c.cod(y)]
                    .objects()
                    .map(|o| t.fibers[yy].id(projections[yy][k].obj[prod.ro(y, o)]))
                    .collect()
            })
            .collect(),
    };
    let p1 = proj(0, d);
    let p2 = proj(1, e);
    Ok((prod, p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn arrow() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j))
    }

    #[test]
    fn constant_terminal_is_valid() {
        let t = Arc::new(FinCat::terminal());
        for base in [t.clone(), arrow(), Arc::new(FinCat::cyclic_group(2))] {
            let d = IndexedCat::constant(&base, &t);
            assert!(validate_indexed(&d).is_empty());
            assert!(d.is_strict());
        }
    }

    #[test]
    fn non_functorial_strict_assignment_reported() {
        // Base: a -> b -> c with all composites; fibers discrete {0,1};
        // restrictions swap along each generator but the composite acts as
        // identity instead of swap∘swap... which is identity, so make it swap.
        let base = Arc::new(FinCat::preorder(&["a", "b", "c"], |i, j| i <= j));
        let two = Arc::new(FinCat::discrete(&["0", "1"]));
        let swap = Functor { source: two.clone(), target: two.clone(), obj: vec![1, 0], mor: vec![1, 0] };
        let restrict = base
            .morphisms()
            .map(|y| if base.is_identity(y) { Functor::identity(&two) } else { swap.clone() })
            .collect();
        let d = IndexedCat::strict(&base, vec![two.clone(); 3], restrict);
        let report = validate_indexed(&d);
        assert!(!report.is_empty());
        assert!(report.iter().any(|v| v.kind == "compositor" && v.detail.contains("b_c . a_b")));
    }

    #[test]
    fn non_coherent_compositor_reported() {
        // One-object base Z/2, fiber BZ/2, identity restrictions; a compositor
        // that is the nontrivial element only at (g, g) is a valid cocycle
        // twist, while putting it at (e, g) breaks unit coherence.
        let base = Arc::new(FinCat::cyclic_group(2));
        let k = Arc::new(FinCat::cyclic_group(2));
        let mut d = IndexedCat::constant(&base, &k);
        d.compositor.insert((1, 1), vec![1]);
        assert!(validate_indexed(&d).is_empty());
        assert!(!d.is_strict());
        d.compositor.insert((0, 1), vec![1]);
        assert!(validate_indexed(&d).iter().any(|v| v.kind == "unit-coherence"));
    }

    #[test]
    fn to_composite_and_transport() {
        let base = Arc::new(FinCat::cyclic_group(2));
        let k = Arc::new(FinCat::cyclic_group(2));
        let mut d = IndexedCat::constant(&base, &k);
        d.compositor.insert((1, 1), vec![1]);
        assert_eq!(d.to_composite(0, &[], 0), 0);
        assert_eq!(d.to_composite(0, &[1], 0), 0);
        assert_eq!(d.to_composite(0, &[1, 1], 0), 1);
        assert_eq!(d.transport(0, &[1, 1], &[0], 0), 1);
        assert_eq!(d.transport(0, &[1, 1], &[1, 1], 0), 0);
        assert_eq!(d.transport(0, &[], &[0], 0), 0);
    }

    #[test]
    fn products_and_pullbacks() {
        let base = arrow();
        let k = Arc::new(FinCat::chaotic(&["p", "q"]));
        let d = Arc::new(IndexedCat::constant(&base, &Arc::new(FinCat::discrete(&["0", "1"]))));
        let e = Arc::new(IndexedCat::constant(&base, &k));
        let (p, p1, p2) = product_indexed(&d, &e).unwrap();
        assert!(validate_indexed(&p).is_empty());
        assert_eq!(p.fibers[0].num_objects(), 4);
        assert!(p1.validate().is_empty());
        assert!(p2.validate().is_empty());

        let incl = Functor { source: Arc::new(FinCat::terminal()), target: base.clone(), obj: vec![1], mor: vec![base.id(1)] };
        let q = pullback_indexed(&p, &incl);
        assert!(validate_indexed(&q).is_empty());
        assert_eq!(q.fibers[0].num_objects(), 4);
    }
}
