//! Exhaustive searches over functors and natural isomorphisms. Only meant
//! for desk-scale categories.

use std::sync::Arc;

use super::{FinCat, Functor, Mor, NatTrans, Obj};
use crate::error::{Error, Result};

/// Every functor `source → target`, failing once more than `cap` are found.
pub fn enumerate_functors(source: &Arc<FinCat>, target: &Arc<FinCat>, cap: usize) -> Result<Vec<Functor>> {
    let (s, t) = (&**source, &**target);
    let mut out = Vec::new();
    let mut obj = vec![usize::MAX; s.num_objects()];
    objects_rec(s, t, 0, &mut obj, &mut |obj| {
        let mut mor = vec![usize::MAX; s.num_morphisms()];
        for x in s.objects() {
            mor[s.id(x)] = t.id(obj[x]);
        }
        let order: Vec<Mor> = s.morphisms().filter(|&f| !s.is_identity(f)).collect();
        morphisms_rec(s, t, obj, &order, 0, &mut mor, &mut |mor| {
            out.push(Functor { source: source.clone(), target: target.clone(), obj: obj.to_vec(), mor: mor.to_vec() });
            if out.len() > cap {
                return Err(Error::cap("functor enumeration", cap));
            }
            Ok(())
        })
    })?;
    Ok(out)
}

fn objects_rec(
    s: &FinCat,
    t: &FinCat,
    i: usize,
    obj: &mut Vec<Obj>,
    k: &mut dyn FnMut(&[Obj]) -> Result<()>,
) -> Result<()> {
    if i == s.num_objects() {
        return k(obj);
    }
    for y in t.objects() {
        obj[i] = y;
        objects_rec(s, t, i + 1, obj, k)?;
    }
    Ok(())
}

fn morphisms_rec(
    s: &FinCat,
    t: &FinCat,
    obj: &[Obj],
    order: &[Mor],
    i: usize,
    mor: &mut Vec<Mor>,
    k: &mut dyn FnMut(&[Mor]) -> Result<()>,
) -> Result<()> {
    if i == order.len() {
        return k(mor);
    }
    let f = order[i];
    let candidates: Vec<Mor> = t.hom(obj[s.dom(f)], obj[s.cod(f)]).to_vec();
    for g in candidates {
        mor[f] = g;
        if consistent(s, t, mor, f) {
            morphisms_rec(s, t, obj, order, i + 1, mor, k)?;
        }
    }
    mor[f] = usize::MAX;
    Ok(())
}

/// Checks every composition constraint that involves `f` and only assigned
/// morphisms.
fn consistent(s: &FinCat, t: &FinCat, mor: &[Mor], f: Mor) -> bool {
    let set = |g: Mor| mor[g] != usize::MAX;
    for &g in s.outgoing(s.cod(f)) {
        let h = s.comp(g, f);
        if set(g) && set(h) && t.comp(mor[g], mor[f]) != mor[h] {
            return false;
        }
    }
    for &e in s.incoming(s.dom(f)) {
        let h = s.comp(f, e);
        if set(e) && set(h) && t.comp(mor[f], mor[e]) != mor[h] {
            return false;
        }
    }
    // f as a composite g . e
    for &e in s.outgoing(s.dom(f)) {
        for &g in s.incoming(s.cod(f)) {
            if s.dom(g) == s.cod(e) && s.comp(g, e) == f && set(g) && set(e) && t.comp(mor[g], mor[e]) != mor[f] {
                return false;
            }
        }
    }
    true
}

/// A natural isomorphism `f ⇒ g` (same endpoints), if one exists.
pub fn find_nat_iso(f: &Functor, g: &Functor) -> Option<NatTrans> {
    let s = &*f.source;
    let t = &*f.target;
    let n = s.num_objects();
    let mut comps = vec![usize::MAX; n];
    fn rec(s: &FinCat, t: &FinCat, f: &Functor, g: &Functor, x: usize, comps: &mut Vec<Mor>) -> bool {
        if x == s.num_objects() {
            return true;
        }
        let candidates: Vec<Mor> = t.isos(f.obj[x], g.obj[x]).collect();
        for c in candidates {
            comps[x] = c;
            let ok = s.morphisms().all(|m| {
                let (a, b) = (s.dom(m), s.cod(m));
                if a > x || b > x {
                    return true;
                }
                t.comp(g.mor[m], comps[a]) == t.comp(comps[b], f.mor[m])
            });
            if ok && rec(s, t, f, g, x + 1, comps) {
                return true;
            }
        }
        comps[x] = usize::MAX;
        false
    }
    if rec(s, t, f, g, 0, &mut comps) {
        Some(NatTrans { source: f.clone(), target: g.clone(), components: comps })
    } else {
        None
    }
}

/// Searches all functors `target → source` for a quasi-inverse of `f`.
pub fn find_quasi_inverse(f: &Functor, cap: usize) -> Result<Option<Functor>> {
    let candidates = enumerate_functors(&f.target, &f.source, cap)?;
    let id_s = Functor::identity(&f.source);
    let id_t = Functor::identity(&f.target);
    Ok(candidates.into_iter().find(|g| {
        find_nat_iso(&g.after(f), &id_s).is_some() && find_nat_iso(&f.after(g), &id_t).is_some()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functors_between_arrow_categories() {
        let a = Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        // Functors 2 → 2 are monotone maps: 3 of them.
        let fs = enumerate_functors(&a, &a, 100).unwrap();
        assert_eq!(fs.len(), 3);
        for f in &fs {
            assert!(f.validate().is_empty());
        }
    }

    #[test]
    fn functors_between_groups_are_homomorphisms() {
        let z3 = Arc::new(FinCat::cyclic_group(3));
        let z6 = Arc::new(FinCat::cyclic_group(6));
        assert_eq!(enumerate_functors(&z3, &z6, 100).unwrap().len(), 3);
    }

    #[test]
    fn chaotic_inclusion_has_quasi_inverse() {
        let t = Arc::new(FinCat::discrete(&["x"]));
        let c = Arc::new(FinCat::chaotic(&["x", "y"]));
        let f = Functor { source: t, target: c.clone(), obj: vec![0], mor: vec![c.id(0)] };
        assert!(f.is_equivalence());
        assert!(find_quasi_inverse(&f, 1000).unwrap().is_some());
    }

    #[test]
    fn non_equivalence_has_no_quasi_inverse() {
        let a = Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        let t = Arc::new(FinCat::terminal());
        let f = Functor::to_terminal(&a, &t);
        assert!(find_quasi_inverse(&f, 1000).unwrap().is_none());
    }

    #[test]
    fn cap_is_enforced() {
        let d = Arc::new(FinCat::discrete(&["a", "b", "c"]));
        assert!(matches!(enumerate_functors(&d, &d, 5), Err(Error::CapExceeded { .. })));
    }
}
