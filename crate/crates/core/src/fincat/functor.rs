use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FinCat, Mor, Obj, Violation};

/// A functor between finite categories, stored as object and morphism maps.
#[derive(Clone, Debug)]
pub struct Functor {
    pub source: Arc<FinCat>,
    pub target: Arc<FinCat>,
    pub obj: Vec<Obj>,
    pub mor: Vec<Mor>,
}

/// Why a functor failed to be fully faithful at the pair `(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfWitness {
    pub x: Obj,
    pub y: Obj,
    pub source_hom: usize,
    pub target_hom: usize,
    /// `true` if two source morphisms collide, `false` if some target
    /// morphism is not hit.
    pub not_faithful: bool,
}

/// A target object not isomorphic to any object in the image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsoWitness {
    pub unreached: Obj,
}

impl PartialEq for Functor {
    fn eq(&self, other: &Self) -> bool {
        self.obj == other.obj
            && self.mor == other.mor
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }
}

impl Functor {
    pub fn identity(c: &Arc<FinCat>) -> Functor {
        Functor {
            source: c.clone(),
            target: c.clone(),
            obj: c.objects().collect(),
            mor: c.morphisms().collect(),
        }
    }

    /// The unique functor into a one-object, one-morphism category.
    pub fn to_terminal(c: &Arc<FinCat>, terminal: &Arc<FinCat>) -> Functor {
        Functor {
            source: c.clone(),
            target: terminal.clone(),
            obj: vec![0; c.num_objects()],
            mor: vec![0; c.num_morphisms()],
        }
    }

    /// The constant functor at object `t` of `target`.
    pub fn constant(source: &Arc<FinCat>, target: &Arc<FinCat>, t: Obj) -> Functor {
        Functor {
            source: source.clone(),
            target: target.clone(),
            obj: vec![t; source.num_objects()],
            mor: vec![target.id(t); source.num_morphisms()],
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Functor) -> Functor {
        Functor {
            source: first.source.clone(),
            target: self.target.clone(),
            obj: first.obj.iter().map(|&x| self.obj[x]).collect(),
            mor: first.mor.iter().map(|&f| self.mor[f]).collect(),
        }
    }

    pub fn on_obj(&self, x: Obj) -> Obj {
        self.obj[x]
    }

    pub fn on_mor(&self, f: Mor) -> Mor {
        self.mor[f]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let (s, t) = (&*self.source, &*self.target);
        let mut report = Vec::new();
        if self.obj.len() != s.num_objects() || self.mor.len() != s.num_morphisms() {
            report.push(Violation::new("functor", "map sizes do not match the source category"));
            return report;
        }
        if self.obj.iter().any(|&x| x >= t.num_objects()) || self.mor.iter().any(|&f| f >= t.num_morphisms()) {
            report.push(Violation::new("functor", "map refers outside the target category"));
            return report;
        }
        for f in s.morphisms() {
            let g = self.mor[f];
            if t.dom(g) != self.obj[s.dom(f)] || t.cod(g) != self.obj[s.cod(f)] {
                report.push(Violation::new(
                    "functor",
                    format!("image of {} has the wrong endpoints", s.mor_name(f)),
                ));
            }
        }
        if !report.is_empty() {
            return report;
        }
        for x in s.objects() {
            if self.mor[s.id(x)] != t.id(self.obj[x]) {
                report.push(Violation::new(
                    "functor",
                    format!("identity of {} is not preserved", s.obj_name(x)),
                ));
            }
        }
        for f in s.morphisms() {
            for &g in s.outgoing(s.cod(f)) {
                if self.mor[s.comp(g, f)] != t.comp(self.mor[g], self.mor[f]) {
                    report.push(Violation::new(
                        "functor",
                        format!("composite {} . {} is not preserved", s.mor_name(g), s.mor_name(f)),
                    ));
                }
            }
        }
        report
    }

    pub fn fully_faithful(&self) -> Result<(), FfWitness> {
        let (s, t) = (&*self.source, &*self.target);
        let mut seen = vec![usize::MAX; t.num_morphisms()];
        for x in s.objects() {
            for y in s.objects() {
                let src = s.hom(x, y);
                let tgt = t.hom(self.obj[x], self.obj[y]);
                let stamp = x * s.num_objects() + y;
                let mut hit = 0;
                for &f in src {
                    let g = self.mor[f];
                    if seen[g] == stamp {
                        return Err(FfWitness {
                            x,
                            y,
                            source_hom: src.len(),
                            target_hom: tgt.len(),
                            not_faithful: true,
                        });
                    }
                    seen[g] = stamp;
                    hit += 1;
                }
                if hit != tgt.len() {
                    return Err(FfWitness { x, y, source_hom: src.len(), target_hom: tgt.len(), not_faithful: false });
                }
            }
        }
        Ok(())
    }

    pub fn is_fully_faithful(&self) -> bool {
        self.fully_faithful().is_ok()
    }

    pub fn essentially_surjective(&self) -> Result<(), EsoWitness> {
        let t = &*self.target;
        let mut reached = vec![false; t.num_objects()];
        for &fx in &self.obj {
            reached[fx] = true;
        }
        for y in t.objects() {
            if reached[y] {
                continue;
            }
            let hit = self.obj.iter().any(|&fx| t.are_isomorphic(fx, y));
            if !hit {
                return Err(EsoWitness { unreached: y });
            }
        }
        Ok(())
    }

    pub fn is_essentially_surjective(&self) -> bool {
        self.essentially_surjective().is_ok()
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_fully_faithful() && self.is_essentially_surjective()
    }

    /// Whether `m` is cartesian for this functor, by exhaustive search over
    /// the universal property: for every `n` with the same codomain and every
    /// `v` with `F(m) ∘ v = F(n)` there is exactly one `k` over `v` with
    /// `m ∘ k = n`.
    pub fn is_cartesian(&self, m: Mor) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        let a = s.cod(m);
        let a1 = s.dom(m);
        let pm = self.mor[m];
        for &n in s.incoming(a) {
            let c = s.dom(n);
            let pn = self.mor[n];
            for &v in t.hom(self.obj[c], self.obj[a1]) {
                if t.comp(pm, v) != pn {
                    continue;
                }
                let count = s
                    .hom(c, a1)
                    .iter()
                    .filter(|&&k| self.mor[k] == v && s.comp(m, k) == n)
                    .count();
                if count != 1 {
                    return false;
                }
            }
        }
        true
    }

    /// The unique `k` with `F(k) = v` and `m ∘ k = n`, if it exists.
    pub fn factor_through(&self, m: Mor, n: Mor, v: Mor) -> Option<Mor> {
        let s = &*self.source;
        let mut found = None;
        for &k in s.hom(s.dom(n), s.dom(m)) {
            if self.mor[k] == v && s.comp(m, k) == n {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }
}

/// A natural transformation `source ⇒ target` with one component per object
/// of the common source category.
#[derive(Clone, Debug)]
pub struct NatTrans {
    pub source: Functor,
    pub target: Functor,
    pub components: Vec<Mor>,
}

impl NatTrans {
    pub fn identity(f: &Functor) -> NatTrans {
        NatTrans {
            source: f.clone(),
            target: f.clone(),
            components: f.obj.iter().map(|&x| f.target.id(x)).collect(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let s = &*self.source.source;
        let t = &*self.source.target;
        let mut report = Vec::new();
        if self.components.len() != s.num_objects() {
            report.push(Violation::new("naturality", "wrong number of components"));
            return report;
        }
        for x in s.objects() {
            let c = self.components[x];
            if t.dom(c) != self.source.obj[x] || t.cod(c) != self.target.obj[x] {
                report.push(Violation::new(
                    "naturality",
                    format!("component at {} has the wrong endpoints", s.obj_name(x)),
                ));
            }
        }
        if !report.is_empty() {
            return report;
        }
        for f in s.morphisms() {
            let lhs = t.comp(self.target.mor[f], self.components[s.dom(f)]);
            let rhs = t.comp(self.components[s.cod(f)], self.source.mor[f]);
            if lhs != rhs {
                report.push(Violation::new(
                    "naturality",
                    format!("square at {} does not commute", s.mor_name(f)),
                ));
            }
        }
        report
    }

    pub fn is_iso(&self) -> bool {
        self.components.iter().all(|&c| self.source.target.is_iso(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(c: FinCat) -> Arc<FinCat> {
        Arc::new(c)
    }

    #[test]
    fn identity_is_equivalence() {
        for c in [FinCat::terminal(), FinCat::discrete(&["x", "y"]), FinCat::cyclic_group(3)] {
            let c = arc(c);
            let id = Functor::identity(&c);
            assert!(id.validate().is_empty());
            assert!(id.is_fully_faithful());
            assert!(id.is_essentially_surjective());
            assert!(id.is_equivalence());
        }
    }

    #[test]
    fn discrete_pair_to_terminal_is_not_full() {
        let d = arc(FinCat::discrete(&["x", "y"]));
        let t = arc(FinCat::terminal());
        let f = Functor::to_terminal(&d, &t);
        let w = f.fully_faithful().unwrap_err();
        assert_ne!(w.x, w.y);
        assert_eq!((w.source_hom, w.target_hom), (0, 1));
        assert!(!w.not_faithful);
    }

    #[test]
    fn arrow_into_arrow_with_iso_copy_is_fully_faithful() {
        // a -> b plus b' with b ≅ b'; a -> b' as well.
        let arrow = arc(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        let big = arc(FinCat::preorder(&["a", "b", "b2"], |i, j| i == j || i == 0 || (i > 0 && j > 0)));
        assert!(big.validate().is_empty());
        let inc = Functor {
            source: arrow.clone(),
            target: big.clone(),
            obj: vec![0, 1],
            mor: arrow
                .morphisms()
                .map(|f| big.hom(arrow.dom(f), arrow.cod(f))[0])
                .collect(),
        };
        assert!(inc.validate().is_empty());
        assert!(inc.is_fully_faithful());
        assert!(inc.is_equivalence());
    }

    #[test]
    fn one_object_into_discrete_pair_misses_the_other() {
        let t = arc(FinCat::discrete(&["x"]));
        let d = arc(FinCat::discrete(&["x", "y"]));
        let f = Functor { source: t, target: d, obj: vec![0], mor: vec![0] };
        assert_eq!(f.essentially_surjective(), Err(EsoWitness { unreached: 1 }));
        assert!(!f.is_equivalence());
    }

    #[test]
    fn chaotic_pair_inclusion_is_equivalence() {
        let t = arc(FinCat::discrete(&["x"]));
        let c = arc(FinCat::chaotic(&["x", "y"]));
        let f = Functor { source: t, target: c.clone(), obj: vec![0], mor: vec![c.id(0)] };
        assert!(f.validate().is_empty());
        assert!(f.is_essentially_surjective());
        assert!(f.is_fully_faithful());
        assert!(f.is_equivalence());
    }

    #[test]
    fn constant_from_arrow_to_terminal_is_not_equivalence() {
        let a = arc(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        let t = arc(FinCat::terminal());
        assert!(!Functor::to_terminal(&a, &t).is_equivalence());
    }

    #[test]
    fn projection_morphisms_are_cartesian() {
        let a = arc(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        let g = arc(FinCat::cyclic_group(2));
        let (p, proj) = super::super::product_cat(&[a.clone(), g]).unwrap();
        let pr = &proj[0];
        for m in p.morphisms() {
            // (f, e) is cartesian, (f, g1) is too (it is an iso in the group factor).
            assert!(pr.is_cartesian(m), "{}", p.mor_name(m));
        }
        let bang = Functor::to_terminal(&a, &arc(FinCat::terminal()));
        let i = a.find_morphism("a_b").unwrap();
        assert!(!bang.is_cartesian(i));
    }
}
