//! Sieves and Grothendieck topologies on finite categories.
//!
//! A topology is always stored saturated: `covers[x]` holds every covering
//! sieve at `x`. Coverages (families of arrows) are only an input format
//! and are elaborated by [`saturate`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Limits, Result};
use crate::fincat::{FinCat, Functor, Mor, Obj, Violation};

/// A set of morphisms into `apex`, closed under precomposition. Members are
/// kept sorted so that sieves can be compared and hashed structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sieve {
    pub apex: Obj,
    pub members: Vec<Mor>,
}

impl Sieve {
    /// Builds a sieve from members that are already known to be closed.
    pub fn from_members(apex: Obj, mut members: Vec<Mor>) -> Sieve {
        members.sort_unstable();
        members.dedup();
        Sieve { apex, members }
    }

    pub fn maximal(c: &FinCat, x: Obj) -> Sieve {
        Sieve::from_members(x, c.incoming(x).to_vec())
    }

    pub fn empty(x: Obj) -> Sieve {
        Sieve { apex: x, members: Vec::new() }
    }

    pub fn contains(&self, f: Mor) -> bool {
        self.members.binary_search(&f).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_maximal(&self, c: &FinCat) -> bool {
        self.contains(c.id(self.apex))
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.members.iter().all(|&f| other.contains(f))
    }

    /// Checks codomains and closure under precomposition.
    pub fn is_valid_in(&self, c: &FinCat) -> bool {
        self.members.iter().all(|&f| {
            c.cod(f) == self.apex && c.incoming(c.dom(f)).iter().all(|&g| self.contains(c.comp(f, g)))
        })
    }

    pub fn display(&self, c: &FinCat) -> String {
        let names: Vec<&str> = self.members.iter().map(|&f| c.mor_name(f)).collect();
        format!("{}: {{{}}}", c.obj_name(self.apex), names.join(", "))
    }
}

/// A finite family of arrows with common codomain; it generates a sieve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringFamily {
    pub apex: Obj,
    pub arrows: Vec<Mor>,
}

pub fn generate_sieve(c: &FinCat, fam: &CoveringFamily) -> Result<Sieve> {
    if let Some(&f) = fam.arrows.iter().find(|&&f| c.cod(f) != fam.apex) {
        return Err(Error::Precondition(format!(
            "family at {} contains {} with codomain {}",
            c.obj_name(fam.apex),
            c.mor_name(f),
            c.obj_name(c.cod(f))
        )));
    }
    let mut members = BTreeSet::new();
    for &f in &fam.arrows {
        for &g in c.incoming(c.dom(f)) {
            members.insert(c.comp(f, g));
        }
    }
    Ok(Sieve { apex: fam.apex, members: members.into_iter().collect() })
}

/// `y*(R) = { h | y ∘ h ∈ R }`.
pub fn pullback_sieve(c: &FinCat, r: &Sieve, y: Mor) -> Result<Sieve> {
    if c.cod(y) != r.apex {
        return Err(Error::Precondition(format!(
            "cannot pull back a sieve on {} along {}",
            c.obj_name(r.apex),
            c.mor_name(y)
        )));
    }
    Ok(pullback_unchecked(c, r, y))
}

pub(crate) fn pullback_unchecked(c: &FinCat, r: &Sieve, y: Mor) -> Sieve {
    let members = c.incoming(c.dom(y)).iter().copied().filter(|&h| r.contains(c.comp(y, h))).collect();
    Sieve::from_members(c.dom(y), members)
}

pub fn intersect_sieves(r: &Sieve, s: &Sieve) -> Result<Sieve> {
    if r.apex != s.apex {
        return Err(Error::Precondition("intersection of sieves with different apexes".into()));
    }
    Ok(Sieve { apex: r.apex, members: r.members.iter().copied().filter(|&f| s.contains(f)).collect() })
}

/// The sieve generated by `{ f ∘ g | f ∈ R, g ∈ assign(f) }`.
pub fn compose_sieve(c: &FinCat, r: &Sieve, assign: &HashMap<Mor, Sieve>) -> Result<Sieve> {
    let mut arrows = Vec::new();
    for &f in &r.members {
        let s = assign
            .get(&f)
            .ok_or_else(|| Error::Precondition(format!("no sieve assigned to {}", c.mor_name(f))))?;
        if s.apex != c.dom(f) {
            return Err(Error::Precondition(format!(
                "sieve assigned to {} lives at {}, expected {}",
                c.mor_name(f),
                c.obj_name(s.apex),
                c.obj_name(c.dom(f))
            )));
        }
        arrows.extend(s.members.iter().map(|&g| c.comp(f, g)));
    }
    generate_sieve(c, &CoveringFamily { apex: r.apex, arrows })
}

/// Every sieve at `x`, enumerated as down-closed subsets of the arrows into
/// `x` under precomposition.
pub fn all_sieves(c: &FinCat, x: Obj, cap: usize) -> Result<Vec<Sieve>> {
    let arrows = c.incoming(x).to_vec();
    let pos: HashMap<Mor, usize> = arrows.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    // down[i]: indices of f_i ∘ g for all g
    let down: Vec<Vec<usize>> = arrows
        .iter()
        .map(|&f| c.incoming(c.dom(f)).iter().map(|&g| pos[&c.comp(f, g)]).collect())
        .collect();
    let mut state = vec![0u8; arrows.len()]; // 0 undecided, 1 in, 2 out
    let mut out = Vec::new();
    fn rec(
        i: usize,
        arrows: &[Mor],
        down: &[Vec<usize>],
        state: &mut Vec<u8>,
        out: &mut Vec<Sieve>,
        x: Obj,
        cap: usize,
    ) -> Result<()> {
        if i == arrows.len() {
            let members = (0..arrows.len()).filter(|&k| state[k] == 1).map(|k| arrows[k]).collect();
            out.push(Sieve::from_members(x, members));
            if out.len() > cap {
                return Err(Error::cap("sieves per object", cap));
            }
            return Ok(());
        }
        if state[i] != 0 {
            return rec(i + 1, arrows, down, state, out, x, cap);
        }
        // exclude
        state[i] = 2;
        rec(i + 1, arrows, down, state, out, x, cap)?;
        // include, with its down-closure
        if down[i].iter().all(|&k| state[k] != 2 || k == i) {
            let touched: Vec<usize> = down[i].iter().copied().filter(|&k| state[k] == 0 || k == i).collect();
            for &k in &touched {
                state[k] = 1;
            }
            rec(i + 1, arrows, down, state, out, x, cap)?;
            for &k in &touched {
                state[k] = 0;
            }
        }
        state[i] = 0;
        Ok(())
    }
    rec(0, &arrows, &down, &mut state, &mut out, x, cap)?;
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub base: Arc<FinCat>,
    pub covers: Vec<BTreeSet<Sieve>>,
}

impl Topology {
    /// Only maximal sieves cover.
    pub fn trivial(base: &Arc<FinCat>) -> Topology {
        Topology {
            base: base.clone(),
            covers: base.objects().map(|x| BTreeSet::from([Sieve::maximal(base, x)])).collect(),
        }
    }

    /// Wraps explicitly listed covering sieves without saturating them.
    pub fn from_covers(base: &Arc<FinCat>, covers: Vec<BTreeSet<Sieve>>) -> Topology {
        Topology { base: base.clone(), covers }
    }

    pub fn covers(&self, x: Obj) -> &BTreeSet<Sieve> {
        &self.covers[x]
    }

    pub fn is_covering(&self, s: &Sieve) -> bool {
        self.covers[s.apex].contains(s)
    }

    pub fn is_trivial(&self) -> bool {
        self.base.objects().all(|x| self.covers[x].len() == 1 && self.covers[x].iter().all(|s| s.is_maximal(&self.base)))
    }

    /// Reads the topology back as a coverage (one family per covering sieve).
    pub fn as_coverage(&self) -> Vec<CoveringFamily> {
        self.covers
            .iter()
            .flat_map(|set| set.iter().map(|s| CoveringFamily { apex: s.apex, arrows: s.members.clone() }))
            .collect()
    }

    pub fn num_covers(&self) -> usize {
        self.covers.iter().map(BTreeSet::len).sum()
    }
}

/// The smallest topology containing every sieve generated by the coverage.
pub fn saturate(base: &Arc<FinCat>, coverage: &[CoveringFamily], limits: &Limits) -> Result<Topology> {
    let c = &**base;
    let n = c.num_objects();
    let mut covers: Vec<HashSet<Sieve>> = (0..n).map(|x| HashSet::from([Sieve::maximal(c, x)])).collect();
    for fam in coverage {
        if fam.apex >= n {
            return Err(Error::Precondition("coverage family at an unknown object".into()));
        }
        let s = generate_sieve(c, fam)?;
        covers[fam.apex].insert(s);
    }
    let universe: Vec<Vec<Sieve>> = (0..n)
        .map(|x| all_sieves(c, x, limits.max_sieves_per_object))
        .collect::<Result<_>>()?;
    loop {
        let mut changed = false;
        // stability
        for x in 0..n {
            let current: Vec<Sieve> = covers[x].iter().cloned().collect();
            for r in &current {
                for &y in c.incoming(x) {
                    let p = pullback_unchecked(c, r, y);
                    changed |= covers[c.dom(y)].insert(p);
                }
            }
        }
        // transitivity (which also gives upward closure)
        for x in 0..n {
            let current: Vec<Sieve> = covers[x].iter().cloned().collect();
            for cand in &universe[x] {
                if covers[x].contains(cand) {
                    continue;
                }
                let local = current.iter().any(|s| {
                    s.members
                        .iter()
                        .all(|&f| covers[c.dom(f)].contains(&pullback_unchecked(c, cand, f)))
                });
                if local {
                    covers[x].insert(cand.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Topology { base: base.clone(), covers: covers.into_iter().map(|s| s.into_iter().collect()).collect() })
}

/// Exhaustive check of maximality, stability and transitivity.
pub fn validate_topology(j: &Topology, limits: &Limits) -> Result<Vec<Violation>> {
    let c = &*j.base;
    let mut report = Vec::new();
    if j.covers.len() != c.num_objects() {
        report.push(Violation::new("topology", "covers are not indexed by the objects of the base"));
        return Ok(report);
    }
    for x in c.objects() {
        for s in &j.covers[x] {
            if s.apex != x || !s.is_valid_in(c) {
                report.push(Violation::new("sieve", format!("{} is not a sieve at {}", s.display(c), c.obj_name(x))));
            }
        }
    }
    if !report.is_empty() {
        return Ok(report);
    }
    for x in c.objects() {
        if !j.covers[x].contains(&Sieve::maximal(c, x)) {
            report.push(Violation::new(
                "maximality",
                format!("the maximal sieve at {} is not covering", c.obj_name(x)),
            ));
        }
    }
    for x in c.objects() {
        for r in &j.covers[x] {
            for &y in c.incoming(x) {
                let p = pullback_unchecked(c, r, y);
                if !j.covers[c.dom(y)].contains(&p) {
                    report.push(Violation::new(
                        "stability",
                        format!("pullback of {} along {} is not covering", r.display(c), c.mor_name(y)),
                    ));
                }
            }
        }
    }
    for x in c.objects() {
        for cand in all_sieves(c, x, limits.max_sieves_per_object)? {
            if j.covers[x].contains(&cand) {
                continue;
            }
            let witness = j.covers[x].iter().find(|s| {
                s.members.iter().all(|&f| j.covers[c.dom(f)].contains(&pullback_unchecked(c, &cand, f)))
            });
            if let Some(s) = witness {
                report.push(Violation::new(
                    "transitivity",
                    format!("{} is locally covering along {} but not covering", cand.display(c), s.display(c)),
                ));
            }
        }
    }
    Ok(report)
}

/// Intersection of all covering sieves at `x`. For a valid topology on a
/// finite category this is again covering and is the minimum cover.
pub fn minimal_cover(j: &Topology, x: Obj) -> Sieve {
    let mut it = j.covers[x].iter();
    let first = it.next().cloned().unwrap_or_else(|| Sieve::maximal(&j.base, x));
    it.fold(first, |acc, s| intersect_sieves(&acc, s).expect("same apex"))
}

/// The slice category `C/x` with its induced topology.
#[derive(Clone, Debug)]
pub struct SliceSite {
    pub category: Arc<FinCat>,
    pub topology: Topology,
    /// The base morphism `g` represented by each slice object `[g]`.
    pub arrow_of: Vec<Mor>,
    /// For each slice morphism `[g ∘ h] → [g]`, the pair `(h, g)`.
    pub triangle_of: Vec<(Mor, Mor)>,
    /// The forgetful functor `C/x → C`.
    pub dom: Functor,
}

impl SliceSite {
    pub fn object_of(&self, g: Mor) -> Option<Obj> {
        self.arrow_of.iter().position(|&a| a == g)
    }
}

pub fn slice_site(j: &Topology, x: Obj) -> SliceSite {
    let c = &*j.base;
    let arrow_of: Vec<Mor> = c.incoming(x).to_vec();
    let obj_index: HashMap<Mor, Obj> = arrow_of.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let objects: Vec<String> = arrow_of.iter().map(|&g| format!("[{}]", c.mor_name(g))).collect();
    let mut triangle_of = Vec::new();
    let mut morphisms = Vec::new();
    let mut mor_index = HashMap::new();
    for &g in &arrow_of {
        for &h in c.incoming(c.dom(g)) {
            let gh = c.comp(g, h);
            mor_index.insert((h, g), morphisms.len());
            morphisms.push((format!("{}/{}", c.mor_name(h), c.mor_name(g)), obj_index[&gh], obj_index[&g]));
            triangle_of.push((h, g));
        }
    }
    let identity: Vec<Mor> = arrow_of.iter().map(|&g| mor_index[&(c.id(c.dom(g)), g)]).collect();
    let category = FinCat::build(objects, morphisms, identity, |second, first| {
        let (h2, g2) = triangle_of[second];
        let (h1, _) = triangle_of[first];
        Ok(mor_index[&(c.comp(h2, h1), g2)])
    })
    .expect("slice category")
    .into_arc();
    let dom = Functor {
        source: category.clone(),
        target: j.base.clone(),
        obj: arrow_of.iter().map(|&g| c.dom(g)).collect(),
        mor: triangle_of.iter().map(|&(h, _)| h).collect(),
    };
    let covers = arrow_of
        .iter()
        .enumerate()
        .map(|(obj, &g)| {
            j.covers[c.dom(g)]
                .iter()
                .map(|s| Sieve::from_members(obj, s.members.iter().map(|&h| mor_index[&(h, g)]).collect()))
                .collect()
        })
        .collect();
    let topology = Topology { base: category.clone(), covers };
    SliceSite { category, topology, arrow_of, triangle_of, dom }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow() -> Arc<FinCat> {
        Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j))
    }

    fn span() -> Arc<FinCat> {
        // p -> X <- q
        Arc::new(FinCat::preorder(&["p", "q", "X"], |i, j| i == j || j == 2))
    }

    fn m(c: &FinCat, name: &str) -> Mor {
        c.find_morphism(name).unwrap()
    }

    #[test]
    fn generate_from_identity_is_maximal() {
        let c = arrow();
        let b = 1;
        let s = generate_sieve(&c, &CoveringFamily { apex: b, arrows: vec![c.id(b)] }).unwrap();
        assert_eq!(s, Sieve::maximal(&c, b));
    }

    #[test]
    fn generate_on_arrow_and_span() {
        let c = arrow();
        let i = m(&c, "a_b");
        let s = generate_sieve(&c, &CoveringFamily { apex: 1, arrows: vec![i] }).unwrap();
        assert_eq!(s.members, vec![i]);

        let c = span();
        let (jp, jq) = (m(&c, "p_X"), m(&c, "q_X"));
        let s = generate_sieve(&c, &CoveringFamily { apex: 2, arrows: vec![jp, jq] }).unwrap();
        assert_eq!(s.members, vec![jp, jq]);
    }

    #[test]
    fn mixed_codomains_rejected() {
        let c = span();
        let err = generate_sieve(&c, &CoveringFamily { apex: 2, arrows: vec![c.id(0)] });
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn pullbacks() {
        let c = arrow();
        let i = m(&c, "a_b");
        let s = Sieve::from_members(1, vec![i]);
        assert_eq!(pullback_sieve(&c, &s, i).unwrap(), Sieve::maximal(&c, 0));
        assert_eq!(pullback_sieve(&c, &Sieve::maximal(&c, 1), i).unwrap(), Sieve::maximal(&c, 0));
        assert_eq!(pullback_sieve(&c, &Sieve::empty(1), i).unwrap(), Sieve::empty(0));
        assert!(pullback_sieve(&c, &Sieve::empty(0), i).is_err());
    }

    #[test]
    fn intersections() {
        let c = span();
        let (jp, jq) = (m(&c, "p_X"), m(&c, "q_X"));
        let r = Sieve::from_members(2, vec![jp, jq]);
        let s = generate_sieve(&c, &CoveringFamily { apex: 2, arrows: vec![jp] }).unwrap();
        assert_eq!(intersect_sieves(&r, &s).unwrap().members, vec![jp]);
        assert_eq!(intersect_sieves(&r, &Sieve::maximal(&c, 2)).unwrap(), r);
        assert_eq!(intersect_sieves(&r, &r).unwrap(), r);
    }

    #[test]
    fn composite_sieves() {
        let c = arrow();
        let i = m(&c, "a_b");
        let r = Sieve::from_members(1, vec![i]);
        let assign = HashMap::from([(i, Sieve::maximal(&c, 0))]);
        assert_eq!(compose_sieve(&c, &r, &assign).unwrap(), r);

        // R maximal at b, assign(id_b) = S, assign(f) = f*(S) gives S back.
        let max = Sieve::maximal(&c, 1);
        let mut assign = HashMap::new();
        for &f in &max.members {
            assign.insert(f, pullback_sieve(&c, &r, f).unwrap());
        }
        assert_eq!(compose_sieve(&c, &max, &assign).unwrap(), r);
        assert!(compose_sieve(&c, &max, &HashMap::new()).is_err());
    }

    #[test]
    fn saturation_examples() {
        let c = arrow();
        let t = saturate(&c, &[], &Limits::default()).unwrap();
        assert!(t.is_trivial());

        let i = m(&c, "a_b");
        let t = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap();
        assert_eq!(t.covers(1).len(), 2);
        assert!(t.covers(1).contains(&Sieve::from_members(1, vec![i])));
        assert_eq!(t.covers(0).len(), 1);
        assert!(validate_topology(&t, &Limits::default()).unwrap().is_empty());
        assert_eq!(minimal_cover(&t, 1).members, vec![i]);

        let c = span();
        let (jp, jq) = (m(&c, "p_X"), m(&c, "q_X"));
        let t = saturate(&c, &[CoveringFamily { apex: 2, arrows: vec![jp, jq] }], &Limits::default()).unwrap();
        assert_eq!(all_sieves(&c, 2, 100).unwrap().len(), 5);
        assert_eq!(t.covers(2).len(), 2);
        assert_eq!(minimal_cover(&t, 2).members, vec![jp, jq]);
    }

    #[test]
    fn missing_maximal_sieve_reported() {
        let c = arrow();
        let i = m(&c, "a_b");
        let mut covers: Vec<BTreeSet<Sieve>> = vec![BTreeSet::from([Sieve::maximal(&c, 0)]), BTreeSet::new()];
        covers[1].insert(Sieve::from_members(1, vec![i]));
        let t = Topology::from_covers(&c, covers);
        let report = validate_topology(&t, &Limits::default()).unwrap();
        assert!(report.iter().any(|v| v.kind == "maximality"));
    }

    #[test]
    fn trivial_topology_valid() {
        for c in [arrow(), span(), Arc::new(FinCat::cyclic_group(3))] {
            let t = Topology::trivial(&c);
            assert!(validate_topology(&t, &Limits::default()).unwrap().is_empty());
            for x in c.objects() {
                assert_eq!(minimal_cover(&t, x), Sieve::maximal(&c, x));
            }
        }
    }

    #[test]
    fn slices() {
        let t = Arc::new(FinCat::terminal());
        let s = slice_site(&Topology::trivial(&t), 0);
        assert_eq!((s.category.num_objects(), s.category.num_morphisms()), (1, 1));
        assert!(s.topology.is_trivial());

        let c = arrow();
        let i = m(&c, "a_b");
        let j = saturate(&c, &[CoveringFamily { apex: 1, arrows: vec![i] }], &Limits::default()).unwrap();
        let s = slice_site(&j, 1);
        assert_eq!((s.category.num_objects(), s.category.num_morphisms()), (2, 3));
        assert!(s.category.validate().is_empty());
        assert!(s.dom.validate().is_empty());
        let top = s.object_of(c.id(1)).unwrap();
        assert_eq!(s.topology.covers(top).len(), 2);
        assert!(validate_topology(&s.topology, &Limits::default()).unwrap().is_empty());

        let c = span();
        let s = slice_site(&Topology::trivial(&c), 2);
        assert_eq!(s.category.num_objects(), 3);
        assert!(s.category.validate().is_empty());
    }
}
