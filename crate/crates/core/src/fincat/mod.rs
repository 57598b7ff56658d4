//! Finite categories given by explicit tables.
//!
//! Objects and morphisms are dense indices; names are carried only for
//! display and serialization. Identity of morphisms is nominal: two
//! categories are only ever compared up to an explicitly computed
//! equivalence (see [`Functor::is_equivalence`]).

mod functor;
mod search;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Limits, Result};

pub use functor::{EsoWitness, FfWitness, Functor, NatTrans};
pub use search::{enumerate_functors, find_nat_iso, find_quasi_inverse};

pub type Obj = usize;
pub type Mor = usize;

/// One entry of a validation report. An empty report means "valid".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: &str, detail: impl Into<String>) -> Self {
        Violation { kind: kind.to_string(), detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCat {
    obj_names: Vec<String>,
    mor_names: Vec<String>,
    dom: Vec<Obj>,
    cod: Vec<Obj>,
    identity: Vec<Mor>,
    comp: HashMap<(Mor, Mor), Mor>,
    hom: HashMap<(Obj, Obj), Vec<Mor>>,
    incoming: Vec<Vec<Mor>>,
    outgoing: Vec<Vec<Mor>>,
    inverse: Vec<Option<Mor>>,
}

impl FinCat {
    /// Assembles a category from raw tables. Index ranges are checked; the
    /// category axioms are not (use [`FinCat::validate`]).
    pub fn from_parts(
        objects: Vec<String>,
        morphisms: Vec<(String, Obj, Obj)>,
        identity: Vec<Mor>,
        comp: HashMap<(Mor, Mor), Mor>,
    ) -> Result<FinCat> {
        let n = objects.len();
        let m = morphisms.len();
        if identity.len() != n {
            return Err(Error::Invalid(format!(
                "identity table has {} entries for {} objects",
                identity.len(),
                n
            )));
        }
        let mut mor_names = Vec::with_capacity(m);
        let mut dom = Vec::with_capacity(m);
        let mut cod = Vec::with_capacity(m);
        for (name, d, c) in morphisms {
            if d >= n || c >= n {
                return Err(Error::Invalid(format!("morphism {name} has an out-of-range endpoint")));
            }
            mor_names.push(name);
            dom.push(d);
            cod.push(c);
        }
        if let Some(&bad) = identity.iter().find(|&&i| i >= m) {
            return Err(Error::Invalid(format!("identity refers to unknown morphism {bad}")));
        }
        for (&(g, f), &h) in &comp {
            if g >= m || f >= m || h >= m {
                return Err(Error::Invalid("composition table refers to unknown morphisms".into()));
            }
        }
        let mut hom: HashMap<(Obj, Obj), Vec<Mor>> = HashMap::new();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for f in 0..m {
            hom.entry((dom[f], cod[f])).or_default().push(f);
            incoming[cod[f]].push(f);
            outgoing[dom[f]].push(f);
        }
        let mut cat = FinCat {
            obj_names: objects,
            mor_names,
            dom,
            cod,
            identity,
            comp,
            hom,
            incoming,
            outgoing,
            inverse: Vec::new(),
        };
        cat.inverse = (0..m).map(|f| cat.search_inverse(f)).collect();
        Ok(cat)
    }

    /// Builds a category whose composition is computed by `compose` on every
    /// composable pair `(g, f)` (meaning `g ∘ f`).
    pub fn build(
        objects: Vec<String>,
        morphisms: Vec<(String, Obj, Obj)>,
        identity: Vec<Mor>,
        mut compose: impl FnMut(Mor, Mor) -> Result<Mor>,
    ) -> Result<FinCat> {
        let n = objects.len();
        let mut into: Vec<Vec<Mor>> = vec![Vec::new(); n];
        let mut out: Vec<Vec<Mor>> = vec![Vec::new(); n];
        for (i, (_, d, c)) in morphisms.iter().enumerate() {
            if *d >= n || *c >= n {
                return Err(Error::Invalid("morphism endpoint out of range".into()));
            }
            into[*c].push(i);
            out[*d].push(i);
        }
        let mut comp = HashMap::new();
        for x in 0..n {
            for &f in &into[x] {
                for &g in &out[x] {
                    comp.insert((g, f), compose(g, f)?);
                }
            }
        }
        FinCat::from_parts(objects, morphisms, identity, comp)
    }

    pub fn num_objects(&self) -> usize {
        self.obj_names.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.mor_names.len()
    }

    pub fn objects(&self) -> std::ops::Range<Obj> {
        0..self.obj_names.len()
    }

    pub fn morphisms(&self) -> std::ops::Range<Mor> {
        0..self.mor_names.len()
    }

    pub fn obj_name(&self, x: Obj) -> &str {
        &self.obj_names[x]
    }

    pub fn mor_name(&self, f: Mor) -> &str {
        &self.mor_names[f]
    }

    pub fn obj_names(&self) -> &[String] {
        &self.obj_names
    }

    pub fn mor_names(&self) -> &[String] {
        &self.mor_names
    }

    pub fn find_object(&self, name: &str) -> Option<Obj> {
        self.obj_names.iter().position(|n| n == name)
    }

    pub fn find_morphism(&self, name: &str) -> Option<Mor> {
        self.mor_names.iter().position(|n| n == name)
    }

    pub fn dom(&self, f: Mor) -> Obj {
        self.dom[f]
    }

    pub fn cod(&self, f: Mor) -> Obj {
        self.cod[f]
    }

    pub fn id(&self, x: Obj) -> Mor {
        self.identity[x]
    }

    pub fn is_identity(&self, f: Mor) -> bool {
        self.identity[self.dom[f]] == f
    }

    /// `g ∘ f`, if the pair is in the table.
    pub fn try_comp(&self, g: Mor, f: Mor) -> Option<Mor> {
        self.comp.get(&(g, f)).copied()
    }

    /// `g ∘ f`. Panics if the pair is not composable; callers work with
    /// validated categories only.
    pub fn comp(&self, g: Mor, f: Mor) -> Mor {
        match self.comp.get(&(g, f)) {
            Some(&h) => h,
            None => panic!(
                "composite {} . {} undefined (cod {} vs dom {})",
                self.mor_names[g],
                self.mor_names[f],
                self.obj_names[self.cod[f]],
                self.obj_names[self.dom[g]]
            ),
        }
    }

    /// Composes a chain `fs[0] ∘ fs[1] ∘ ... ∘ fs[k-1]`.
    pub fn comp_all(&self, fs: &[Mor]) -> Mor {
        let mut it = fs.iter().rev();
        let first = *it.next().expect("empty chain");
        it.fold(first, |acc, &g| self.comp(g, acc))
    }

    pub fn hom(&self, x: Obj, y: Obj) -> &[Mor] {
        self.hom.get(&(x, y)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Morphisms with codomain `x`.
    pub fn incoming(&self, x: Obj) -> &[Mor] {
        &self.incoming[x]
    }

    /// Morphisms with domain `x`.
    pub fn outgoing(&self, x: Obj) -> &[Mor] {
        &self.outgoing[x]
    }

    pub fn inverse(&self, f: Mor) -> Option<Mor> {
        self.inverse[f]
    }

    pub fn is_iso(&self, f: Mor) -> bool {
        self.inverse[f].is_some()
    }

    pub fn isos(&self, x: Obj, y: Obj) -> impl Iterator<Item = Mor> + '_ {
        self.hom(x, y).iter().copied().filter(move |&f| self.is_iso(f))
    }

    pub fn are_isomorphic(&self, x: Obj, y: Obj) -> bool {
        self.isos(x, y).next().is_some()
    }

    /// Groups objects into isomorphism classes; returns a class id per object.
    pub fn iso_classes(&self) -> Vec<usize> {
        let n = self.num_objects();
        let mut class = vec![usize::MAX; n];
        let mut next = 0;
        for x in 0..n {
            if class[x] != usize::MAX {
                continue;
            }
            for y in x..n {
                if class[y] == usize::MAX && self.are_isomorphic(x, y) {
                    class[y] = next;
                }
            }
            next += 1;
        }
        class
    }

    pub fn is_discrete(&self) -> bool {
        self.morphisms().all(|f| self.is_identity(f))
    }

    pub fn is_groupoid(&self) -> bool {
        self.morphisms().all(|f| self.is_iso(f))
    }

    pub fn max_homset(&self) -> usize {
        self.hom.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn check_homset_cap(&self, limits: &Limits) -> Result<()> {
        let largest = self.max_homset();
        if largest > limits.max_homset {
            return Err(Error::cap(format!("hom-set of size {largest}"), limits.max_homset));
        }
        Ok(())
    }

    fn search_inverse(&self, f: Mor) -> Option<Mor> {
        let (x, y) = (self.dom[f], self.cod[f]);
        let idx = *self.identity.get(x)?;
        let idy = *self.identity.get(y)?;
        self.hom(y, x).iter().copied().find(|&g| {
            self.comp.get(&(g, f)) == Some(&idx) && self.comp.get(&(f, g)) == Some(&idy)
        })
    }

    /// Exhaustive check of the category axioms. Empty report = valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let n = self.num_objects();
        for x in 0..n {
            let i = self.identity[x];
            if self.dom[i] != x || self.cod[i] != x {
                report.push(Violation::new(
                    "identity",
                    format!("identity of {} is not an endomorphism of it", self.obj_names[x]),
                ));
            }
        }
        for (&(g, f), &h) in &self.comp {
            if self.dom[g] != self.cod[f] {
                report.push(Violation::new(
                    "composition",
                    format!(
                        "table entry {} . {} for a non-composable pair",
                        self.mor_names[g], self.mor_names[f]
                    ),
                ));
            } else if self.dom[h] != self.dom[f] || self.cod[h] != self.cod[g] {
                report.push(Violation::new(
                    "composition",
                    format!(
                        "{} . {} = {} has the wrong endpoints",
                        self.mor_names[g], self.mor_names[f], self.mor_names[h]
                    ),
                ));
            }
        }
        for x in 0..n {
            for &f in &self.incoming[x] {
                for &g in &self.outgoing[x] {
                    if !self.comp.contains_key(&(g, f)) {
                        report.push(Violation::new(
                            "composition",
                            format!("missing composite {} . {}", self.mor_names[g], self.mor_names[f]),
                        ));
                    }
                }
            }
        }
        if !report.is_empty() {
            return report;
        }
        for f in self.morphisms() {
            let (x, y) = (self.dom[f], self.cod[f]);
            if self.comp[&(self.identity[y], f)] != f {
                report.push(Violation::new(
                    "unit-law",
                    format!("id_{} . {} != {}", self.obj_names[y], self.mor_names[f], self.mor_names[f]),
                ));
            }
            if self.comp[&(f, self.identity[x])] != f {
                report.push(Violation::new(
                    "unit-law",
                    format!("{} . id_{} != {}", self.mor_names[f], self.obj_names[x], self.mor_names[f]),
                ));
            }
        }
        for f in self.morphisms() {
            for &g in &self.outgoing[self.cod[f]] {
                let gf = self.comp[&(g, f)];
                for &h in &self.outgoing[self.cod[g]] {
                    let hg = self.comp[&(h, g)];
                    if self.comp[&(h, gf)] != self.comp[&(hg, f)] {
                        report.push(Violation::new(
                            "associativity",
                            format!(
                                "({} . {}) . {} != {} . ({} . {})",
                                self.mor_names[h],
                                self.mor_names[g],
                                self.mor_names[f],
                                self.mor_names[h],
                                self.mor_names[g],
                                self.mor_names[f]
                            ),
                        ));
                    }
                }
            }
        }
        report
    }

    /// The category with one object and one morphism.
    pub fn terminal() -> FinCat {
        FinCat::discrete(&["*"])
    }

    pub fn discrete<S: AsRef<str>>(names: &[S]) -> FinCat {
        let objects: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let morphisms = objects.iter().enumerate().map(|(i, n)| (format!("id_{n}"), i, i)).collect();
        let identity = (0..objects.len()).collect();
        FinCat::build(objects, morphisms, identity, |g, _| Ok(g)).expect("discrete category")
    }

    /// The category on a finite preorder given by `le(i, j)` (i ≤ j gives a
    /// unique morphism i → j). `le` must be reflexive and transitive.
    pub fn preorder<S: AsRef<str>>(names: &[S], le: impl Fn(Obj, Obj) -> bool) -> FinCat {
        let objects: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let n = objects.len();
        let mut morphisms = Vec::new();
        let mut index = HashMap::new();
        let mut identity = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                if i == j || le(i, j) {
                    let name = if i == j {
                        format!("id_{}", objects[i])
                    } else {
                        format!("{}_{}", objects[i], objects[j])
                    };
                    if i == j {
                        identity[i] = morphisms.len();
                    }
                    index.insert((i, j), morphisms.len());
                    morphisms.push((name, i, j));
                }
            }
        }
        let ends: Vec<(Obj, Obj)> = morphisms.iter().map(|(_, d, c)| (*d, *c)).collect();
        FinCat::build(objects, morphisms, identity, |g, f| {
            index
                .get(&(ends[f].0, ends[g].1))
                .copied()
                .ok_or_else(|| Error::Invalid("preorder relation is not transitive".into()))
        })
        .expect("preorder category")
    }

    /// Two objects with a unique isomorphism between them.
    pub fn chaotic<S: AsRef<str>>(names: &[S]) -> FinCat {
        FinCat::preorder(names, |_, _| true)
    }

    /// The one-object category of a finite cyclic group of order `n`.
    pub fn cyclic_group(n: usize) -> FinCat {
        assert!(n > 0);
        let morphisms = (0..n)
            .map(|k| (if k == 0 { "e".to_string() } else { format!("g{k}") }, 0, 0))
            .collect();
        FinCat::build(vec!["*".into()], morphisms, vec![0], |g, f| Ok((g + f) % n))
            .expect("cyclic group")
    }

    pub fn into_arc(self) -> Arc<FinCat> {
        Arc::new(self)
    }
}

/// Product of a nonempty list of categories, with its projections.
pub fn product_cat(cs: &[Arc<FinCat>]) -> Result<(Arc<FinCat>, Vec<Functor>)> {
    if cs.is_empty() {
        return Err(Error::Precondition("product of an empty list of categories".into()));
    }
    let obj_tuples = cartesian(cs.iter().map(|c| c.num_objects()).collect());
    let mor_tuples = cartesian(cs.iter().map(|c| c.num_morphisms()).collect());
    let obj_index: HashMap<&Vec<usize>, Obj> = obj_tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mor_index: HashMap<&Vec<usize>, Mor> = mor_tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let objects: Vec<String> = obj_tuples
        .iter()
        .map(|t| tuple_name(t.iter().enumerate().map(|(k, &x)| cs[k].obj_name(x))))
        .collect();
    let morphisms: Vec<(String, Obj, Obj)> = mor_tuples
        .iter()
        .map(|t| {
            let d: Vec<usize> = t.iter().enumerate().map(|(k, &f)| cs[k].dom(f)).collect();
            let c: Vec<usize> = t.iter().enumerate().map(|(k, &f)| cs[k].cod(f)).collect();
            (
                tuple_name(t.iter().enumerate().map(|(k, &f)| cs[k].mor_name(f))),
                obj_index[&d],
                obj_index[&c],
            )
        })
        .collect();
    let identity: Vec<Mor> = obj_tuples
        .iter()
        .map(|t| {
            let ids: Vec<usize> = t.iter().enumerate().map(|(k, &x)| cs[k].id(x)).collect();
            mor_index[&ids]
        })
        .collect();
    let cat = FinCat::build(objects, morphisms, identity, |g, f| {
        let t: Vec<usize> = (0..cs.len())
            .map(|k| cs[k].comp(mor_tuples[g][k], mor_tuples[f][k]))
            .collect();
        Ok(mor_index[&t])
    })?
    .into_arc();
    let projections = (0..cs.len())
        .map(|k| Functor {
            source: cat.clone(),
            target: cs[k].clone(),
            obj: obj_tuples.iter().map(|t| t[k]).collect(),
            mor: mor_tuples.iter().map(|t| t[k]).collect(),
        })
        .collect();
    Ok((cat, projections))
}

fn tuple_name<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    let v: Vec<&str> = parts.collect();
    if v.len() == 1 {
        v[0].to_string()
    } else {
        format!("({})", v.join(","))
    }
}

/// All tuples `t` with `t[k] < sizes[k]`, in lexicographic order.
pub(crate) fn cartesian(sizes: Vec<usize>) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in &sizes {
        let mut next = Vec::with_capacity(out.len() * s);
        for t in &out {
            for i in 0..s {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}
