//! Closure of a finite presentation (generators and relations) into a
//! composition table, by coset enumeration on the right action of the
//! generators. Fails with a cap error when more than `cap` classes are
//! defined.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::fincat::{FinCat, Mor, Obj};

/// One entry of the declared morphism list, in order.
#[derive(Clone, Debug)]
pub enum Declared {
    Identity(Obj, String),
    Generator(usize),
}

#[derive(Clone, Debug)]
pub struct Presentation {
    pub objects: Vec<String>,
    pub generators: Vec<(String, Obj, Obj)>,
    pub declared: Vec<Declared>,
    /// `(dom, lhs, rhs)`, words in application order.
    pub relations: Vec<(Obj, Vec<usize>, Vec<usize>)>,
}

struct Enum<'a> {
    p: &'a Presentation,
    dom: Vec<Obj>,
    cod: Vec<Obj>,
    parent: Vec<usize>,
    table: Vec<Vec<Option<usize>>>,
    cap: usize,
}

impl Enum<'_> {
    fn find(&mut self, mut k: usize) -> usize {
        while self.parent[k] != k {
            self.parent[k] = self.parent[self.parent[k]];
            k = self.parent[k];
        }
        k
    }

    fn define(&mut self, k: usize, g: usize) -> Result<usize> {
        if self.dom.len() >= self.cap {
            return Err(Error::cap("morphisms while closing a presentation", self.cap));
        }
        let n = self.dom.len();
        self.dom.push(self.dom[k]);
        self.cod.push(self.p.generators[g].2);
        self.parent.push(n);
        self.table.push(vec![None; self.p.generators.len()]);
        self.table[k][g] = Some(n);
        Ok(n)
    }

    fn get(&mut self, k: usize, g: usize) -> Option<usize> {
        let k = self.find(k);
        self.table[k][g].map(|t| self.find(t))
    }

    fn step(&mut self, k: usize, g: usize) -> Result<usize> {
        let k = self.find(k);
        match self.get(k, g) {
            Some(t) => Ok(t),
            None => self.define(k, g),
        }
    }

    fn trace(&mut self, mut k: usize, word: &[usize]) -> Result<usize> {
        for &g in word {
            k = self.step(k, g)?;
        }
        Ok(k)
    }

    fn coincide(&mut self, a: usize, b: usize) {
        let mut queue = VecDeque::from([(a, b)]);
        while let Some((a, b)) = queue.pop_front() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi] = lo;
            for g in 0..self.p.generators.len() {
                if let Some(t) = self.table[hi][g] {
                    match self.table[lo][g] {
                        None => self.table[lo][g] = Some(t),
                        Some(u) => queue.push_back((t, u)),
                    }
                }
            }
        }
    }

    /// Applies `lhs = rhs` at class `k`, deducing a missing last step from
    /// the other side when possible.
    fn relate(&mut self, k: usize, lhs: &[usize], rhs: &[usize]) -> Result<()> {
        let end = |e: &mut Self, w: &[usize]| -> Result<(usize, Option<usize>)> {
            match w.split_last() {
                None => Ok((k, None)),
                Some((&last, init)) => Ok((e.trace(k, init)?, Some(last))),
            }
        };
        let (a, ga) = end(self, lhs)?;
        let (b, gb) = end(self, rhs)?;
        let ra = match ga {
            None => Some(self.find(a)),
            Some(g) => self.get(a, g),
        };
        let rb = match gb {
            None => Some(self.find(b)),
            Some(g) => self.get(b, g),
        };
        match (ra, rb) {
            (Some(x), Some(y)) => self.coincide(x, y),
            (Some(x), None) => {
                let b = self.find(b);
                self.table[b][gb.expect("nonempty")] = Some(x);
            }
            (None, Some(y)) => {
                let a = self.find(a);
                self.table[a][ga.expect("nonempty")] = Some(y);
            }
            (None, None) => {
                let x = self.define(a, ga.expect("nonempty"))?;
                let b = self.find(b);
                self.table[b][gb.expect("nonempty")] = Some(x);
            }
        }
        Ok(())
    }
}

/// Returns the category and the morphism named by every declared name.
pub fn close(p: &Presentation, cap: usize) -> Result<(FinCat, HashMap<String, Mor>)> {
    let n = p.objects.len();
    let ng = p.generators.len();
    let mut e = Enum {
        p,
        dom: (0..n).collect(),
        cod: (0..n).collect(),
        parent: (0..n).collect(),
        table: vec![vec![None; ng]; n],
        cap: cap.max(n),
    };
    for (g, (_, d, _)) in p.generators.iter().enumerate() {
        if e.table[*d][g].is_none() {
            e.define(*d, g)?;
        }
    }
    let mut k = 0;
    while k < e.dom.len() {
        if e.find(k) == k {
            for (d, lhs, rhs) in &p.relations {
                if *d == e.cod[k] {
                    e.relate(k, lhs, rhs)?;
                }
            }
            for g in 0..ng {
                if e.find(k) == k && p.generators[g].1 == e.cod[k] {
                    e.step(k, g)?;
                }
            }
        }
        k += 1;
    }
    // shortlex words by breadth-first search from the identities
    let mut word: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut bfs = Vec::new();
    let mut queue: VecDeque<usize> = (0..n).map(|a| e.find(a)).collect();
    for a in 0..n {
        word.insert(e.find(a), Vec::new());
    }
    while let Some(k) = queue.pop_front() {
        bfs.push(k);
        for g in 0..ng {
            if p.generators[g].1 != e.cod[k] {
                continue;
            }
            let t = e.get(k, g).ok_or_else(|| Error::internal("incomplete closure table"))?;
            if !word.contains_key(&t) {
                let mut w = word[&k].clone();
                w.push(g);
                word.insert(t, w);
                queue.push_back(t);
            }
        }
    }
    // index order: implicit identities, declared morphisms, remaining classes
    let mut index: HashMap<usize, Mor> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut named: HashMap<String, Mor> = HashMap::new();
    let declared_identity: Vec<bool> =
        (0..n).map(|a| p.declared.iter().any(|d| matches!(d, Declared::Identity(b, _) if *b == a))).collect();
    for a in 0..n {
        if !declared_identity[a] {
            let k = e.find(a);
            index.insert(k, order.len());
            order.push(k);
            names.push(format!("id_{}", p.objects[a]));
        }
    }
    for d in &p.declared {
        let (k, name) = match d {
            Declared::Identity(a, name) => (e.find(*a), name.clone()),
            Declared::Generator(g) => (e.get(p.generators[*g].1, *g).expect("generator class"), p.generators[*g].0.clone()),
        };
        let m = *index.entry(k).or_insert_with(|| {
            order.push(k);
            names.push(name.clone());
            order.len() - 1
        });
        named.insert(name, m);
    }
    let taken: std::collections::HashSet<String> = names.iter().cloned().collect();
    for &k in &bfs {
        if index.contains_key(&k) {
            continue;
        }
        let w = &word[&k];
        let mut name = w.iter().rev().map(|&g| p.generators[g].0.as_str()).collect::<Vec<_>>().join(".");
        while taken.contains(&name) {
            name.push('\'');
        }
        index.insert(k, order.len());
        order.push(k);
        names.push(name);
    }
    let identity: Vec<Mor> = (0..n).map(|a| index[&e.find(a)]).collect();
    let morphisms = order.iter().zip(&names).map(|(&k, nm)| (nm.clone(), e.dom[k], e.cod[k])).collect();
    let words: Vec<Vec<usize>> = order.iter().map(|k| word[k].clone()).collect();
    let cat = FinCat::build(p.objects.clone(), morphisms, identity, |g, f| {
        let t = e.trace(order[f], &words[g])?;
        let t = e.find(t);
        index.get(&t).copied().ok_or_else(|| Error::internal("composite outside the closure"))
    })?;
    Ok((cat, named))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: usize) -> Presentation {
        Presentation {
            objects: vec!["*".into()],
            generators: vec![("t".into(), 0, 0)],
            declared: vec![Declared::Generator(0)],
            relations: vec![(0, vec![0; n], vec![])],
        }
    }

    #[test]
    fn cyclic_group_closes() {
        let (c, names) = close(&cyclic(3), 100).unwrap();
        assert_eq!(c.num_morphisms(), 3);
        assert!(c.validate().is_empty());
        let t = names["t"];
        assert_eq!(c.comp(t, c.comp(t, t)), c.id(0));
        assert_eq!(c.mor_name(2), "t.t");
    }

    #[test]
    fn free_category_on_a_path() {
        let p = Presentation {
            objects: vec!["a".into(), "b".into(), "c".into()],
            generators: vec![("f".into(), 0, 1), ("g".into(), 1, 2)],
            declared: vec![Declared::Generator(0), Declared::Generator(1)],
            relations: vec![],
        };
        let (c, _) = close(&p, 100).unwrap();
        assert_eq!(c.num_morphisms(), 6);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn free_monoid_hits_cap() {
        let p = Presentation {
            objects: vec!["*".into()],
            generators: vec![("t".into(), 0, 0)],
            declared: vec![Declared::Generator(0)],
            relations: vec![],
        };
        assert!(matches!(close(&p, 50), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn relation_merges_generators() {
        let p = Presentation {
            objects: vec!["a".into(), "b".into()],
            generators: vec![("f".into(), 0, 1), ("g".into(), 0, 1)],
            declared: vec![Declared::Generator(0), Declared::Generator(1)],
            relations: vec![(0, vec![0], vec![1])],
        };
        let (c, names) = close(&p, 100).unwrap();
        assert_eq!(c.num_morphisms(), 3);
        assert_eq!(names["f"], names["g"]);
    }
}
