//! The canonical explicit form of a document: every category as a full
//! table, every topology sieve by sieve, every restriction and component as
//! a named functor. Categories and functors that are not declared get
//! synthesized names of the form `OWNER/PART`.

use std::collections::HashSet;
use std::sync::Arc;

use super::ast::*;
use super::Document;
use crate::fincat::{FinCat, Functor};

struct Ex {
    cats: Vec<(String, Arc<FinCat>, Vec<String>, Vec<String>)>,
    functors: Vec<(String, Functor)>,
    used: HashSet<String>,
}

fn id(s: &str) -> Ident {
    Ident::new(s)
}

/// Distinct labels: repeated names get a `#k` suffix.
fn distinct(names: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .iter()
        .map(|n| {
            let mut m = n.clone();
            let mut k = 1;
            while !seen.insert(m.clone()) {
                k += 1;
                m = format!("{n}#{k}");
            }
            m
        })
        .collect()
}

fn is_identity_functor(f: &Functor) -> bool {
    (Arc::ptr_eq(&f.source, &f.target) || f.source == f.target)
        && f.obj.iter().enumerate().all(|(i, &x)| i == x)
        && f.mor.iter().enumerate().all(|(i, &m)| i == m)
}

impl Ex {
    fn fresh(&mut self, want: String) -> String {
        let mut n = want;
        while self.used.contains(&n) {
            n.push('\'');
        }
        self.used.insert(n.clone());
        n
    }

    fn cat(&mut self, c: &Arc<FinCat>, suggest: impl FnOnce() -> String) -> usize {
        if let Some(k) = self.cats.iter().position(|(_, k, _, _)| Arc::ptr_eq(k, c)) {
            return k;
        }
        if let Some(k) = self.cats.iter().position(|(_, k, _, _)| **k == **c) {
            return k;
        }
        let name = self.fresh(suggest());
        self.push_cat(name, c);
        self.cats.len() - 1
    }

    fn push_cat(&mut self, name: String, c: &Arc<FinCat>) {
        let objs = distinct(c.obj_names());
        let mors = distinct(c.mor_names());
        self.cats.push((name, c.clone(), objs, mors));
    }

    fn functor(&mut self, f: &Functor, suggest: impl FnOnce() -> String) -> String {
        if let Some((n, _)) = self.functors.iter().find(|(_, g)| g == f) {
            return n.clone();
        }
        let name = self.fresh(suggest());
        self.cat(&f.source, || format!("{name}/source"));
        self.cat(&f.target, || format!("{name}/target"));
        self.functors.push((name.clone(), f.clone()));
        name
    }

    fn labels(&self, c: &Arc<FinCat>) -> (&[String], &[String]) {
        let k = self.find(c);
        (&self.cats[k].2, &self.cats[k].3)
    }

    fn cat_name(&self, c: &Arc<FinCat>) -> String {
        self.cats[self.find(c)].0.clone()
    }

    fn find(&self, c: &Arc<FinCat>) -> usize {
        self.cats
            .iter()
            .position(|(_, k, _, _)| Arc::ptr_eq(k, c))
            .or_else(|| self.cats.iter().position(|(_, k, _, _)| **k == **c))
            .expect("category registered")
    }
}

pub fn export(doc: &Document) -> SiteDoc {
    let mut ex = Ex { cats: Vec::new(), functors: Vec::new(), used: HashSet::new() };
    for n in doc.categories.iter().map(|(n, _)| n).chain(doc.functors.iter().map(|(n, _)| n)) {
        ex.used.insert(n.clone());
    }
    for e in &doc.indexed {
        ex.used.insert(e.name.clone());
    }
    for e in &doc.maps {
        ex.used.insert(e.name.clone());
    }
    for (n, c) in &doc.categories {
        ex.push_cat(n.clone(), c);
    }
    for (n, f) in &doc.functors {
        ex.functors.push((n.clone(), f.clone()));
    }
    let mut sites = Vec::new();
    for s in &doc.sites {
        let c = &s.topology.base;
        let k = ex.cat(c, || s.category.clone());
        let (objs, mors) = (&ex.cats[k].2, &ex.cats[k].3);
        let mut families = Vec::new();
        for x in c.objects() {
            for r in s.topology.covers(x) {
                families.push((id(&objs[x]), r.members.iter().map(|&m| id(&mors[m])).collect()));
            }
        }
        sites.push(Item::Site(SiteDecl { category: id(&ex.cats[k].0), saturate: false, families }));
    }
    let mut indexed = Vec::new();
    for e in &doc.indexed {
        let d = &e.indexed;
        let base = &d.base;
        ex.cat(base, || e.base.clone());
        let base_name = ex.cat_name(base);
        let (bobj, bmor) = {
            let (o, m) = ex.labels(base);
            (o.to_vec(), m.to_vec())
        };
        if let Some(p) = &e.presheaf {
            let values = base.objects().map(|x| (id(&bobj[x]), p.values[x].iter().map(|v| id(v)).collect())).collect();
            let actions = base
                .morphisms()
                .filter(|&y| !base.is_identity(y))
                .map(|y| {
                    let pairs = p.actions[y]
                        .iter()
                        .enumerate()
                        .map(|(s, &t)| (id(&p.values[base.cod(y)][s]), id(&p.values[base.dom(y)][t])))
                        .collect();
                    (id(&bmor[y]), pairs)
                })
                .collect();
            indexed.push(Item::Presheaf(PresheafDecl { name: id(&e.name), base: id(&base_name), values, actions }));
            continue;
        }
        let fibers = base
            .objects()
            .map(|x| {
                let k = ex.cat(&d.fibers[x], || format!("{}/{}", e.name, bobj[x]));
                (id(&bobj[x]), id(&ex.cats[k].0))
            })
            .collect();
        let mut restrictions = Vec::new();
        for y in base.morphisms() {
            let f = &d.restrict[y];
            if base.is_identity(y) && is_identity_functor(f) {
                continue;
            }
            let n = ex.functor(f, || format!("{}/{}", e.name, bmor[y]));
            restrictions.push((id(&bmor[y]), id(&n)));
        }
        let mut keys: Vec<_> = d.compositor.keys().copied().collect();
        keys.sort();
        let mut compositors = Vec::new();
        for (y, z) in keys {
            let fu = &d.fibers[base.cod(y)];
            let fz = &d.fibers[base.dom(z)];
            for (u, &m) in d.compositor[&(y, z)].iter().enumerate() {
                if !fz.is_identity(m) {
                    let (uo, _) = ex.labels(fu);
                    let un = uo[u].clone();
                    let (_, zm) = ex.labels(fz);
                    compositors.push((id(&bmor[y]), id(&bmor[z]), id(&un), id(&zm[m])));
                }
            }
        }
        let mut unitors = Vec::new();
        for x in base.objects() {
            let fib = &d.fibers[x];
            for (u, &m) in d.unitor[x].iter().enumerate() {
                if !fib.is_identity(m) {
                    let (uo, um) = ex.labels(fib);
                    unitors.push((id(&bobj[x]), id(&uo[u]), id(&um[m])));
                }
            }
        }
        let strict = compositors.is_empty() && unitors.is_empty();
        indexed.push(Item::Indexed(IndexedDecl {
            name: id(&e.name),
            base: id(&base_name),
            fibers,
            restrictions,
            compositors,
            unitors,
            strict,
        }));
    }
    let mut maps = Vec::new();
    for e in &doc.maps {
        let f = &e.fun;
        let base = &f.source.base;
        let (bobj, bmor) = {
            let (o, m) = ex.labels(base);
            (o.to_vec(), m.to_vec())
        };
        let mut components = Vec::new();
        for x in base.objects() {
            let n = ex.functor(&f.components[x], || format!("{}/{}", e.name, bobj[x]));
            components.push((id(&bobj[x]), id(&n)));
        }
        let mut cells = Vec::new();
        for y in base.morphisms() {
            let sf = &f.source.fibers[base.cod(y)];
            let tf = &f.target.fibers[base.dom(y)];
            for (a, &m) in f.cells[y].iter().enumerate() {
                if !tf.is_identity(m) {
                    let (so, _) = ex.labels(sf);
                    let an = so[a].clone();
                    let (_, tm) = ex.labels(tf);
                    cells.push((id(&bmor[y]), id(&an), id(&tm[m])));
                }
            }
        }
        maps.push(Item::Map(MapDecl {
            name: id(&e.name),
            fibration: e.fibration,
            source: id(&e.source),
            target: id(&e.target),
            components,
            cells,
        }));
    }
    let mut items = Vec::new();
    for (name, c, objs, mors) in &ex.cats {
        let identities = c.objects().map(|x| id(&mors[c.id(x)])).collect();
        let morphisms = c
            .morphisms()
            .map(|m| MorDecl { name: id(&mors[m]), dom: id(&objs[c.dom(m)]), cod: id(&objs[c.cod(m)]) })
            .collect();
        let mut relations = Vec::new();
        for f in c.morphisms().filter(|&f| !c.is_identity(f)) {
            for &g in c.outgoing(c.cod(f)) {
                if !c.is_identity(g) {
                    relations.push(Relation { lhs: vec![id(&mors[g]), id(&mors[f])], rhs: vec![id(&mors[c.comp(g, f)])] });
                }
            }
        }
        items.push(Item::Category(CategoryDecl {
            name: id(name),
            body: CategoryBody::Presented { objects: objs.iter().map(|o| id(o)).collect(), identities, morphisms, relations },
        }));
    }
    for (name, f) in &ex.functors {
        let (so, sm) = {
            let (o, m) = ex.labels(&f.source);
            (o.to_vec(), m.to_vec())
        };
        let (to, tm) = ex.labels(&f.target);
        let objects = f.obj.iter().enumerate().map(|(x, &y)| (id(&so[x]), id(&to[y]))).collect();
        let morphisms = f
            .mor
            .iter()
            .enumerate()
            .filter(|&(m, _)| !f.source.is_identity(m))
            .map(|(m, &n)| (id(&sm[m]), id(&tm[n])))
            .collect();
        items.push(Item::Functor(FunctorDecl {
            name: id(name),
            source: id(&ex.cat_name(&f.source)),
            target: id(&ex.cat_name(&f.target)),
            objects,
            morphisms,
        }));
    }
    items.extend(sites);
    items.extend(indexed);
    items.extend(maps);
    SiteDoc { items }
}
