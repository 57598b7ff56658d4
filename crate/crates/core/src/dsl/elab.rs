use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::closure::{close, Declared, Presentation};
use super::{Diagnostic, Document, IndexedEntry, MapEntry, Pos, SiteEntry};
use crate::error::{Error, Limits};
use crate::fincat::{FinCat, Functor, Mor, Obj};
use crate::indexed::{embed_discrete, validate_indexed, DiscretePresheaf, IndexedCat, IndexedFun};
use crate::site::{generate_sieve, saturate, CoveringFamily, Sieve, Topology};

type R<T> = Result<T, Diagnostic>;

fn err<T>(at: &Ident, message: impl Into<String>, hint: impl Into<String>) -> R<T> {
    Err(Diagnostic::new(at.pos, message, hint))
}

fn from_error(pos: Pos, e: Error) -> Diagnostic {
    let cap = matches!(e, Error::CapExceeded { .. });
    let mut d = Diagnostic::new(pos, e.to_string(), "raise the cap with the matching --max-* flag or shrink the input");
    if !cap {
        d.hint = "check the declaration against the validator message".into();
    }
    d.cap = cap;
    d
}

fn same(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

struct Ctx<'a> {
    doc: Document,
    /// Every name a morphism may be referred to by, per category.
    aliases: HashMap<String, HashMap<String, Mor>>,
    declared: HashSet<String>,
    limits: &'a Limits,
}

pub fn elaborate(doc: &SiteDoc, limits: &Limits) -> Result<Document, Diagnostic> {
    let mut cx = Ctx { doc: Document::default(), aliases: HashMap::new(), declared: HashSet::new(), limits };
    for item in &doc.items {
        if !matches!(item, Item::Site(_)) {
            let name = item.name();
            if !cx.declared.insert(name.name.clone()) {
                return err(name, format!("`{}` is declared twice", name.name), "rename one of the declarations");
            }
        }
        match item {
            Item::Category(d) => {
                let (c, aliases) = cx.category(d)?;
                cx.add_category(&d.name.name, c, aliases);
            }
            Item::Poset(d) => {
                let c = poset(d)?;
                cx.add_category(&d.name.name, c, HashMap::new());
            }
            Item::Functor(d) => {
                let f = cx.functor(d)?;
                cx.doc.functors.push((d.name.name.clone(), f));
            }
            Item::Site(d) => {
                let s = cx.site(d)?;
                cx.doc.sites.push(s);
            }
            Item::Indexed(d) => {
                let e = cx.indexed(d)?;
                cx.doc.indexed.push(e);
            }
            Item::Presheaf(d) => {
                let e = cx.presheaf(d)?;
                cx.doc.indexed.push(e);
            }
            Item::Map(d) => {
                let e = cx.map(d)?;
                cx.doc.maps.push(e);
            }
        }
    }
    Ok(cx.doc)
}

fn poset(d: &PosetDecl) -> R<FinCat> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut links = Vec::new();
    for chain in &d.chains {
        for (k, e) in chain.iter().enumerate() {
            if !index.contains_key(&e.name) {
                index.insert(e.name.clone(), names.len());
                names.push(e.name.clone());
            }
            if k > 0 {
                links.push((index[&chain[k - 1].name], index[&e.name]));
            }
        }
    }
    let n = names.len();
    let mut le = vec![vec![false; n]; n];
    for (i, row) in le.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in links {
        le[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if le[i][k] && le[k][j] {
                    le[i][j] = true;
                }
            }
        }
    }
    Ok(FinCat::preorder(&names, |i, j| le[i][j]))
}

/// Fills `known` for every morphism reachable from the known ones and the
/// identities by composition. `compose(g, f)` is the value at `g ∘ f`.
fn derive<T: Clone>(
    c: &FinCat,
    known: &mut [Option<T>],
    identity: impl Fn(Obj) -> Option<T>,
    compose: impl Fn(&T, &T) -> Option<T>,
) {
    for x in c.objects() {
        if known[c.id(x)].is_none() {
            known[c.id(x)] = identity(x);
        }
    }
    loop {
        let mut changed = false;
        for m in c.morphisms() {
            if known[m].is_some() {
                continue;
            }
            'search: for &f in c.outgoing(c.dom(m)) {
                for &g in c.hom(c.cod(f), c.cod(m)) {
                    if c.comp(g, f) != m {
                        continue;
                    }
                    if let (Some(vg), Some(vf)) = (&known[g], &known[f]) {
                        if let Some(v) = compose(vg, vf) {
                            known[m] = Some(v);
                            changed = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

impl Ctx<'_> {
    fn add_category(&mut self, name: &str, c: FinCat, mut aliases: HashMap<String, Mor>) {
        for m in c.morphisms() {
            aliases.entry(c.mor_name(m).to_string()).or_insert(m);
        }
        self.aliases.insert(name.to_string(), aliases);
        self.doc.categories.push((name.to_string(), Arc::new(c)));
    }

    fn cat(&self, id: &Ident) -> R<Arc<FinCat>> {
        match self.doc.category(&id.name) {
            Some(c) => Ok(c.clone()),
            None => err(id, format!("unknown category `{}`", id.name), "declare it with `category` or `poset` before use"),
        }
    }

    fn obj(&self, c: &FinCat, cname: &str, id: &Ident) -> R<Obj> {
        match c.find_object(&id.name) {
            Some(x) => Ok(x),
            None => err(id, format!("unknown object `{}` in `{cname}`", id.name), format!("objects of `{cname}`: {}", c.obj_names().join(", "))),
        }
    }

    fn mor(&self, c: &FinCat, cname: &str, id: &Ident) -> R<Mor> {
        let found = self.aliases.get(cname).and_then(|a| a.get(&id.name)).copied().or_else(|| c.find_morphism(&id.name));
        match found {
            Some(m) => Ok(m),
            None => err(id, format!("unknown morphism `{}` in `{cname}`", id.name), format!("declare `{}` under `morphisms:` in `{cname}`", id.name)),
        }
    }

    /// Name and aliases of a fiber category.
    fn fiber_name(&self, c: &Arc<FinCat>) -> String {
        self.doc.category_name(c).unwrap_or("").to_string()
    }

    fn category(&self, d: &CategoryDecl) -> R<(FinCat, HashMap<String, Mor>)> {
        match &d.body {
            CategoryBody::Builtin { builtin, args } => {
                let names: Vec<&str> = args.iter().map(|a| a.name.as_str()).collect();
                let c = match builtin.name.as_str() {
                    "terminal" if args.is_empty() => FinCat::terminal(),
                    "discrete" => FinCat::discrete(&names),
                    "chaotic" => FinCat::chaotic(&names),
                    "cyclic" => match names.as_slice() {
                        [n] => match n.parse::<usize>() {
                            Ok(n) if n > 0 => FinCat::cyclic_group(n),
                            _ => return err(builtin, "cyclic needs a positive order", "write `cyclic(2)`"),
                        },
                        _ => return err(builtin, "cyclic takes one argument", "write `cyclic(2)`"),
                    },
                    _ => {
                        return err(
                            builtin,
                            format!("unknown builtin `{}`", builtin.name),
                            "use `terminal`, `discrete(..)`, `chaotic(..)` or `cyclic(n)`",
                        )
                    }
                };
                Ok((c, HashMap::new()))
            }
            CategoryBody::Presented { objects, identities, morphisms, relations } => {
                self.presented(d, objects, identities, morphisms, relations)
            }
        }
    }

    fn presented(
        &self,
        d: &CategoryDecl,
        objects: &[Ident],
        identities: &[Ident],
        morphisms: &[MorDecl],
        relations: &[Relation],
    ) -> R<(FinCat, HashMap<String, Mor>)> {
        let mut obj_index: HashMap<&str, Obj> = HashMap::new();
        for o in objects {
            if obj_index.insert(&o.name, obj_index.len()).is_some() {
                return err(o, format!("object `{}` declared twice", o.name), "remove the duplicate");
            }
        }
        let obj = |id: &Ident| -> R<Obj> {
            obj_index.get(id.name.as_str()).copied().map_or_else(
                || err(id, format!("unknown object `{}`", id.name), "list it under `objects:`"),
                Ok,
            )
        };
        let identity_set: HashSet<&str> = identities.iter().map(|i| i.name.as_str()).collect();
        for i in identities {
            if !morphisms.iter().any(|m| m.name.name == i.name) {
                return err(i, format!("identity `{}` is not declared", i.name), format!("add `{0}: a -> a` under `morphisms:`", i.name));
            }
        }
        let mut generators = Vec::new();
        let mut declared = Vec::new();
        let mut identity_of: Vec<Option<String>> = vec![None; objects.len()];
        let mut seen = HashSet::new();
        // name -> identity object or generator index
        let mut resolve: HashMap<String, Result<Obj, usize>> = HashMap::new();
        for m in morphisms {
            if !seen.insert(m.name.name.as_str()) {
                return err(&m.name, format!("morphism `{}` declared twice", m.name.name), "remove the duplicate");
            }
            let (a, b) = (obj(&m.dom)?, obj(&m.cod)?);
            if identity_set.contains(m.name.name.as_str()) {
                if a != b {
                    return err(&m.name, format!("identity `{}` is not an endomorphism", m.name.name), "an identity has the form `e: a -> a`");
                }
                if identity_of[a].is_some() {
                    return err(&m.name, format!("object `{}` has two identities", m.dom.name), "keep one identity per object");
                }
                identity_of[a] = Some(m.name.name.clone());
                declared.push(Declared::Identity(a, m.name.name.clone()));
                resolve.insert(m.name.name.clone(), Ok(a));
            } else {
                declared.push(Declared::Generator(generators.len()));
                resolve.insert(m.name.name.clone(), Err(generators.len()));
                generators.push((m.name.name.clone(), a, b));
            }
        }
        for (a, o) in objects.iter().enumerate() {
            if identity_of[a].is_none() {
                resolve.entry(format!("id_{}", o.name)).or_insert(Ok(a));
            }
        }
        // typed words in application order
        let word = |path: &[Ident]| -> R<(Obj, Obj, Vec<usize>)> {
            let mut ends: Option<(Obj, Obj)> = None;
            let mut w = Vec::new();
            for id in path.iter().rev() {
                let (x, y, g) = match resolve.get(&id.name) {
                    Some(Ok(a)) => (*a, *a, None),
                    Some(Err(g)) => (generators[*g].1, generators[*g].2, Some(*g)),
                    None => return err(id, format!("unknown morphism `{}`", id.name), "declare it under `morphisms:`"),
                };
                ends = match ends {
                    None => Some((x, y)),
                    Some((s, t)) if t == x => Some((s, y)),
                    Some(_) => return err(id, format!("`{}` is not composable here", id.name), "in `g . f` the codomain of f must be the domain of g"),
                };
                w.extend(g);
            }
            let (s, t) = ends.expect("nonempty path");
            Ok((s, t, w))
        };
        let mut rels = Vec::new();
        for r in relations {
            let (a, b, l) = word(&r.lhs)?;
            let (c, dd, rr) = word(&r.rhs)?;
            if (a, b) != (c, dd) {
                return err(&r.lhs[0], "the two sides of the relation have different types", "both sides must go between the same objects");
            }
            rels.push((a, l, rr));
        }
        let p = Presentation {
            objects: objects.iter().map(|o| o.name.clone()).collect(),
            generators,
            declared,
            relations: rels,
        };
        let (c, mut names) = close(&p, self.limits.max_closure).map_err(|e| from_error(d.name.pos, e))?;
        for (name, r) in resolve {
            if let Ok(a) = r {
                names.entry(name).or_insert(c.id(a));
            }
        }
        if let Some(v) = c.validate().first() {
            return err(&d.name, format!("`{}` is not a category: {v}", d.name.name), "check the composition entries");
        }
        Ok((c, names))
    }

    fn functor(&self, d: &FunctorDecl) -> R<Functor> {
        let (s, t) = (self.cat(&d.source)?, self.cat(&d.target)?);
        self.functor_between(d, &s, &t)
    }

    fn functor_between(&self, d: &FunctorDecl, s: &Arc<FinCat>, t: &Arc<FinCat>) -> R<Functor> {
        let (sn, tn) = (&d.source.name, &d.target.name);
        let mut obj = vec![None; s.num_objects()];
        for (a, b) in &d.objects {
            obj[self.obj(s, sn, a)?] = Some(self.obj(t, tn, b)?);
        }
        if let Some(x) = obj.iter().position(Option::is_none) {
            return err(&d.name, format!("object `{}` has no image", s.obj_name(x)), format!("add `{} -> ..` under `objects:`", s.obj_name(x)));
        }
        let obj: Vec<Obj> = obj.into_iter().map(Option::unwrap).collect();
        let mut mor = vec![None; s.num_morphisms()];
        for (f, g) in &d.morphisms {
            mor[self.mor(s, sn, f)?] = Some(self.mor(t, tn, g)?);
        }
        derive(s, &mut mor, |x| Some(t.id(obj[x])), |g, f| t.try_comp(*g, *f));
        if let Some(m) = mor.iter().position(Option::is_none) {
            return err(&d.name, format!("image of `{}` is not determined", s.mor_name(m)), format!("add `{} -> ..` under `morphisms:`", s.mor_name(m)));
        }
        let f = Functor { source: s.clone(), target: t.clone(), obj, mor: mor.into_iter().map(Option::unwrap).collect() };
        if let Some(v) = f.validate().first() {
            return err(&d.name, format!("`{}` is not a functor: {v}", d.name.name), "check the object and morphism images");
        }
        Ok(f)
    }

    fn site(&self, d: &SiteDecl) -> R<SiteEntry> {
        let c = self.cat(&d.category)?;
        let cname = &d.category.name;
        if self.doc.site(cname).is_some() {
            return err(&d.category, format!("`{cname}` already has a topology"), "merge the two blocks");
        }
        let mut families = Vec::new();
        for (x, fam) in &d.families {
            let apex = self.obj(&c, cname, x)?;
            let arrows = fam.iter().map(|f| self.mor(&c, cname, f)).collect::<R<Vec<_>>>()?;
            if let Some(k) = arrows.iter().position(|&f| c.cod(f) != apex) {
                return err(&fam[k], format!("`{}` does not end at `{}`", fam[k].name, x.name), "every member of a family must have the covered object as codomain");
            }
            families.push(CoveringFamily { apex, arrows });
        }
        let topology = if d.saturate {
            saturate(&c, &families, self.limits).map_err(|e| from_error(d.category.pos, e))?
        } else {
            let mut covers = vec![std::collections::BTreeSet::new(); c.num_objects()];
            for fam in &families {
                let s: Sieve = generate_sieve(&c, fam).map_err(|e| from_error(d.category.pos, e))?;
                covers[fam.apex].insert(s);
            }
            Topology::from_covers(&c, covers)
        };
        Ok(SiteEntry { category: cname.clone(), topology, saturated: d.saturate })
    }

    fn functor_named(&self, id: &Ident) -> R<Functor> {
        match self.doc.functors.iter().find(|(n, _)| *n == id.name) {
            Some((_, f)) => Ok(f.clone()),
            None => err(id, format!("unknown functor `{}`", id.name), "declare it with a `functor` block before use"),
        }
    }

    fn indexed(&self, d: &IndexedDecl) -> R<IndexedEntry> {
        let base = self.cat(&d.base)?;
        let bn = &d.base.name;
        let mut fibers = vec![None; base.num_objects()];
        for (x, k) in &d.fibers {
            fibers[self.obj(&base, bn, x)?] = Some(self.cat(k)?);
        }
        if let Some(x) = fibers.iter().position(Option::is_none) {
            return err(&d.name, format!("no fiber over `{}`", base.obj_name(x)), format!("add `fiber {} = CATEGORY;`", base.obj_name(x)));
        }
        let fibers: Vec<Arc<FinCat>> = fibers.into_iter().map(Option::unwrap).collect();
        let mut restrict: Vec<Option<Functor>> = vec![None; base.num_morphisms()];
        for (y, fname) in &d.restrictions {
            let y = self.mor(&base, bn, y)?;
            let f = self.functor_named(fname)?;
            if !same(&f.source, &fibers[base.cod(y)]) || !same(&f.target, &fibers[base.dom(y)]) {
                return err(fname, format!("`{}` does not go between the right fibers", fname.name), format!(
                    "restriction along `{}` must go from the fiber over `{}` to the fiber over `{}`",
                    base.mor_name(y), base.obj_name(base.cod(y)), base.obj_name(base.dom(y))
                ));
            }
            restrict[y] = Some(Functor { source: fibers[base.cod(y)].clone(), target: fibers[base.dom(y)].clone(), ..f });
        }
        let fill = |restrict: &mut Vec<Option<Functor>>| {
            derive(&base, restrict, |x| Some(Functor::identity(&fibers[x])), |g, f| {
                // D(g ∘ f) = D(f) ∘ D(g)
                same(&g.target, &f.source).then(|| f.after(g))
            })
        };
        fill(&mut restrict);
        // an undeclared arrow between equal fibers restricts by the identity,
        // one arrow at a time so that composites still follow from declarations
        while let Some(y) = (0..restrict.len())
            .find(|&y| restrict[y].is_none() && Arc::ptr_eq(&fibers[base.dom(y)], &fibers[base.cod(y)]))
        {
            restrict[y] = Some(Functor::identity(&fibers[base.dom(y)]));
            fill(&mut restrict);
        }
        if let Some(y) = restrict.iter().position(Option::is_none) {
            return err(&d.name, format!("restriction along `{}` is not determined", base.mor_name(y)), format!("add `restrict {} = FUNCTOR;`", base.mor_name(y)));
        }
        let restrict: Vec<Functor> = restrict.into_iter().map(Option::unwrap).collect();
        if d.strict && (!d.compositors.is_empty() || !d.unitors.is_empty()) {
            return err(&d.name, "a strict indexed category cannot list coherence cells", "remove `strict;` or the cells");
        }
        if d.strict {
            let ic = IndexedCat::strict(&base, fibers, restrict);
            if let Some(v) = validate_indexed(&ic).first() {
                return err(&d.name, format!("`{}` is not an indexed category: {v}", d.name.name), "a strict indexed category needs D(y . z) = D(z) . D(y) on the nose");
            }
            return Ok(IndexedEntry { name: d.name.name.clone(), base: bn.clone(), indexed: Arc::new(ic), presheaf: None });
        }
        let mut compositor = HashMap::new();
        for y in base.morphisms() {
            for &z in base.incoming(base.dom(y)) {
                let yz = base.comp(y, z);
                let fib = &fibers[base.dom(z)];
                let comps: Vec<Mor> = fibers[base.cod(y)]
                    .objects()
                    .map(|u| {
                        let (a, b) = (restrict[z].on_obj(restrict[y].on_obj(u)), restrict[yz].on_obj(u));
                        if a == b { fib.id(a) } else { usize::MAX }
                    })
                    .collect();
                compositor.insert((y, z), comps);
            }
        }
        for (y, z, u, m) in &d.compositors {
            let (yi, zi) = (self.mor(&base, bn, y)?, self.mor(&base, bn, z)?);
            if base.dom(yi) != base.cod(zi) {
                return err(z, "compositor morphisms are not composable", "write `compositor y, z @ U = m;` with `dom y = cod z`");
            }
            let fu = &fibers[base.cod(yi)];
            let ui = self.obj(fu, &self.fiber_name(fu), u)?;
            let fz = &fibers[base.dom(zi)];
            let mi = self.mor(fz, &self.fiber_name(fz), m)?;
            let (a, b) = (restrict[zi].on_obj(restrict[yi].on_obj(ui)), restrict[base.comp(yi, zi)].on_obj(ui));
            if fz.dom(mi) != a || fz.cod(mi) != b {
                return err(m, format!("`{}` does not go from {} to {}", m.name, fz.obj_name(a), fz.obj_name(b)), "a compositor cell goes from D(z)D(y)U to D(yz)U");
            }
            compositor.get_mut(&(yi, zi)).expect("compositor key")[ui] = mi;
        }
        for ((y, z), comps) in &compositor {
            if let Some(u) = comps.iter().position(|&m| m == usize::MAX) {
                return err(&d.name, format!(
                    "compositor at ({}, {}) on `{}` is not determined",
                    base.mor_name(*y), base.mor_name(*z), fibers[base.cod(*y)].obj_name(u)
                ), format!("add `compositor {}, {} @ {} = m;`", base.mor_name(*y), base.mor_name(*z), fibers[base.cod(*y)].obj_name(u)));
            }
        }
        let mut unitor: Vec<Vec<Mor>> = base
            .objects()
            .map(|x| {
                let fib = &fibers[x];
                fib.objects().map(|u| if restrict[base.id(x)].on_obj(u) == u { fib.id(u) } else { usize::MAX }).collect()
            })
            .collect();
        for (x, u, m) in &d.unitors {
            let xi = self.obj(&base, bn, x)?;
            let fib = &fibers[xi];
            let fname = self.fiber_name(fib);
            let (ui, mi) = (self.obj(fib, &fname, u)?, self.mor(fib, &fname, m)?);
            let target = restrict[base.id(xi)].on_obj(ui);
            if fib.dom(mi) != ui || fib.cod(mi) != target {
                return err(m, format!("`{}` does not go from {} to {}", m.name, fib.obj_name(ui), fib.obj_name(target)), "a unitor cell goes from U to D(id)U");
            }
            unitor[xi][ui] = mi;
        }
        for x in base.objects() {
            if let Some(u) = unitor[x].iter().position(|&m| m == usize::MAX) {
                let un = fibers[x].obj_name(u);
                return err(&d.name, format!("unitor over `{}` at `{un}` is not determined", base.obj_name(x)), format!("add `unitor {} @ {un} = m;`", base.obj_name(x)));
            }
        }
        let ic = IndexedCat { base: base.clone(), fibers, restrict, compositor, unitor };
        if let Some(v) = validate_indexed(&ic).first() {
            return err(&d.name, format!("`{}` is not an indexed category: {v}", d.name.name), "check the restrictions and coherence cells");
        }
        Ok(IndexedEntry { name: d.name.name.clone(), base: bn.clone(), indexed: Arc::new(ic), presheaf: None })
    }

    fn presheaf(&self, d: &PresheafDecl) -> R<IndexedEntry> {
        let base = self.cat(&d.base)?;
        let bn = &d.base.name;
        let mut values: Vec<Option<Vec<String>>> = vec![None; base.num_objects()];
        for (x, elems) in &d.values {
            let xi = self.obj(&base, bn, x)?;
            let mut seen = HashSet::new();
            for e in elems {
                if !seen.insert(e.name.as_str()) {
                    return err(e, format!("element `{}` listed twice", e.name), "element names must be distinct within a set");
                }
            }
            values[xi] = Some(elems.iter().map(|e| e.name.clone()).collect());
        }
        if let Some(x) = values.iter().position(Option::is_none) {
            return err(&d.name, format!("no set over `{}`", base.obj_name(x)), format!("add `{} = {{..}};`", base.obj_name(x)));
        }
        let values: Vec<Vec<String>> = values.into_iter().map(Option::unwrap).collect();
        let find = |x: Obj, e: &Ident| -> R<usize> {
            values[x].iter().position(|v| *v == e.name).map_or_else(
                || err(e, format!("`{}` is not an element over `{}`", e.name, base.obj_name(x)), format!("elements over `{}`: {}", base.obj_name(x), values[x].join(", "))),
                Ok,
            )
        };
        let mut actions: Vec<Option<Vec<usize>>> = vec![None; base.num_morphisms()];
        for (f, pairs) in &d.actions {
            let fi = self.mor(&base, bn, f)?;
            let (src, tgt) = (base.cod(fi), base.dom(fi));
            let mut act = vec![usize::MAX; values[src].len()];
            for (a, b) in pairs {
                act[find(src, a)?] = find(tgt, b)?;
            }
            if let Some(k) = act.iter().position(|&s| s == usize::MAX) {
                return err(f, format!("action of `{}` does not map `{}`", f.name, values[src][k]), format!("add `{} -> ..` to the action of `{}`", values[src][k], f.name));
            }
            actions[fi] = Some(act);
        }
        derive(&base, &mut actions, |x| Some((0..values[x].len()).collect()), |g, f| {
            // F(g ∘ f) = F(f) ∘ F(g)
            g.iter().map(|&s| f.get(s).copied()).collect()
        });
        if let Some(y) = actions.iter().position(Option::is_none) {
            return err(&d.name, format!("action of `{}` is not determined", base.mor_name(y)), format!("add `{}: .. -> ..;`", base.mor_name(y)));
        }
        let p = DiscretePresheaf { base: base.clone(), values, actions: actions.into_iter().map(Option::unwrap).collect() };
        if let Some(v) = p.validate().first() {
            return err(&d.name, format!("`{}` is not a presheaf: {v}", d.name.name), "check the actions");
        }
        Ok(IndexedEntry { name: d.name.name.clone(), base: bn.clone(), indexed: Arc::new(embed_discrete(&p)), presheaf: Some(p) })
    }

    fn indexed_named(&self, id: &Ident) -> R<IndexedEntry> {
        match self.doc.indexed(&id.name) {
            Some(e) => Ok(e.clone()),
            None => err(id, format!("unknown indexed category `{}`", id.name), "declare it with an `indexed` or `presheaf` block before use"),
        }
    }

    fn map(&self, d: &MapDecl) -> R<MapEntry> {
        let (se, te) = (self.indexed_named(&d.source)?, self.indexed_named(&d.target)?);
        let (s, t) = (&se.indexed, &te.indexed);
        if !same(&s.base, &t.base) {
            return err(&d.target, "source and target live over different categories", "both must be declared over the same base");
        }
        let base = &s.base;
        let bn = &se.base;
        let mut comps: Vec<Option<Functor>> = vec![None; base.num_objects()];
        for (x, f) in &d.components {
            let xi = self.obj(base, bn, x)?;
            let f = self.functor_named(f)?;
            if !same(&f.source, &s.fibers[xi]) || !same(&f.target, &t.fibers[xi]) {
                return err(x, format!("component over `{}` does not go between the fibers", x.name), "the component over X goes from the source fiber over X to the target fiber over X");
            }
            comps[xi] = Some(Functor { source: s.fibers[xi].clone(), target: t.fibers[xi].clone(), ..f });
        }
        for x in base.objects() {
            if comps[x].is_none() {
                if same(&s.fibers[x], &t.fibers[x]) {
                    comps[x] = Some(Functor { target: t.fibers[x].clone(), ..Functor::identity(&s.fibers[x]) });
                } else {
                    return err(&d.name, format!("no component over `{}`", base.obj_name(x)), format!("add `component {} = FUNCTOR;`", base.obj_name(x)));
                }
            }
        }
        let components: Vec<Functor> = comps.into_iter().map(Option::unwrap).collect();
        let mut cells: Vec<Vec<Mor>> = base
            .morphisms()
            .map(|y| {
                let (x, yy) = (base.cod(y), base.dom(y));
                let fib = &t.fibers[yy];
                s.fibers[x]
                    .objects()
                    .map(|a| {
                        let (p, q) = (t.ro(y, components[x].on_obj(a)), components[yy].on_obj(s.ro(y, a)));
                        if p == q { fib.id(p) } else { usize::MAX }
                    })
                    .collect()
            })
            .collect();
        for (y, a, m) in &d.cells {
            let yi = self.mor(base, bn, y)?;
            let (x, yy) = (base.cod(yi), base.dom(yi));
            let sf = &s.fibers[x];
            let ai = self.obj(sf, &self.fiber_name(sf), a)?;
            let tf = &t.fibers[yy];
            let mi = self.mor(tf, &self.fiber_name(tf), m)?;
            let (p, q) = (t.ro(yi, components[x].on_obj(ai)), components[yy].on_obj(s.ro(yi, ai)));
            if tf.dom(mi) != p || tf.cod(mi) != q {
                return err(m, format!("`{}` does not go from {} to {}", m.name, tf.obj_name(p), tf.obj_name(q)), "a cell over y at a goes from T(y)(F a) to F(S(y) a)");
            }
            cells[yi][ai] = mi;
        }
        for y in base.morphisms() {
            if let Some(a) = cells[y].iter().position(|&m| m == usize::MAX) {
                let an = s.fibers[base.cod(y)].obj_name(a);
                return err(&d.name, format!("cell over `{}` at `{an}` is not determined", base.mor_name(y)), format!("add `cell {} @ {an} = m;`", base.mor_name(y)));
            }
        }
        let fun = IndexedFun { source: s.clone(), target: t.clone(), components, cells };
        if let Some(v) = fun.validate().first() {
            return err(&d.name, format!("`{}` is not an indexed functor: {v}", d.name.name), "check the components and cells");
        }
        Ok(MapEntry { name: d.name.name.clone(), fibration: d.fibration, source: se.name, target: te.name, fun })
    }
}
