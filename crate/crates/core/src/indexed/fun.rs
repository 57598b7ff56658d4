use std::collections::VecDeque;
use std::sync::Arc;

use super::{same_cat, IndexedCat};
use crate::error::{Error, Result};
use crate::fincat::{enumerate_functors, FinCat, Functor, Mor, Obj, Violation};

/// An indexed functor `S → T`: a functor per fiber plus pseudonaturality
/// cells. For `y: Y → X` and `a ∈ S(X)`, `cells[y][a]` is an isomorphism
/// `T(y)(F^X a) → F^Y(S(y) a)` in `T(Y)`.
#[derive(Clone, Debug)]
pub struct IndexedFun {
    pub source: Arc<IndexedCat>,
    pub target: Arc<IndexedCat>,
    pub components: Vec<Functor>,
    pub cells: Vec<Vec<Mor>>,
}

/// Strict equality: same component maps and the same cells.
impl PartialEq for IndexedFun {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
            && self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.obj == b.obj && a.mor == b.mor)
    }
}

impl IndexedFun {
    pub fn identity(d: &Arc<IndexedCat>) -> IndexedFun {
        let c = &*d.base;
        IndexedFun {
            source: d.clone(),
            target: d.clone(),
            components: c.objects().map(|x| Functor::identity(&d.fibers[x])).collect(),
            cells: c
                .morphisms()
                .map(|y| d.fibers[c.cod(y)].objects().map(|a| d.fibers[c.dom(y)].id(d.ro(y, a))).collect())
                .collect(),
        }
    }

    pub fn base(&self) -> &Arc<FinCat> {
        &self.source.base
    }

    /// `F^x(a)`.
    pub fn fo(&self, x: Obj, a: Obj) -> Obj {
        self.components[x].obj[a]
    }

    /// `F^x(m)`.
    pub fn fm(&self, x: Obj, m: Mor) -> Mor {
        self.components[x].mor[m]
    }

    pub fn cell(&self, y: Mor, a: Obj) -> Mor {
        self.cells[y][a]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let (s, t) = (&*self.source, &*self.target);
        let c = &*s.base;
        let mut report = Vec::new();
        if !same_cat(&s.base, &t.base) {
            report.push(Violation::new("indexed-functor", "source and target live over different bases"));
            return report;
        }
        if self.components.len() != c.num_objects() || self.cells.len() != c.num_morphisms() {
            report.push(Violation::new("indexed-functor", "component or cell table has the wrong size"));
            return report;
        }
        for x in c.objects() {
            let f = &self.components[x];
            if !same_cat(&f.source, &s.fibers[x]) || !same_cat(&f.target, &t.fibers[x]) {
                report.push(Violation::new(
                    "component",
                    format!("component at {} has the wrong endpoints", c.obj_name(x)),
                ));
                continue;
            }
            for v in f.validate() {
                report.push(Violation::new("component", format!("at {}: {}", c.obj_name(x), v)));
            }
        }
        if !report.is_empty() {
            return report;
        }
        for y in c.morphisms() {
            let (x, yy) = (c.cod(y), c.dom(y));
            let (sx, ty) = (&*s.fibers[x], &*t.fibers[yy]);
            if self.cells[y].len() != sx.num_objects() || self.cells[y].iter().any(|&m| m >= ty.num_morphisms()) {
                report.push(Violation::new("cell", format!("cell at {} has the wrong size", c.mor_name(y))));
                continue;
            }
            let mut ok = true;
            for a in sx.objects() {
                let m = self.cells[y][a];
                let (src, tgt) = (t.ro(y, self.fo(x, a)), self.fo(yy, s.ro(y, a)));
                if ty.dom(m) != src || ty.cod(m) != tgt {
                    report.push(Violation::new(
                        "cell",
                        format!("cell at {} has wrong endpoints at {}", c.mor_name(y), sx.obj_name(a)),
                    ));
                    ok = false;
                } else if !ty.is_iso(m) {
                    report.push(Violation::new(
                        "cell",
                        format!("cell at {} is not invertible at {}", c.mor_name(y), sx.obj_name(a)),
                    ));
                }
            }
            if !ok {
                continue;
            }
            for al in sx.morphisms() {
                let lhs = ty.comp(self.fm(yy, s.rm(y, al)), self.cells[y][sx.dom(al)]);
                let rhs = ty.comp(self.cells[y][sx.cod(al)], t.rm(y, self.fm(x, al)));
                if lhs != rhs {
                    report.push(Violation::new(
                        "cell",
                        format!("cell at {} is not natural at {}", c.mor_name(y), sx.mor_name(al)),
                    ));
                }
            }
        }
        if !report.is_empty() {
            return report;
        }
        for y in c.morphisms() {
            let sx = &*s.fibers[c.cod(y)];
            for &z in c.incoming(c.dom(y)) {
                let zz = c.dom(z);
                let tz = &*t.fibers[zz];
                let yz = c.comp(y, z);
                for a in sx.objects() {
                    let lhs = tz.comp_all(&[
                        self.fm(zz, s.cc(y, z, a)),
                        self.cells[z][s.ro(y, a)],
                        t.rm(z, self.cells[y][a]),
                    ]);
                    let rhs = tz.comp(self.cells[yz][a], t.cc(y, z, self.fo(c.cod(y), a)));
                    if lhs != rhs {
                        report.push(Violation::new(
                            "cell-coherence",
                            format!(
                                "cells do not respect the compositors of {} . {} at {}",
                                c.mor_name(y),
                                c.mor_name(z),
                                sx.obj_name(a)
                            ),
                        ));
                    }
                }
            }
        }
        for x in c.objects() {
            let (sx, tx) = (&*s.fibers[x], &*t.fibers[x]);
            for a in sx.objects() {
                let lhs = tx.comp(self.cells[c.id(x)][a], t.uc(x, self.fo(x, a)));
                if lhs != self.fm(x, s.uc(x, a)) {
                    report.push(Violation::new(
                        "cell-coherence",
                        format!("cells do not respect the unitors at {} / {}", c.obj_name(x), sx.obj_name(a)),
                    ));
                }
            }
        }
        report
    }
}

/// True iff every component is an equivalence of categories.
pub fn is_indexed_equivalence(f: &IndexedFun) -> bool {
    f.components.iter().all(Functor::is_equivalence)
}

/// `G ∘ F` with cells `G^Y(cellF_y[a]) ∘ cellG_y[F^X a]`.
pub fn compose_indexed(g: &IndexedFun, f: &IndexedFun) -> Result<IndexedFun> {
    if !Arc::ptr_eq(&f.target, &g.source) && !same_indexed(&f.target, &g.source) {
        return Err(Error::Precondition("indexed functors are not composable".into()));
    }
    let c = &*f.source.base;
    let u = &*g.target;
    let components = c.objects().map(|x| g.components[x].after(&f.components[x])).collect();
    let cells = c
        .morphisms()
        .map(|y| {
            let (x, yy) = (c.cod(y), c.dom(y));
            let uy = &*u.fibers[yy];
            f.source.fibers[x]
                .objects()
                .map(|a| uy.comp(g.fm(yy, f.cells[y][a]), g.cells[y][f.fo(x, a)]))
                .collect()
        })
        .collect();
    Ok(IndexedFun { source: f.source.clone(), target: g.target.clone(), components, cells })
}

pub(crate) fn same_indexed(a: &IndexedCat, b: &IndexedCat) -> bool {
    same_cat(&a.base, &b.base)
        && a.fibers.len() == b.fibers.len()
        && a.fibers.iter().zip(&b.fibers).all(|(p, q)| same_cat(p, q))
        && a.restrict == b.restrict
        && a.compositor == b.compositor
        && a.unitor == b.unitor
}

/// A modification `F ⇒ G` between parallel indexed functors: per base object
/// `x`, a natural transformation `F^x ⇒ G^x` compatible with the cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modification {
    pub components: Vec<Vec<Mor>>,
}

impl Modification {
    pub fn validate(&self, f: &IndexedFun, g: &IndexedFun) -> Vec<Violation> {
        let (s, t) = (&*f.source, &*f.target);
        let c = &*s.base;
        let mut report = Vec::new();
        for x in c.objects() {
            let (sx, tx) = (&*s.fibers[x], &*t.fibers[x]);
            for a in sx.objects() {
                let m = self.components[x][a];
                if tx.dom(m) != f.fo(x, a) || tx.cod(m) != g.fo(x, a) {
                    report.push(Violation::new("modification", format!("wrong endpoints at {}", sx.obj_name(a))));
                    return report;
                }
            }
            for al in sx.morphisms() {
                if tx.comp(self.components[x][sx.cod(al)], f.fm(x, al))
                    != tx.comp(g.fm(x, al), self.components[x][sx.dom(al)])
                {
                    report.push(Violation::new(
                        "modification",
                        format!("not natural at {} in the fiber over {}", sx.mor_name(al), c.obj_name(x)),
                    ));
                }
            }
        }
        for y in c.morphisms() {
            let (x, yy) = (c.cod(y), c.dom(y));
            let ty = &*t.fibers[yy];
            for a in s.fibers[x].objects() {
                let lhs = ty.comp(g.cells[y][a], t.rm(y, self.components[x][a]));
                let rhs = ty.comp(self.components[yy][s.ro(y, a)], f.cells[y][a]);
                if lhs != rhs {
                    report.push(Violation::new(
                        "modification",
                        format!("incompatible with the cells along {}", c.mor_name(y)),
                    ));
                }
            }
        }
        report
    }

    pub fn is_invertible(&self, target: &IndexedCat) -> bool {
        self.components.iter().enumerate().all(|(x, comps)| comps.iter().all(|&m| target.fibers[x].is_iso(m)))
    }
}

/// Searches for an invertible modification `F ⇒ G`. Each choice of a
/// component propagates along every restriction into its fiber and along
/// invertible morphisms inside it; `cap` bounds the number of choices tried.
pub fn find_invertible_modification(f: &IndexedFun, g: &IndexedFun, cap: usize) -> Result<Option<Modification>> {
    let s = &*f.source;
    let c = &*s.base;
    for x in c.objects() {
        for a in s.fibers[x].objects() {
            if !f.target.fibers[x].are_isomorphic(f.fo(x, a), g.fo(x, a)) {
                return Ok(None);
            }
        }
    }
    let mut search = ModSearch {
        f,
        g,
        assigned: c.objects().map(|x| vec![usize::MAX; s.fibers[x].num_objects()]).collect(),
        trail: Vec::new(),
        steps: 0,
        cap,
    };
    let vars: Vec<(Obj, Obj)> = c.objects().flat_map(|x| s.fibers[x].objects().map(move |a| (x, a))).collect();
    if search.solve(&vars, 0)? {
        let m = Modification { components: search.assigned };
        debug_assert!(m.validate(f, g).is_empty());
        Ok(Some(m))
    } else {
        Ok(None)
    }
}

struct ModSearch<'a> {
    f: &'a IndexedFun,
    g: &'a IndexedFun,
    assigned: Vec<Vec<Mor>>,
    trail: Vec<(Obj, Obj)>,
    steps: usize,
    cap: usize,
}

impl ModSearch<'_> {
    fn solve(&mut self, vars: &[(Obj, Obj)], i: usize) -> Result<bool> {
        let Some(&(x, a)) = vars.get(i) else {
            return Ok(true);
        };
        if self.assigned[x][a] != usize::MAX {
            return self.solve(vars, i + 1);
        }
        let tx = &*self.f.target.fibers[x];
        let candidates: Vec<Mor> = tx.isos(self.f.fo(x, a), self.g.fo(x, a)).collect();
        for m in candidates {
            self.steps += 1;
            if self.steps > self.cap {
                return Err(Error::cap("modification search", self.cap));
            }
            let mark = self.trail.len();
            if self.assign(x, a, m) && self.solve(vars, i + 1)? {
                return Ok(true);
            }
            while self.trail.len() > mark {
                let (x, a) = self.trail.pop().expect("trail");
                self.assigned[x][a] = usize::MAX;
            }
        }
        Ok(false)
    }

    /// Assigns and propagates; false on a conflict.
    fn assign(&mut self, x: Obj, a: Obj, m: Mor) -> bool {
        let (f, g) = (self.f, self.g);
        let (s, t) = (&*f.source, &*f.target);
        let c = &*s.base;
        let mut queue = VecDeque::from([(x, a, m)]);
        while let Some((x, a, m)) = queue.pop_front() {
            let cur = self.assigned[x][a];
            if cur != usize::MAX {
                if cur != m {
                    return false;
                }
                continue;
            }
            self.assigned[x][a] = m;
            self.trail.push((x, a));
            let (sx, tx) = (&*s.fibers[x], &*t.fibers[x]);
            // naturality inside the fiber
            for &al in sx.outgoing(a) {
                let b = sx.cod(al);
                if sx.is_iso(al) {
                    let inv = tx.inverse(f.fm(x, al)).expect("functors preserve isos");
                    queue.push_back((x, b, tx.comp_all(&[g.fm(x, al), m, inv])));
                } else if self.assigned[x][b] != usize::MAX
                    && tx.comp(self.assigned[x][b], f.fm(x, al)) != tx.comp(g.fm(x, al), m)
                {
                    return false;
                }
            }
            for &al in sx.incoming(a) {
                let b = sx.dom(al);
                if !sx.is_iso(al)
                    && self.assigned[x][b] != usize::MAX
                    && tx.comp(m, f.fm(x, al)) != tx.comp(g.fm(x, al), self.assigned[x][b])
                {
                    return false;
                }
            }
            // compatibility with the cells forces the component at S(y)a
            for &y in c.incoming(x) {
                let yy = c.dom(y);
                let ty = &*t.fibers[yy];
                let inv = ty.inverse(f.cells[y][a]).expect("cells are invertible");
                let forced = ty.comp_all(&[g.cells[y][a], t.rm(y, m), inv]);
                queue.push_back((yy, s.ro(y, a), forced));
            }
        }
        true
    }
}

/// Every indexed functor `S → T` (all component functors and all
/// coherent invertible cells). Exponential; only for tiny fibers.
pub fn enumerate_indexed_functors(s: &Arc<IndexedCat>, t: &Arc<IndexedCat>, cap: usize) -> Result<Vec<IndexedFun>> {
    let c = &*s.base;
    let per_fiber: Vec<Vec<Functor>> = c
        .objects()
        .map(|x| enumerate_functors(&s.fibers[x], &t.fibers[x], cap))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut choice = vec![0usize; c.num_objects()];
    loop {
        let components: Vec<Functor> = c.objects().map(|x| per_fiber[x][choice[x]].clone()).collect();
        if per_fiber.iter().all(|v| !v.is_empty()) {
            cells_rec(s, t, &components, &mut out, cap)?;
        }
        // odometer
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(out);
            }
            choice[k] += 1;
            if choice[k] < per_fiber[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if per_fiber.iter().any(|v| v.is_empty()) {
            return Ok(out);
        }
    }
}

fn cells_rec(
    s: &Arc<IndexedCat>,
    t: &Arc<IndexedCat>,
    components: &[Functor],
    out: &mut Vec<IndexedFun>,
    cap: usize,
) -> Result<()> {
    let c = &*s.base;
    let vars: Vec<(Mor, Obj)> = c.morphisms().flat_map(|y| s.fibers[c.cod(y)].objects().map(move |a| (y, a))).collect();
    let mut cells: Vec<Vec<Mor>> = c.morphisms().map(|y| vec![usize::MAX; s.fibers[c.cod(y)].num_objects()]).collect();
    fn rec(
        s: &Arc<IndexedCat>,
        t: &Arc<IndexedCat>,
        components: &[Functor],
        vars: &[(Mor, Obj)],
        i: usize,
        cells: &mut Vec<Vec<Mor>>,
        out: &mut Vec<IndexedFun>,
        cap: usize,
    ) -> Result<()> {
        let c = &*s.base;
        if i == vars.len() {
            let cand = IndexedFun { source: s.clone(), target: t.clone(), components: components.to_vec(), cells: cells.clone() };
            if cand.validate().is_empty() {
                out.push(cand);
                if out.len() > cap {
                    return Err(Error::cap("indexed functor enumeration", cap));
                }
            }
            return Ok(());
        }
        let (y, a) = vars[i];
        let (x, yy) = (c.cod(y), c.dom(y));
        let ty = &*t.fibers[yy];
        let src = t.ro(y, components[x].obj[a]);
        let tgt = components[yy].obj[s.ro(y, a)];
        let candidates: Vec<Mor> = if c.is_identity(y) {
            // forced by unit coherence
            let inv = ty.inverse(t.uc(x, components[x].obj[a]));
            inv.map(|inv| ty.comp(components[x].mor[s.uc(x, a)], inv)).into_iter().collect()
        } else {
            ty.isos(src, tgt).collect()
        };
        for m in candidates {
            cells[y][a] = m;
            rec(s, t, components, vars, i + 1, cells, out, cap)?;
        }
        cells[y][a] = usize::MAX;
        Ok(())
    }
    rec(s, t, components, &vars, 0, &mut cells, out, cap)
}
