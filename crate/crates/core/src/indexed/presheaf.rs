use std::sync::Arc;

use super::IndexedCat;
use crate::fincat::{FinCat, Functor, Mor, Obj, Violation};

/// A presheaf of finite sets. `actions[y]` maps `values[cod y]` to
/// `values[dom y]` (contravariant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretePresheaf {
    pub base: Arc<FinCat>,
    pub values: Vec<Vec<String>>,
    pub actions: Vec<Vec<usize>>,
}

impl DiscretePresheaf {
    /// The presheaf with exactly one element everywhere.
    pub fn terminal(base: &Arc<FinCat>) -> DiscretePresheaf {
        DiscretePresheaf {
            base: base.clone(),
            values: vec![vec!["*".to_string()]; base.num_objects()],
            actions: vec![vec![0]; base.num_morphisms()],
        }
    }

    pub fn size(&self, x: Obj) -> usize {
        self.values[x].len()
    }

    pub fn act(&self, y: Mor, s: usize) -> usize {
        self.actions[y][s]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let c = &*self.base;
        let mut report = Vec::new();
        if self.values.len() != c.num_objects() || self.actions.len() != c.num_morphisms() {
            report.push(Violation::new("presheaf", "value or action table has the wrong size"));
            return report;
        }
        for y in c.morphisms() {
            let (src, tgt) = (self.size(c.cod(y)), self.size(c.dom(y)));
            if self.actions[y].len() != src || self.actions[y].iter().any(|&s| s >= tgt) {
                report.push(Violation::new(
                    "presheaf",
                    format!("action of {} is not a function {} -> {}", c.mor_name(y), src, tgt),
                ));
            }
        }
        if !report.is_empty() {
            return report;
        }
        for x in c.objects() {
            let id = c.id(x);
            if self.actions[id].iter().enumerate().any(|(i, &s)| i != s) {
                report.push(Violation::new("presheaf", format!("{} does not act as the identity", c.mor_name(id))));
            }
        }
        for y in c.morphisms() {
            for &z in c.incoming(c.dom(y)) {
                let yz = c.comp(y, z);
                for s in 0..self.size(c.cod(y)) {
                    if self.act(yz, s) != self.act(z, self.act(y, s)) {
                        report.push(Violation::new(
                            "presheaf",
                            format!(
                                "{} . {} acts differently from the composite of the actions on {}",
                                c.mor_name(y),
                                c.mor_name(z),
                                self.values[c.cod(y)][s]
                            ),
                        ));
                        break;
                    }
                }
            }
        }
        report
    }
}

/// Fibers are discrete categories on the value sets; all cells identities.
pub fn embed_discrete(f: &DiscretePresheaf) -> IndexedCat {
    let c = &*f.base;
    let fibers: Vec<Arc<FinCat>> = c.objects().map(|x| Arc::new(FinCat::discrete(&f.values[x]))).collect();
    let restrict = c
        .morphisms()
        .map(|y| Functor {
            source: fibers[c.cod(y)].clone(),
            target: fibers[c.dom(y)].clone(),
            obj: f.actions[y].clone(),
            // in a discrete category morphism i is the identity of object i
            mor: f.actions[y].clone(),
        })
        .collect();
    IndexedCat::strict(&f.base, fibers, restrict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::validate_indexed;

    #[test]
    fn one_point_on_terminal() {
        let t = Arc::new(FinCat::terminal());
        let f = DiscretePresheaf::terminal(&t);
        assert!(f.validate().is_empty());
        let d = embed_discrete(&f);
        assert!(validate_indexed(&d).is_empty());
        assert_eq!(d.fibers[0].num_objects(), 1);
    }

    #[test]
    fn arrow_presheaf_fibers() {
        let c = Arc::new(FinCat::preorder(&["a", "b"], |i, j| i <= j));
        let f = DiscretePresheaf {
            base: c.clone(),
            values: vec![vec!["*".into()], vec!["0".into(), "1".into()]],
            // id_a, a_b, id_b in preorder order
            actions: c
                .morphisms()
                .map(|y| if c.is_identity(y) { (0..[1, 2][c.dom(y)]).collect() } else { vec![0, 0] })
                .collect(),
        };
        assert!(f.validate().is_empty());
        let d = embed_discrete(&f);
        assert!(validate_indexed(&d).is_empty());
        assert_eq!(d.fibers[1].num_objects(), 2);
        assert_eq!(d.fibers[0].num_objects(), 1);
        assert!(d.fibers[1].is_discrete());
    }

    #[test]
    fn non_functorial_action_reported() {
        let c = Arc::new(FinCat::preorder(&["a", "b", "c"], |i, j| i <= j));
        let mut f = DiscretePresheaf {
            base: c.clone(),
            values: vec![vec!["0".into(), "1".into()]; 3],
            actions: c.morphisms().map(|_| vec![0, 1]).collect(),
        };
        assert!(f.validate().is_empty());
        let ac = c.find_morphism("a_c").unwrap();
        f.actions[ac] = vec![1, 0];
        assert!(!f.validate().is_empty());
    }
}
