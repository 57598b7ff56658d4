//! Parsed documents. Identifiers keep their source position; the JSON form
//! stores them as plain strings.

use serde::{Deserialize, Serialize};

use super::Pos;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Ident {
        Ident { name: name.into(), pos: Pos::default() }
    }
}

impl From<String> for Ident {
    fn from(name: String) -> Ident {
        Ident::new(name)
    }
}

impl From<Ident> for String {
    fn from(i: Ident) -> String {
        i.name
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteDoc {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Item {
    Category(CategoryDecl),
    Poset(PosetDecl),
    Functor(FunctorDecl),
    Site(SiteDecl),
    Indexed(IndexedDecl),
    Presheaf(PresheafDecl),
    Map(MapDecl),
}

impl Item {
    pub fn name(&self) -> &Ident {
        match self {
            Item::Category(d) => &d.name,
            Item::Poset(d) => &d.name,
            Item::Functor(d) => &d.name,
            Item::Site(d) => &d.category,
            Item::Indexed(d) => &d.name,
            Item::Presheaf(d) => &d.name,
            Item::Map(d) => &d.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDecl {
    pub name: Ident,
    pub body: CategoryBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum CategoryBody {
    Presented {
        objects: Vec<Ident>,
        identities: Vec<Ident>,
        morphisms: Vec<MorDecl>,
        relations: Vec<Relation>,
    },
    /// `terminal`, `discrete(..)`, `chaotic(..)` or `cyclic(n)`.
    Builtin { builtin: Ident, args: Vec<Ident> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorDecl {
    pub name: Ident,
    pub dom: Ident,
    pub cod: Ident,
}

/// `lhs = rhs`, each a path written in composition order (`g . f` is `[g, f]`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Vec<Ident>,
    pub rhs: Vec<Ident>,
}

/// `a <= b <= c;` chains; a single element declares an object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDecl {
    pub name: Ident,
    pub chains: Vec<Vec<Ident>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorDecl {
    pub name: Ident,
    pub source: Ident,
    pub target: Ident,
    pub objects: Vec<(Ident, Ident)>,
    pub morphisms: Vec<(Ident, Ident)>,
}

/// `coverage on C { .. }` (saturated on elaboration) or `topology on C { .. }`
/// (taken literally). Each entry is a family generating a sieve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteDecl {
    pub category: Ident,
    pub saturate: bool,
    pub families: Vec<(Ident, Vec<Ident>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDecl {
    pub name: Ident,
    pub base: Ident,
    pub fibers: Vec<(Ident, Ident)>,
    pub restrictions: Vec<(Ident, Ident)>,
    /// `compositor y, z @ U = m;`
    pub compositors: Vec<(Ident, Ident, Ident, Ident)>,
    /// `unitor X @ U = m;`
    pub unitors: Vec<(Ident, Ident, Ident)>,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafDecl {
    pub name: Ident,
    pub base: Ident,
    pub values: Vec<(Ident, Vec<Ident>)>,
    /// `f: y0 -> x0, ..` maps elements over `cod f` to elements over `dom f`.
    pub actions: Vec<(Ident, Vec<(Ident, Ident)>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDecl {
    pub name: Ident,
    pub fibration: bool,
    pub source: Ident,
    pub target: Ident,
    pub components: Vec<(Ident, Ident)>,
    /// `cell y @ a = m;`
    pub cells: Vec<(Ident, Ident, Ident)>,
}
