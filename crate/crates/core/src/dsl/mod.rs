//! The site-description language: parsing, elaboration into validated core
//! values, a canonical text form and a JSON interchange envelope.
//!
//! ```text
//! poset C { a <= b; }
//! coverage on C { b: [a_b]; }
//! presheaf F over C { a = {x0, x1}; b = {y}; a_b: y -> x0; }
//! ```

mod ast;
mod closure;
mod elab;
mod export;
mod interchange;
mod lexer;
mod parser;
mod print;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Limits;
use crate::fincat::{FinCat, Functor};
use crate::indexed::{DiscretePresheaf, IndexedCat, IndexedFun};
use crate::site::Topology;

pub use ast::*;
pub use closure::{close, Declared, Presentation};
pub use elab::elaborate;
pub use export::export;
pub use interchange::{decode_json, digest, encode_json, Envelope};
pub use parser::parse;
pub use print::print;

/// A 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// A positioned error with a one-line fix hint. `cap` marks failures caused
/// by a size cap rather than by the input itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
    pub hint: String,
    pub cap: bool,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>, hint: impl Into<String>) -> Diagnostic {
        Diagnostic { pos, message: message.into(), hint: hint.into(), cap: false }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}\n  hint: {}", self.pos.line, self.pos.col, self.message, self.hint)
    }
}

#[derive(Clone, Debug)]
pub struct SiteEntry {
    pub category: String,
    pub topology: Topology,
    /// Given as a coverage and saturated, rather than listed sieve by sieve.
    pub saturated: bool,
}

#[derive(Clone, Debug)]
pub struct IndexedEntry {
    pub name: String,
    pub base: String,
    pub indexed: Arc<IndexedCat>,
    /// Set when declared as a presheaf; `indexed` is then its embedding.
    pub presheaf: Option<DiscretePresheaf>,
}

#[derive(Clone, Debug)]
pub struct MapEntry {
    pub name: String,
    pub fibration: bool,
    pub source: String,
    pub target: String,
    pub fun: IndexedFun,
}

/// Elaborated declarations in source order.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub categories: Vec<(String, Arc<FinCat>)>,
    pub functors: Vec<(String, Functor)>,
    pub sites: Vec<SiteEntry>,
    pub indexed: Vec<IndexedEntry>,
    pub maps: Vec<MapEntry>,
}

impl Document {
    pub fn category(&self, name: &str) -> Option<&Arc<FinCat>> {
        self.categories.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn category_name(&self, c: &Arc<FinCat>) -> Option<&str> {
        self.categories.iter().find(|(_, k)| Arc::ptr_eq(k, c)).map(|(n, _)| n.as_str())
    }

    pub fn site(&self, category: &str) -> Option<&SiteEntry> {
        self.sites.iter().find(|s| s.category == category)
    }

    pub fn indexed(&self, name: &str) -> Option<&IndexedEntry> {
        self.indexed.iter().find(|e| e.name == name)
    }

    pub fn map(&self, name: &str) -> Option<&MapEntry> {
        self.maps.iter().find(|e| e.name == name)
    }
}

/// Parses and elaborates text.
pub fn load_text(text: &str, limits: &Limits) -> Result<Document, Diagnostic> {
    elaborate(&parse(text)?, limits)
}

/// The canonical text of a document.
pub fn canonical_text(doc: &Document) -> String {
    print(&export(doc))
}

#[cfg(test)]
mod tests;
