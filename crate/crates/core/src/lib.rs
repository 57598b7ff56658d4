//! Executable stack theory on finite sites.
//!
//! The crate models finite categories, Grothendieck topologies on them,
//! pseudofunctorial indexed categories, descent data, the double-plus
//! stackification, the Grothendieck construction with its Giraud topology,
//! and the correspondence between indexed fibrations and indexed categories
//! over a total category. Every theorem-level statement is turned into a
//! decidable, exhaustive check at desk scale.

pub mod error;
pub mod corpus;
pub mod descent;
pub mod dsl;
pub mod fibadj;
pub mod fincat;
pub mod groth;
pub mod indexed;
pub mod oracle;
pub mod report;
pub mod site;
pub mod stackify;

pub use error::{Error, Limits, Result};
