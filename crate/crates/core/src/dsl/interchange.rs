//! JSON interchange: the canonical document together with the SHA-256 of
//! its canonical text.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ast::SiteDoc;
use super::{print, Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub format: String,
    pub sha256: String,
    pub document: SiteDoc,
}

const FORMAT: &str = "stackcat-site/1";

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn encode_json(doc: &SiteDoc) -> String {
    let env = Envelope { format: FORMAT.into(), sha256: digest(&print(doc)), document: doc.clone() };
    let mut s = serde_json::to_string_pretty(&env).expect("documents serialize");
    s.push('\n');
    s
}

/// Decodes an envelope and checks its digest against the re-rendered text.
pub fn decode_json(text: &str) -> Result<SiteDoc, Diagnostic> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| {
        Diagnostic::new(Pos { line: e.line(), col: e.column() }, format!("malformed interchange JSON: {e}"), "produce the file with `stackcat fmt --json` or `--emit out.json`")
    })?;
    if env.format != FORMAT {
        return Err(Diagnostic::new(Pos { line: 1, col: 1 }, format!("unknown format `{}`", env.format), format!("expected `{FORMAT}`")));
    }
    let expected = digest(&print(&env.document));
    if env.sha256 != expected {
        return Err(Diagnostic::new(Pos { line: 1, col: 1 }, "digest does not match the document", "the document was edited after it was written; regenerate it"));
    }
    Ok(env.document)
}
