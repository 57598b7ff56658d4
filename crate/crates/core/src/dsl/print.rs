use std::fmt::Write;

use super::ast::*;
use super::lexer::is_bare_char;

fn q(i: &Ident) -> String {
    let s = &i.name;
    if !s.is_empty() && s.chars().all(is_bare_char) {
        s.clone()
    } else {
        let mut out = String::from("\"");
        for c in s.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
        out
    }
}

fn list(xs: &[Ident]) -> String {
    xs.iter().map(q).collect::<Vec<_>>().join(", ")
}

/// A section whose entries go one per line.
fn section(out: &mut String, label: &str, entries: Vec<String>) {
    if entries.is_empty() {
        return;
    }
    writeln!(out, "  {label}:").unwrap();
    let n = entries.len();
    for (k, e) in entries.into_iter().enumerate() {
        writeln!(out, "    {e}{}", if k + 1 == n { ";" } else { "," }).unwrap();
    }
}

fn path(p: &[Ident]) -> String {
    p.iter().map(q).collect::<Vec<_>>().join(" . ")
}

/// Renders a document with LF line endings and a blank line between blocks.
pub fn print(doc: &SiteDoc) -> String {
    let mut out = String::new();
    for (k, item) in doc.items.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        match item {
            Item::Category(d) => match &d.body {
                CategoryBody::Builtin { builtin, args } => {
                    if args.is_empty() {
                        writeln!(out, "category {} = {};", q(&d.name), q(builtin)).unwrap();
                    } else {
                        writeln!(out, "category {} = {}({});", q(&d.name), q(builtin), list(args)).unwrap();
                    }
                }
                CategoryBody::Presented { objects, identities, morphisms, relations } => {
                    writeln!(out, "category {} {{", q(&d.name)).unwrap();
                    if !objects.is_empty() {
                        writeln!(out, "  objects: {};", list(objects)).unwrap();
                    }
                    if !identities.is_empty() {
                        writeln!(out, "  identities: {};", list(identities)).unwrap();
                    }
                    section(&mut out, "morphisms", morphisms.iter().map(|m| format!("{}: {} -> {}", q(&m.name), q(&m.dom), q(&m.cod))).collect());
                    section(&mut out, "compose", relations.iter().map(|r| format!("{} = {}", path(&r.lhs), path(&r.rhs))).collect());
                    out.push_str("}\n");
                }
            },
            Item::Poset(d) => {
                writeln!(out, "poset {} {{", q(&d.name)).unwrap();
                for c in &d.chains {
                    writeln!(out, "  {};", c.iter().map(q).collect::<Vec<_>>().join(" <= ")).unwrap();
                }
                out.push_str("}\n");
            }
            Item::Functor(d) => {
                writeln!(out, "functor {}: {} -> {} {{", q(&d.name), q(&d.source), q(&d.target)).unwrap();
                section(&mut out, "objects", d.objects.iter().map(|(a, b)| format!("{} -> {}", q(a), q(b))).collect());
                section(&mut out, "morphisms", d.morphisms.iter().map(|(a, b)| format!("{} -> {}", q(a), q(b))).collect());
                out.push_str("}\n");
            }
            Item::Site(d) => {
                let kw = if d.saturate { "coverage" } else { "topology" };
                writeln!(out, "{kw} on {} {{", q(&d.category)).unwrap();
                for (x, fam) in &d.families {
                    writeln!(out, "  {}: [{}];", q(x), list(fam)).unwrap();
                }
                out.push_str("}\n");
            }
            Item::Indexed(d) => {
                writeln!(out, "indexed {} over {} {{", q(&d.name), q(&d.base)).unwrap();
                for (x, k) in &d.fibers {
                    writeln!(out, "  fiber {} = {};", q(x), q(k)).unwrap();
                }
                for (y, f) in &d.restrictions {
                    writeln!(out, "  restrict {} = {};", q(y), q(f)).unwrap();
                }
                for (y, z, u, m) in &d.compositors {
                    writeln!(out, "  compositor {}, {} @ {} = {};", q(y), q(z), q(u), q(m)).unwrap();
                }
                for (x, u, m) in &d.unitors {
                    writeln!(out, "  unitor {} @ {} = {};", q(x), q(u), q(m)).unwrap();
                }
                if d.strict {
                    out.push_str("  strict;\n");
                }
                out.push_str("}\n");
            }
            Item::Presheaf(d) => {
                writeln!(out, "presheaf {} over {} {{", q(&d.name), q(&d.base)).unwrap();
                for (x, vs) in &d.values {
                    writeln!(out, "  {} = {{{}}};", q(x), list(vs)).unwrap();
                }
                for (f, pairs) in &d.actions {
                    let body = pairs.iter().map(|(a, b)| format!("{} -> {}", q(a), q(b))).collect::<Vec<_>>().join(", ");
                    writeln!(out, "  {}: {};", q(f), body).unwrap();
                }
                out.push_str("}\n");
            }
            Item::Map(d) => {
                let kw = if d.fibration { "fibration" } else { "map" };
                writeln!(out, "{kw} {}: {} -> {} {{", q(&d.name), q(&d.source), q(&d.target)).unwrap();
                for (x, f) in &d.components {
                    writeln!(out, "  component {} = {};", q(x), q(f)).unwrap();
                }
                for (y, a, m) in &d.cells {
                    writeln!(out, "  cell {} @ {} = {};", q(y), q(a), q(m)).unwrap();
                }
                out.push_str("}\n");
            }
        }
    }
    out
}
