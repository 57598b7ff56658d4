use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stackcat::descent::{check_prestack, check_stack, desc_category, StackWitness};
use stackcat::dsl::{self, Diagnostic, Document, IndexedEntry, MapEntry, SiteEntry};
use stackcat::fibadj::{check_biequivalence, check_plus_fibration, check_stack_fibres, is_indexed_fibration};
use stackcat::fincat::FinCat;
use stackcat::groth::{check_fiberwise_criterion, giraud_topology, grothendieck};
use stackcat::indexed::{pullback_indexed, validate_indexed};
use stackcat::oracle::sheafify_oracle;
use stackcat::report::{InputDigest, Report, Status, Usage};
use stackcat::site::{generate_sieve, minimal_cover, saturate, validate_topology, CoveringFamily, Sieve, Topology};
use stackcat::stackify::{check_reflection_uniqueness, reflect_through_unit, stackify};
use stackcat::{Error, Limits};

/// Descent data, stackification and Grothendieck constructions on finite sites.
///
/// Exit codes: 0 pass, 1 check failed, 2 invalid input, 3 cap exceeded,
/// 4 internal invariant violation.
#[derive(Parser)]
#[command(name = "stackcat", version)]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 64)]
    max_homset: usize,
    #[arg(long, global = true, default_value_t = 65_536)]
    max_sieves_per_object: usize,
    #[arg(long, global = true, default_value_t = 100_000)]
    max_descent: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_closure: usize,
    /// Fail with an internal error before running; exercises exit code 4.
    #[arg(long, global = true, hide = true)]
    inject_internal_fault: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Site,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the canonical form of a document.
    Fmt {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "site")]
        to: Format,
    },
    /// Run every validator on every declaration.
    Validate { file: PathBuf },
    /// Print the topology generated by a coverage.
    Saturate {
        file: PathBuf,
        /// Category carrying the coverage.
        #[arg(long)]
        site: Option<String>,
    },
    /// Print the category of descent data on a sieve.
    Desc {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
        #[arg(long)]
        object: String,
        /// Generating family, comma separated; defaults to the smallest cover.
        #[arg(long, value_delimiter = ',')]
        sieve: Option<Vec<String>>,
    },
    /// Decide the prestack or stack condition.
    Check {
        file: PathBuf,
        #[arg(long, conflicts_with = "stack", required_unless_present = "stack")]
        prestack: bool,
        #[arg(long)]
        stack: bool,
        #[arg(long)]
        indexed: Option<String>,
    },
    /// Apply the plus construction twice.
    Stackify {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
        /// Write the result; `.json` selects the interchange format.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Classical sheafification of a presheaf of sets.
    Sheafify {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// The Grothendieck construction and its projection.
    Groth {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// The Giraud topology on the total category.
    Giraud {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
    },
    /// Compare the stack condition on the total category with the fiberwise one.
    Fiberwise {
        file: PathBuf,
        #[arg(long)]
        indexed: Option<String>,
        /// Indexed category over the total category; defaults to the pullback
        /// of the base one along the projection.
        #[arg(long)]
        over_total: Option<String>,
    },
    /// Unit, counit and transposes of the fibration correspondence, and
    /// stackification of a fibration.
    FiberAdjunction {
        file: PathBuf,
        #[arg(long)]
        fibration: Option<String>,
    },
    /// Factor an indexed functor into a stack through the stackification unit.
    Factorize {
        file: PathBuf,
        #[arg(long)]
        map: Option<String>,
    },
}

enum Failure {
    Diag(String, Diagnostic),
    Core(Error),
    Input(String, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> Status {
        match self {
            Failure::Diag(_, d) if d.cap => Status::CapExceeded,
            Failure::Diag(..) | Failure::Input(..) => Status::Invalid,
            Failure::Core(Error::CapExceeded { .. }) => Status::CapExceeded,
            Failure::Core(Error::Internal(_)) => Status::Internal,
            Failure::Core(_) => Status::Invalid,
        }
    }

    fn message(&self) -> (String, String) {
        match self {
            Failure::Diag(path, d) => (format!("{path}:{}:{}: {}", d.pos.line, d.pos.col, d.message), d.hint.clone()),
            Failure::Core(e @ Error::CapExceeded { .. }) => (e.to_string(), "raise the matching --max-* flag".into()),
            Failure::Core(e @ Error::Internal(_)) => (e.to_string(), "this is a bug; please report it with the input".into()),
            Failure::Core(e) => (e.to_string(), "check the input against the command's requirements".into()),
            Failure::Input(m, h) => (m.clone(), h.clone()),
        }
    }
}

type Res<T> = Result<T, Failure>;

struct Outcome {
    pass: bool,
    result: Value,
    text: String,
}

struct Loaded {
    doc: Document,
    digest: InputDigest,
}

fn load(path: &Path, limits: &Limits) -> Res<Loaded> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{shown}: {e}"), "pass a readable UTF-8 file".into()))?;
    let mut digest = InputDigest { path: shown.clone(), sha256: dsl::digest(&text), canonical_sha256: None };
    let parsed = if path.extension().is_some_and(|e| e == "json") { dsl::decode_json(&text) } else { dsl::parse(&text) };
    let doc = parsed
        .and_then(|d| dsl::elaborate(&d, limits))
        .map_err(|d| Failure::Diag(shown, d))?;
    digest.canonical_sha256 = Some(dsl::digest(&dsl::canonical_text(&doc)));
    Ok(Loaded { doc, digest })
}

fn pick<'a, T>(items: &'a [T], name: &dyn Fn(&T) -> &str, wanted: Option<&str>, what: &str, flag: &str) -> Res<&'a T> {
    match wanted {
        Some(w) => items.iter().find(|e| name(e) == w).ok_or_else(|| {
            Failure::Input(format!("no {what} named `{w}`"), format!("declared: {}", items.iter().map(|e| name(e)).collect::<Vec<_>>().join(", ")))
        }),
        None => match items {
            [one] => Ok(one),
            [] => Err(Failure::Input(format!("the document declares no {what}"), "declare one in the document".into())),
            _ => Err(Failure::Input(
                format!("the document declares several {what}s"),
                format!("choose one with {flag} ({})", items.iter().map(|e| name(e)).collect::<Vec<_>>().join(", ")),
            )),
        },
    }
}

fn pick_indexed<'a>(doc: &'a Document, wanted: Option<&str>) -> Res<&'a IndexedEntry> {
    pick(&doc.indexed, &|e: &IndexedEntry| e.name.as_str(), wanted, "indexed category", "--indexed")
}

fn pick_map<'a>(doc: &'a Document, wanted: Option<&str>, flag: &str) -> Res<&'a MapEntry> {
    pick(&doc.maps, &|e: &MapEntry| e.name.as_str(), wanted, "indexed functor", flag)
}

/// The valid topology on the base of `base`.
fn site_for<'a>(doc: &'a Document, base: &str, limits: &Limits) -> Res<&'a SiteEntry> {
    let s = doc.site(base).ok_or_else(|| {
        Failure::Input(format!("no topology on `{base}`"), format!("add `coverage on {base} {{ .. }}`"))
    })?;
    if let Some(v) = validate_topology(&s.topology, limits)?.first() {
        return Err(Failure::Input(format!("the topology on `{base}` is not valid: {v}"), "run `stackcat validate` for every violation".into()));
    }
    Ok(s)
}

fn sieve_names(c: &FinCat, s: &Sieve) -> Vec<String> {
    s.members.iter().map(|&m| c.mor_name(m).to_string()).collect()
}

fn covers_json(j: &Topology) -> Value {
    let c = &j.base;
    let mut out = serde_json::Map::new();
    for x in c.objects() {
        out.insert(c.obj_name(x).to_string(), j.covers(x).iter().map(|s| json!(sieve_names(c, s))).collect());
    }
    Value::Object(out)
}

fn covers_text(j: &Topology) -> String {
    let c = &j.base;
    let mut out = String::new();
    for x in c.objects() {
        for s in j.covers(x) {
            out.push_str(&format!("  {}\n", s.display(c)));
        }
    }
    out
}

fn witness_json(c: &FinCat, w: &StackWitness) -> Value {
    json!({
        "object": c.obj_name(w.object),
        "sieve": sieve_names(c, &w.sieve),
        "failure": w.failure,
        "detail": w.detail,
    })
}

fn emit(path: &Path, doc: &Document) -> Res<()> {
    let body = if path.extension().is_some_and(|e| e == "json") {
        dsl::encode_json(&dsl::export(doc))
    } else {
        dsl::canonical_text(doc)
    };
    std::fs::write(path, body)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display()), "choose a writable path for --emit".into()))
}

fn base_doc(doc: &Document, e: &IndexedEntry, site: Option<&SiteEntry>) -> Document {
    let mut out = Document::default();
    out.categories.push((e.base.clone(), e.indexed.base.clone()));
    if let Some(s) = site {
        out.sites.push(s.clone());
    }
    let _ = doc;
    out
}

fn usage(doc: &Document) -> Usage {
    Usage {
        largest_hom_set: doc.categories.iter().map(|(_, c)| c.max_homset()).max().unwrap_or(0),
        largest_fiber: doc
            .indexed
            .iter()
            .flat_map(|e| e.indexed.fibers.iter().map(|f| f.num_objects()))
            .max()
            .unwrap_or(0),
    }
}

fn run(cmd: &Cmd, limits: &Limits, inputs: &mut Vec<InputDigest>, used: &mut Option<Usage>) -> Res<Outcome> {
    let file = match cmd {
        Cmd::Fmt { file, .. }
        | Cmd::Validate { file }
        | Cmd::Saturate { file, .. }
        | Cmd::Desc { file, .. }
        | Cmd::Check { file, .. }
        | Cmd::Stackify { file, .. }
        | Cmd::Sheafify { file, .. }
        | Cmd::Groth { file, .. }
        | Cmd::Giraud { file, .. }
        | Cmd::Fiberwise { file, .. }
        | Cmd::FiberAdjunction { file, .. }
        | Cmd::Factorize { file, .. } => file,
    };
    let loaded = load(file, limits)?;
    inputs.push(loaded.digest.clone());
    let doc = &loaded.doc;
    *used = Some(usage(doc));
    match cmd {
        Cmd::Fmt { to, .. } => {
            let canonical = dsl::canonical_text(doc);
            let text = match to {
                Format::Site => canonical.clone(),
                Format::Json => dsl::encode_json(&dsl::export(doc)),
            };
            Ok(Outcome { pass: true, result: json!({ "canonical": canonical, "sha256": dsl::digest(&canonical) }), text })
        }
        Cmd::Validate { .. } => {
            let mut problems = Vec::new();
            for (name, c) in &doc.categories {
                problems.extend(c.validate().into_iter().map(|v| (format!("category {name}"), v)));
            }
            for s in &doc.sites {
                problems.extend(validate_topology(&s.topology, limits)?.into_iter().map(|v| (format!("topology on {}", s.category), v)));
            }
            for e in &doc.indexed {
                problems.extend(validate_indexed(&e.indexed).into_iter().map(|v| (format!("indexed {}", e.name), v)));
            }
            let mut fibration_failures = Vec::new();
            for m in &doc.maps {
                problems.extend(m.fun.validate().into_iter().map(|v| (format!("map {}", m.name), v)));
                if m.fibration {
                    if let Err(w) = is_indexed_fibration(&m.fun) {
                        fibration_failures.push(json!({ "fibration": m.name, "witness": w }));
                    }
                }
            }
            let pass = problems.is_empty() && fibration_failures.is_empty();
            let mut text = String::new();
            for (at, v) in &problems {
                text.push_str(&format!("{at}: {v}\n"));
            }
            for f in &fibration_failures {
                text.push_str(&format!("fibration {}: not an indexed fibration: {}\n", f["fibration"], f["witness"]));
            }
            if pass {
                text.push_str("valid\n");
            }
            let result = json!({
                "valid": pass,
                "violations": problems.iter().map(|(at, v)| json!({ "at": at, "kind": v.kind, "detail": v.detail })).collect::<Vec<_>>(),
                "fibration_failures": fibration_failures,
            });
            Ok(Outcome { pass, result, text })
        }
        Cmd::Saturate { site, .. } => {
            let s = pick(&doc.sites, &|s: &SiteEntry| s.category.as_str(), site.as_deref(), "topology", "--site")?;
            let families: Vec<CoveringFamily> = s.topology.as_coverage();
            let j = saturate(&s.topology.base, &families, limits)?;
            let text = format!("topology on {}:\n{}", s.category, covers_text(&j));
            Ok(Outcome { pass: true, result: json!({ "category": s.category, "covers": covers_json(&j) }), text })
        }
        Cmd::Desc { indexed, object, sieve, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let c = &e.indexed.base;
            let x = c.find_object(object).ok_or_else(|| Failure::Input(format!("no object `{object}` in `{}`", e.base), "pass an object of the base with --object".into()))?;
            let r = match sieve {
                Some(names) => {
                    let arrows = names
                        .iter()
                        .map(|n| c.find_morphism(n).ok_or_else(|| Failure::Input(format!("no morphism `{n}` in `{}`", e.base), "list morphisms of the base with --sieve".into())))
                        .collect::<Res<Vec<_>>>()?;
                    generate_sieve(c, &CoveringFamily { apex: x, arrows })?
                }
                None => minimal_cover(&site_for(doc, &e.base, limits)?.topology, x),
            };
            let desc = desc_category(&r, &e.indexed, limits)?;
            let cat = &desc.category;
            let mut text = format!("Desc({}, {}) at {}: {} data, {} morphisms\n", r.display(c), e.name, object, cat.num_objects(), cat.num_morphisms());
            for o in cat.objects() {
                text.push_str(&format!("  {}\n", cat.obj_name(o)));
            }
            let result = json!({
                "indexed": e.name,
                "object": object,
                "sieve": sieve_names(c, &r),
                "data": cat.obj_names(),
                "morphisms": cat.num_morphisms(),
            });
            Ok(Outcome { pass: true, result, text })
        }
        Cmd::Check { prestack, indexed, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let j = &site_for(doc, &e.base, limits)?.topology;
            let what = if *prestack { "prestack" } else { "stack" };
            let w = if *prestack { check_prestack(&e.indexed, j, limits)? } else { check_stack(&e.indexed, j, limits)? };
            let c = &e.indexed.base;
            let text = match &w {
                None => format!("{}: {what}\n", e.name),
                Some(w) => format!("{}: not a {what}\n  over {}, sieve {}: {}\n", e.name, c.obj_name(w.object), w.sieve.display(c), w.detail),
            };
            let result = json!({ "indexed": e.name, "property": what, "holds": w.is_none(), "witness": w.as_ref().map(|w| witness_json(c, w)) });
            Ok(Outcome { pass: w.is_none(), result, text })
        }
        Cmd::Stackify { indexed, emit: out, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let site = site_for(doc, &e.base, limits)?;
            let s = stackify(&e.indexed, &site.topology, limits)?;
            let c = &e.indexed.base;
            let fibers: Vec<Value> = c
                .objects()
                .map(|x| json!({ "object": c.obj_name(x), "objects": s.stack.fibers[x].num_objects(), "morphisms": s.stack.fibers[x].num_morphisms() }))
                .collect();
            let mut text = format!("stackification of {}:\n", e.name);
            for x in c.objects() {
                text.push_str(&format!("  over {}: {} objects, {} morphisms\n", c.obj_name(x), s.stack.fibers[x].num_objects(), s.stack.fibers[x].num_morphisms()));
            }
            if let Some(path) = out {
                let mut d = base_doc(doc, e, Some(site));
                d.indexed.push(IndexedEntry { name: format!("{}_stack", e.name), base: e.base.clone(), indexed: s.stack.clone(), presheaf: None });
                emit(path, &d)?;
                text.push_str(&format!("written to {}\n", path.display()));
            }
            Ok(Outcome { pass: true, result: json!({ "indexed": e.name, "fibers": fibers }), text })
        }
        Cmd::Sheafify { indexed, emit: out, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let p = e.presheaf.as_ref().ok_or_else(|| Failure::Input(format!("`{}` is not a presheaf", e.name), "sheafify takes a `presheaf` block; use stackify for indexed categories".into()))?;
            let site = site_for(doc, &e.base, limits)?;
            let sh = sheafify_oracle(p, &site.topology);
            let c = &p.base;
            let mut text = format!("sheafification of {}:\n", e.name);
            for x in c.objects() {
                text.push_str(&format!("  {} = {{{}}}\n", c.obj_name(x), sh.values[x].join(", ")));
            }
            if let Some(path) = out {
                let mut d = base_doc(doc, e, Some(site));
                let name = format!("{}_sheaf", e.name);
                d.indexed.push(IndexedEntry { name, base: e.base.clone(), indexed: Arc::new(stackcat::indexed::embed_discrete(&sh)), presheaf: Some(sh.clone()) });
                emit(path, &d)?;
                text.push_str(&format!("written to {}\n", path.display()));
            }
            let values: serde_json::Map<String, Value> = c.objects().map(|x| (c.obj_name(x).to_string(), json!(sh.values[x]))).collect();
            Ok(Outcome { pass: true, result: json!({ "presheaf": e.name, "values": values }), text })
        }
        Cmd::Groth { indexed, emit: out, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let g = grothendieck(&e.indexed, limits)?;
            let t = &g.total;
            let mut text = format!("total category of {}: {} objects, {} morphisms\n", e.name, t.num_objects(), t.num_morphisms());
            for m in t.morphisms().filter(|&m| !t.is_identity(m)) {
                text.push_str(&format!("  {}: {} -> {}\n", t.mor_name(m), t.obj_name(t.dom(m)), t.obj_name(t.cod(m))));
            }
            if let Some(path) = out {
                let mut d = base_doc(doc, e, None);
                d.categories.push(("G".into(), t.clone()));
                d.functors.push(("p".into(), g.proj.clone()));
                emit(path, &d)?;
                text.push_str(&format!("written to {}\n", path.display()));
            }
            let result = json!({ "indexed": e.name, "objects": t.obj_names(), "morphisms": t.mor_names() });
            Ok(Outcome { pass: true, result, text })
        }
        Cmd::Giraud { indexed, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let j = &site_for(doc, &e.base, limits)?.topology;
            let g = grothendieck(&e.indexed, limits)?;
            let jd = giraud_topology(&g, j, limits)?;
            let text = format!("Giraud topology on the total category of {}:\n{}", e.name, covers_text(&jd));
            Ok(Outcome { pass: true, result: json!({ "indexed": e.name, "covers": covers_json(&jd) }), text })
        }
        Cmd::Fiberwise { indexed, over_total, .. } => {
            let e = pick_indexed(doc, indexed.as_deref())?;
            let j = &site_for(doc, &e.base, limits)?.topology;
            let g = grothendieck(&e.indexed, limits)?;
            let (name, over) = match over_total {
                Some(n) => {
                    let o = doc.indexed(n).ok_or_else(|| Failure::Input(format!("no indexed category named `{n}`"), "declare it over the total category printed by `stackcat groth --emit`".into()))?;
                    if *o.indexed.base != *g.total {
                        return Err(Failure::Input(format!("`{n}` is not over the total category of `{}`", e.name), "declare its base as the category `G` written by `stackcat groth --emit`".into()));
                    }
                    (n.clone(), o.indexed.clone())
                }
                None => (format!("{} pulled back along the projection", e.name), Arc::new(pullback_indexed(&e.indexed, &g.proj))),
            };
            let rep = check_fiberwise_criterion(&over, &g, j, limits)?;
            let text = format!(
                "{name}:\n  stack for the Giraud topology: {}\n  stack on every slice: {}\n  agree: {}\n",
                rep.total_is_stack, rep.fibrewise_is_stack, rep.agree
            );
            Ok(Outcome { pass: rep.agree, result: json!({ "over_total": name, "report": rep }), text })
        }
        Cmd::FiberAdjunction { fibration, .. } => {
            let m = pick_map(doc, fibration.as_deref(), "--fibration")?;
            let p = match is_indexed_fibration(&m.fun) {
                Ok(p) => p,
                Err(w) => {
                    let text = format!("{}: not an indexed fibration: {}\n", m.name, serde_json::to_string(&w).unwrap_or_default());
                    return Ok(Outcome { pass: false, result: json!({ "fibration": m.name, "not_a_fibration": w }), text });
                }
            };
            let base_name = &doc.indexed(&m.target).expect("elaborated target").base;
            let j = &site_for(doc, base_name, limits)?.topology;
            let bi = check_biequivalence(&p, limits)?;
            let plus = check_plus_fibration(&p, j, limits)?;
            let fibres = check_stack_fibres(&p, j, limits)?;
            let pass = bi.passed() && plus.passed() && fibres.passed();
            let text = format!(
                "{}:\n  unit equivalence: {}\n  counit equivalence: {}\n  transposes inverse: {}\n  fibration after plus and stackification: {}\n  stackified fibres form a Giraud stack: {}\n",
                m.name,
                bi.unit_valid && bi.unit_equivalence,
                bi.counit_valid && bi.counit_equivalence && bi.counit_over_base,
                bi.flat_then_sharp && bi.sharp_then_flat,
                plus.passed(),
                fibres.passed()
            );
            Ok(Outcome { pass, result: json!({ "fibration": m.name, "biequivalence": bi, "plus": plus, "stack_fibres": fibres }), text })
        }
        Cmd::Factorize { map, .. } => {
            let m = pick_map(doc, map.as_deref(), "--map")?;
            let base_name = &doc.indexed(&m.source).expect("elaborated source").base;
            let j = &site_for(doc, base_name, limits)?.topology;
            let s = stackify(&m.fun.source, j, limits)?;
            let r = reflect_through_unit(&m.fun, &s, j, limits)?;
            let unique = check_reflection_uniqueness(&m.fun, &s, &r, 3, limits)?;
            let pass = unique != Some(false);
            let c = &m.fun.source.base;
            let mut text = format!("{} factors through the stackification of {}\n", m.name, m.source);
            for x in c.objects() {
                let f = &r.psi.components[x];
                let names: Vec<String> = f.source.objects().map(|a| format!("{} -> {}", f.source.obj_name(a), f.target.obj_name(f.on_obj(a)))).collect();
                text.push_str(&format!("  over {}: {}\n", c.obj_name(x), names.join(", ")));
            }
            text.push_str(&match unique {
                Some(true) => "  unique up to isomorphism\n".to_string(),
                Some(false) => "  NOT unique up to isomorphism\n".to_string(),
                None => "  uniqueness not searched (fibers larger than 3 objects)\n".to_string(),
            });
            let psi: Vec<Value> = c.objects().map(|x| json!({ "object": c.obj_name(x), "on_objects": r.psi.components[x].obj })).collect();
            Ok(Outcome { pass, result: json!({ "map": m.name, "psi": psi, "unique": unique }), text })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits {
        max_homset: cli.max_homset,
        max_sieves_per_object: cli.max_sieves_per_object,
        max_descent: cli.max_descent,
        max_closure: cli.max_closure,
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let mut inputs = Vec::new();
    let mut used = None;
    let outcome = if cli.inject_internal_fault {
        Err(Failure::Core(Error::Internal("fault injected on request".into())))
    } else {
        run(&cli.command, &limits, &mut inputs, &mut used)
    };
    let (status, result, text) = match &outcome {
        Ok(o) => (if o.pass { Status::Pass } else { Status::Fail }, o.result.clone(), Some(o.text.clone())),
        Err(f) => {
            let (message, hint) = f.message();
            (f.status(), json!({ "error": message, "hint": hint }), None)
        }
    };
    if cli.json {
        let mut report = Report::new(argv, status, result, limits);
        report.inputs = inputs;
        report.usage = used;
        report.elapsed_ms = start.elapsed().as_millis() as u64;
        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    } else if let Some(t) = text {
        print!("{t}");
    } else if let Err(f) = &outcome {
        let (message, hint) = f.message();
        eprintln!("error: {message}\n  hint: {hint}");
    }
    ExitCode::from(status.exit_code() as u8)
}
