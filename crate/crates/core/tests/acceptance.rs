//! Acceptance suite. Runs each criterion, prints one line per criterion and
//! exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use stackcat::corpus::{
    arrow_site, named_sites, random_fibration, random_indexed, random_presheaf, random_site, rng, span_site,
    three_patch_site, twisted_z2,
};
use stackcat::descent::{is_prestack, is_stack};
use stackcat::fibadj::{check_biequivalence, check_plus_fibration, check_stack_fibres};
use stackcat::fincat::{FinCat, Functor};
use stackcat::groth::{check_fiberwise_criterion, grothendieck};
use stackcat::indexed::{
    compose_indexed, embed_discrete, is_indexed_equivalence, IndexedCat, IndexedFun,
};
use stackcat::oracle::{compare_with_stackify, embed_map, sheafify_with_unit};
use stackcat::site::{saturate, validate_topology, Topology};
use stackcat::stackify::{check_reflection_uniqueness, colimit_audit, reflect_through_unit, stackify};
use stackcat::{Error, Limits};

type Outcome = Result<String, String>;

fn lim() -> Limits {
    Limits::default()
}

fn topology_validity() -> Outcome {
    for (name, j) in named_sites() {
        let v = validate_topology(&j, &lim()).map_err(|e| e.to_string())?;
        if !v.is_empty() {
            return Err(format!("{name}: {} violations", v.len()));
        }
        let again = saturate(&j.base, &j.as_coverage(), &lim()).map_err(|e| e.to_string())?;
        if again.covers != j.covers {
            return Err(format!("{name}: saturation not idempotent"));
        }
    }
    Ok("4 corpus sites valid, saturation idempotent".into())
}

/// Every computation the instance criteria run, so that a corpus member is
/// admitted only if all of them fit within the caps.
fn instance_fits(j: &Topology, d: &Arc<IndexedCat>) -> stackcat::Result<()> {
    let p = stackcat::stackify::plus(d, j, &lim())?;
    is_prestack(&p.output, j, &lim())?;
    let s = stackify(d, j, &lim())?;
    is_stack(&s.stack, j, &lim())?;
    stackify(&s.stack, j, &lim())?;
    stackify(d, &Topology::trivial(&j.base), &lim())?;
    Ok(())
}

/// Random (site, indexed category) pairs within caps; pairs exceeding a cap
/// are replaced by the next seed.
fn random_instances(n: usize) -> (Vec<(Topology, Arc<IndexedCat>)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut seed = 0;
    while out.len() < n {
        let mut r = rng(seed);
        seed += 1;
        let j = random_site(&mut r);
        let d = random_indexed(&mut r, &j.base);
        match instance_fits(&j, &d) {
            Ok(()) => out.push((j, d)),
            Err(Error::CapExceeded { .. }) => skipped += 1,
            // kept, so that the criterion reports the error
            Err(_) => out.push((j, d)),
        }
    }
    (out, skipped)
}

fn plus_prestacks(instances: &[(Topology, Arc<IndexedCat>)], skipped: usize) -> Outcome {
    for (k, (j, d)) in instances.iter().enumerate() {
        let p = stackcat::stackify::plus(d, j, &lim()).map_err(|e| e.to_string())?;
        if !is_prestack(&p.output, j, &lim()).map_err(|e| e.to_string())? {
            return Err(format!("instance {k}: plus output is not a prestack"));
        }
    }
    Ok(format!("{} instances, {skipped} over caps skipped", instances.len()))
}

fn double_plus_stacks(instances: &[(Topology, Arc<IndexedCat>)]) -> Outcome {
    for (k, (j, d)) in instances.iter().enumerate() {
        let s = stackify(d, j, &lim()).map_err(|e| e.to_string())?;
        if !is_stack(&s.stack, j, &lim()).map_err(|e| e.to_string())? {
            return Err(format!("instance {k}: stackify output is not a stack"));
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn presheaf(c: &Arc<FinCat>, sizes: &[usize], maps: &[(&str, Vec<usize>)]) -> stackcat::indexed::DiscretePresheaf {
    let values = sizes.iter().map(|&n| (0..n).map(|k| format!("s{k}")).collect()).collect();
    let actions = c
        .morphisms()
        .map(|y| {
            if c.is_identity(y) {
                (0..sizes[c.dom(y)]).collect()
            } else {
                maps.iter().find(|(n, _)| *n == c.mor_name(y)).expect("action").1.clone()
            }
        })
        .collect();
    stackcat::indexed::DiscretePresheaf { base: c.clone(), values, actions }
}

struct ReflectionCase {
    name: &'static str,
    j: Topology,
    d: Arc<IndexedCat>,
    phi: Box<dyn Fn(&Arc<IndexedCat>, &Topology) -> IndexedFun>,
}

fn unit_into_stack() -> Box<dyn Fn(&Arc<IndexedCat>, &Topology) -> IndexedFun> {
    Box::new(|d, j| stackify(d, j, &lim()).expect("stackify").unit)
}

fn identity() -> Box<dyn Fn(&Arc<IndexedCat>, &Topology) -> IndexedFun> {
    Box::new(|d, _| IndexedFun::identity(d))
}

fn to_terminal() -> Box<dyn Fn(&Arc<IndexedCat>, &Topology) -> IndexedFun> {
    Box::new(|d, _| {
        let t = Arc::new(FinCat::terminal());
        let target = Arc::new(IndexedCat::constant(&d.base, &t));
        IndexedFun {
            source: d.clone(),
            target,
            components: d.fibers.iter().map(|f| Functor::to_terminal(f, &t)).collect(),
            cells: d.base.morphisms().map(|y| vec![0; d.fibers[d.base.cod(y)].num_objects()]).collect(),
        }
    })
}

fn oracle_unit() -> Box<dyn Fn(&Arc<IndexedCat>, &Topology) -> IndexedFun> {
    Box::new(|d, j| {
        let f = stackcat::corpus::discrete_values(d).expect("discrete");
        let o = sheafify_with_unit(&f, j);
        embed_map(d, &Arc::new(embed_discrete(&o.second.output)), &o.unit)
    })
}

fn reflection_cases() -> Vec<ReflectionCase> {
    let arrow = arrow_site();
    let span = span_site();
    let c = arrow.base.clone();
    let s = span.base.clone();
    let nonsheaf = Arc::new(embed_discrete(&presheaf(&c, &[2, 2], &[("a_b", vec![0, 0])])));
    let swap = Arc::new(embed_discrete(&presheaf(&c, &[2, 2], &[("a_b", vec![1, 0])])));
    let span_ps = Arc::new(embed_discrete(&presheaf(&s, &[2, 1, 1], &[("j_p", vec![0]), ("j_q", vec![0])])));
    let chaotic = Arc::new(IndexedCat::constant(&c, &Arc::new(FinCat::chaotic(&["p", "q"]))));
    let z2 = twisted_z2();
    let tp = three_patch_site();
    let terminal = stackcat::corpus::terminal_site();
    let one = |b: &Arc<FinCat>| Arc::new(IndexedCat::constant(b, &Arc::new(FinCat::terminal())));
    vec![
        ReflectionCase { name: "terminal site identity", j: terminal.clone(), d: one(&terminal.base), phi: identity() },
        ReflectionCase { name: "arrow constant identity", j: arrow.clone(), d: one(&c), phi: identity() },
        ReflectionCase { name: "arrow non-sheaf to terminal", j: arrow.clone(), d: nonsheaf.clone(), phi: to_terminal() },
        ReflectionCase { name: "arrow non-sheaf unit", j: arrow.clone(), d: nonsheaf.clone(), phi: unit_into_stack() },
        ReflectionCase { name: "arrow non-sheaf oracle", j: arrow.clone(), d: nonsheaf, phi: oracle_unit() },
        ReflectionCase { name: "arrow sheaf identity", j: arrow.clone(), d: swap.clone(), phi: identity() },
        ReflectionCase { name: "arrow sheaf to terminal", j: arrow.clone(), d: swap, phi: to_terminal() },
        ReflectionCase { name: "span unit", j: span.clone(), d: span_ps.clone(), phi: unit_into_stack() },
        ReflectionCase { name: "span oracle", j: span.clone(), d: span_ps, phi: oracle_unit() },
        ReflectionCase { name: "arrow chaotic unit", j: arrow.clone(), d: chaotic.clone(), phi: unit_into_stack() },
        ReflectionCase { name: "arrow chaotic to terminal", j: arrow, d: chaotic, phi: to_terminal() },
        ReflectionCase { name: "twisted identity", j: Topology::trivial(&z2.base), d: z2.clone(), phi: identity() },
        ReflectionCase { name: "three-patch constant", j: tp.clone(), d: one(&tp.base), phi: unit_into_stack() },
    ]
}

fn reflection() -> Outcome {
    let cases = reflection_cases();
    let (mut checked, mut skipped) = (0, 0);
    for case in &cases {
        let phi = (case.phi)(&case.d, &case.j);
        if !is_stack(&phi.target, &case.j, &lim()).map_err(|e| e.to_string())? {
            return Err(format!("{}: target is not a stack", case.name));
        }
        let s = stackify(&case.d, &case.j, &lim()).map_err(|e| e.to_string())?;
        let r = reflect_through_unit(&phi, &s, &case.j, &lim()).map_err(|e| format!("{}: {e}", case.name))?;
        let composite = compose_indexed(&r.psi, &s.unit).map_err(|e| e.to_string())?;
        if !r.witness.validate(&composite, &phi).is_empty() || !r.witness.is_invertible(&phi.target) {
            return Err(format!("{}: witness is not an invertible modification", case.name));
        }
        match check_reflection_uniqueness(&phi, &s, &r, 3, &lim()).map_err(|e| e.to_string())? {
            Some(true) => checked += 1,
            Some(false) => return Err(format!("{}: factorization not unique", case.name)),
            None => skipped += 1,
        }
    }
    Ok(format!("{} cases, uniqueness exhaustive on {checked}, {skipped} with larger fibers", cases.len()))
}

fn oracle_equivalence() -> Outcome {
    let sites: Vec<Topology> = named_sites().into_iter().map(|(_, j)| j).collect();
    let mut r = rng(500);
    let n = 60;
    for k in 0..n {
        let j = &sites[k % sites.len()];
        let f = random_presheaf(&mut r, &j.base, 2);
        let d = Arc::new(embed_discrete(&f));
        let s = stackify(&d, j, &lim()).map_err(|e| e.to_string())?;
        let cmp = compare_with_stackify(&f, j, &s, &lim()).map_err(|e| e.to_string())?;
        if !cmp.equivalence || !cmp.units_intertwined {
            return Err(format!("presheaf {k}: equivalence {} units {}", cmp.equivalence, cmp.units_intertwined));
        }
    }
    Ok(format!("{n} presheaves on 4 sites"))
}

fn colimit_collapse() -> Outcome {
    let mut audited = 0;
    let mut seed = 1000;
    while audited < 20 {
        let mut r = rng(seed);
        seed += 1;
        if seed > 20_000 {
            return Err(format!("only {audited} qualifying sites found"));
        }
        let j = random_site(&mut r);
        let c = j.base.clone();
        let Some(x) = c.objects().find(|&x| j.covers(x).iter().filter(|s| !s.is_maximal(&c)).count() >= 2) else {
            continue;
        };
        let d = random_indexed(&mut r, &c);
        let a = match colimit_audit(&d, &j, x, &lim()) {
            Ok(a) => a,
            Err(Error::CapExceeded { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        if !a.equivalent {
            return Err(format!("seed {}: colimit differs from the minimal cover", seed - 1));
        }
        audited += 1;
    }
    Ok(format!("{audited} sites with two or more non-maximal covers"))
}

fn fiberwise_criterion() -> Outcome {
    let (mut agree, mut both_true, mut both_false) = (0, 0, 0);
    let mut seed = 2000;
    while agree < 60 {
        let mut r = rng(seed);
        seed += 1;
        let j = random_site(&mut r);
        let d = random_indexed(&mut r, &j.base);
        let g = match grothendieck(&d, &lim()) {
            Ok(g) => g,
            Err(Error::CapExceeded { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        if g.total.num_objects() > 8 {
            continue;
        }
        let e = if r.gen_bool(0.2) {
            Arc::new(IndexedCat::constant(&g.total, &stackcat::corpus::random_small_category(&mut r)))
        } else {
            Arc::new(embed_discrete(&random_presheaf(&mut r, &g.total, 2)))
        };
        let rep = match check_fiberwise_criterion(&e, &g, &j, &lim()) {
            Ok(rep) => rep,
            Err(Error::CapExceeded { .. }) => continue,
            Err(err) => return Err(err.to_string()),
        };
        if !rep.agree {
            return Err(format!("seed {}: total {} fiberwise {}", seed - 1, rep.total_is_stack, rep.fibrewise_is_stack));
        }
        agree += 1;
        if rep.total_is_stack {
            both_true += 1;
        } else {
            both_false += 1;
        }
    }
    Ok(format!("{agree} instances agree ({both_true} stacks, {both_false} non-stacks)"))
}

use rand::Rng;

fn fibration_fits(j: &Topology, p: &stackcat::fibadj::IndexedFibration) -> stackcat::Result<()> {
    check_biequivalence(p, &lim())?;
    check_plus_fibration(p, j, &lim())?;
    check_stack_fibres(p, j, &lim())?;
    Ok(())
}

fn fibration_corpus(n: usize) -> (Vec<(Topology, stackcat::fibadj::IndexedFibration)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut seed = 3000;
    while out.len() < n {
        let mut r = rng(seed);
        seed += 1;
        let j = random_site(&mut r);
        let d = random_indexed(&mut r, &j.base);
        if d.total_objects() > 8 {
            continue;
        }
        let p = random_fibration(&mut r, &d);
        if p.p.source.total_objects() > 12 {
            continue;
        }
        match fibration_fits(&j, &p) {
            Err(Error::CapExceeded { .. }) => skipped += 1,
            _ => out.push((j, p)),
        }
    }
    (out, skipped)
}

fn theorem_4_1(corpus: &[(Topology, stackcat::fibadj::IndexedFibration)], skipped: usize) -> Outcome {
    for (k, (_, p)) in corpus.iter().enumerate() {
        let rep = check_biequivalence(p, &lim()).map_err(|e| format!("fibration {k}: {e}"))?;
        if !rep.passed() {
            return Err(format!("fibration {k}: {rep:?}"));
        }
    }
    Ok(format!("{} fibrations, {skipped} over caps skipped", corpus.len()))
}

fn theorem_4_2(corpus: &[(Topology, stackcat::fibadj::IndexedFibration)]) -> Outcome {
    for (k, (j, p)) in corpus.iter().enumerate() {
        let first = check_plus_fibration(p, j, &lim()).map_err(|e| format!("fibration {k}: {e}"))?;
        if !first.passed() {
            return Err(format!("fibration {k}: {first:?}"));
        }
        let second = check_stack_fibres(p, j, &lim()).map_err(|e| format!("fibration {k}: {e}"))?;
        if !second.passed() {
            return Err(format!("fibration {k}: {second:?}"));
        }
    }
    Ok(format!("{} fibrations", corpus.len()))
}

fn idempotence(instances: &[(Topology, Arc<IndexedCat>)]) -> Outcome {
    for (k, (j, d)) in instances.iter().enumerate() {
        let s = stackify(d, j, &lim()).map_err(|e| e.to_string())?;
        let again = stackify(&s.stack, j, &lim()).map_err(|e| e.to_string())?;
        if !is_indexed_equivalence(&again.unit) {
            return Err(format!("instance {k}: unit at the stackification is not an equivalence"));
        }
        let trivial = Topology::trivial(&j.base);
        let t = stackify(d, &trivial, &lim()).map_err(|e| e.to_string())?;
        if !is_indexed_equivalence(&t.unit) {
            return Err(format!("instance {k}: trivial topology changes the input"));
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_stackcat"))
}

fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = examples_dir();
    let run = |args: &[&str]| -> Result<(i32, String), String> {
        let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
        Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
    };
    // round trips of the golden files
    for name in ["arrow", "span", "sheaf", "nonsheaf", "twisted"] {
        let src = data.join(format!("{name}.site"));
        let golden = std::fs::read_to_string(data.join(format!("{name}.canonical.site"))).map_err(|e| e.to_string())?;
        let (code, out) = run(&["fmt", src.to_str().unwrap()])?;
        if code != 0 || out != golden {
            return Err(format!("{name}: canonical form differs from the golden file"));
        }
        let again = dir.path().join(format!("{name}.site"));
        std::fs::write(&again, &out).map_err(|e| e.to_string())?;
        let (code, out2) = run(&["fmt", again.to_str().unwrap()])?;
        if code != 0 || out2 != out {
            return Err(format!("{name}: formatting is not idempotent"));
        }
    }
    let expect = |args: &[&str], want: i32| -> Result<(), String> {
        let (code, _) = run(args)?;
        if code != want {
            return Err(format!("{args:?}: exit {code}, expected {want}"));
        }
        Ok(())
    };
    let f = |n: &str| data.join(n).to_str().unwrap().to_string();
    expect(&["check", "--stack", &f("sheaf.site")], 0)?;
    expect(&["check", "--stack", &f("nonsheaf.site")], 1)?;
    expect(&["validate", &f("broken_topology.site")], 1)?;
    expect(&["validate", &f("syntax_error.site")], 2)?;
    expect(&["stackify", "--max-descent", "1", &f("nonsheaf.site")], 3)?;
    expect(&["validate", "--inject-internal-fault", &f("arrow.site")], 4)?;
    let emitted = dir.path().join("stack.site");
    expect(&["stackify", "--emit", emitted.to_str().unwrap(), &f("nonsheaf.site")], 0)?;
    expect(&["check", "--stack", emitted.to_str().unwrap()], 0)?;
    let emitted_json = dir.path().join("stack.json");
    expect(&["stackify", "--emit", emitted_json.to_str().unwrap(), &f("nonsheaf.site")], 0)?;
    expect(&["check", "--stack", emitted_json.to_str().unwrap()], 0)?;
    Ok("5 golden round trips, exit codes 0-4, stackify output re-checked as a stack".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS  {title}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {title}: {detail} ({secs:.1}s)");
            }
        }
    };
    let (instances, skipped) = random_instances(200);
    let (fibrations, fib_skipped) = fibration_corpus(50);
    report(1, "topology validity", &mut topology_validity);
    report(2, "plus yields prestacks", &mut || plus_prestacks(&instances, skipped));
    report(3, "double plus yields stacks", &mut || double_plus_stacks(&instances));
    report(4, "reflection through the unit", &mut reflection);
    report(5, "discrete oracle equivalence", &mut oracle_equivalence);
    report(6, "colimit collapse", &mut colimit_collapse);
    report(7, "fiberwise stack criterion", &mut fiberwise_criterion);
    report(8, "biequivalence unit, counit, transposes", &mut || theorem_4_1(&fibrations, fib_skipped));
    report(9, "stackified fibrations", &mut || theorem_4_2(&fibrations));
    report(10, "idempotence", &mut || idempotence(&instances));
    report(11, "command-line contract", &mut cli_contract);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
