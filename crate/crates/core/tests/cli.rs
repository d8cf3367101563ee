use std::path::{Path, PathBuf};

use pcq::circuit::{load, save, to_text};
use pcq::compile::random_circuit;
use pcq::hardness;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn pcq(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pcq").chain(args.iter().copied());
    let code = pcq::cli::run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, seed: &str, flags: &str) -> PathBuf {
    let p = path(dir, name);
    let r = pcq(&["gen", "--vars", "4", "--seed", seed, "--flags", flags, "-o", s(&p)]);
    assert_eq!(r.code, 0, "{}", r.err);
    p
}

#[test]
fn kld_of_a_circuit_with_itself_is_zero() {
    let d = tempfile::tempdir().unwrap();
    let p = gen(d.path(), "p.pc", "1", "sd,det");
    let r = pcq(&["query", "kld", s(&p), s(&p)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.trim().parse::<f64>().unwrap().abs() <= 1e-12, "{}", r.out);
}

#[test]
fn incompatible_product_exits_two_with_citation() {
    let d = tempfile::tempdir().unwrap();
    let a = gen(d.path(), "a.pc", "2", "sd");
    let b = gen(d.path(), "b.pc", "3", "sd");
    let o = path(d.path(), "ab.pc");
    let r = pcq(&["apply", "mul", s(&a), s(&b), "-o", s(&o)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains(hardness::PRODUCT), "{}", r.err);
    assert!(!o.exists());
}

#[test]
fn verify_reports_the_overlapping_state() {
    let d = tempfile::tempdir().unwrap();
    let c = path(d.path(), "bad.pc");
    std::fs::write(&c, "pcirc 1\nvar 1 2\ninp 0 1 1 1\ninp 1 1 1 1\nsum 2 2 0 0.5 1 0.5\nout 2\nflag det\n").unwrap();
    let r = pcq(&["check", s(&c), "--verify", "--json"]);
    assert_eq!(r.code, 2);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    let w = &v["deterministic"]["witness"];
    assert_eq!(w["unit"], 2);
    assert_eq!(w["state"], serde_json::json!([[1, 0]]));
    let e: serde_json::Value = serde_json::from_str(r.err.trim()).unwrap();
    assert_eq!(e["error"], "PropertyViolation");

    let r = pcq(&["check", s(&c)]);
    assert_eq!(r.code, 0);
}

#[test]
fn refusals_and_failures_use_distinct_codes() {
    let d = tempfile::tempdir().unwrap();
    let a = gen(d.path(), "a.pc", "2", "sd");
    let r = pcq(&["query", "entropy", s(&a)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains(hardness::ENTROPY), "{}", r.err);
    let r = pcq(&["apply", "log", s(&a), "-o", s(&path(d.path(), "l.pc"))]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains(hardness::LOG), "{}", r.err);

    assert_eq!(pcq(&["query", "entropy", s(&path(d.path(), "missing.pc"))]).code, 1);
    assert_eq!(pcq(&["frobnicate"]).code, 1);
    assert_eq!(pcq(&["--help"]).code, 0);
    let bad = path(d.path(), "bad.pc");
    std::fs::write(&bad, "pcirc 1\nvar 1 2\nsum 0 1 5 1.0\nout 0\n").unwrap();
    assert_eq!(pcq(&["check", s(&bad)]).code, 1);
}

#[test]
fn json_errors_carry_the_citation() {
    let d = tempfile::tempdir().unwrap();
    let a = gen(d.path(), "a.pc", "2", "sd");
    let r = pcq(&["query", "entropy", s(&a), "--json"]);
    assert_eq!(r.code, 2);
    let e: serde_json::Value = serde_json::from_str(r.err.trim()).unwrap();
    assert_eq!(e["citation"], hardness::ENTROPY);
}

#[test]
fn query_json_has_full_precision() {
    let d = tempfile::tempdir().unwrap();
    let p = path(d.path(), "p.pc");
    let q = path(d.path(), "q.pc");
    let r = pcq(&["gen", "--vars", "5", "--seed", "9", "--flags", "sd,det", "--pair", s(&q), "-o", s(&p)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let r = pcq(&["query", "kld", s(&p), s(&q), "--json"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    for key in ["query", "value", "plan", "terms", "term_values", "cost", "conditions_used", "unit"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let value = v["value"].as_f64().unwrap();
    let want = pcq::queries::kld(&load(&p).unwrap(), &load(&q).unwrap()).unwrap().value;
    assert_eq!(value.to_bits(), want.to_bits());

    let o = pcq(&["oracle", "query", "kld", s(&p), s(&q)]);
    assert_eq!(o.code, 0, "{}", o.err);
    let ov: f64 = o.out.trim().parse().unwrap();
    assert!((ov - value).abs() <= 1e-9 * value.abs().max(1.0));

    let bits = pcq(&["query", "kld", s(&p), s(&q), "--bits"]);
    let b: f64 = bits.out.trim().parse().unwrap();
    assert!((b - value / std::f64::consts::LN_2).abs() <= 1e-12);
}

#[test]
fn save_load_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let want = pcq::circuit::PropertyFlags {
        structured: pcq::circuit::FlagState::Verified,
        deterministic: pcq::circuit::FlagState::Verified,
        ..Default::default()
    };
    for seed in 0..10 {
        let c = random_circuit(seed, 6, &want).unwrap();
        let f = path(d.path(), "c.pc");
        save(&c, &f).unwrap();
        let c2 = load(&f).unwrap();
        assert_eq!(to_text(&c), to_text(&c2));
        assert_eq!(c.vars(), c2.vars());
        assert_eq!(c.output(), c2.output());
        save(&c2, &f).unwrap();
        let c3 = load(&f).unwrap();
        assert_eq!(c2.units(), c3.units());
    }
}

#[test]
fn analyze_plans_and_refuses() {
    let d = tempfile::tempdir().unwrap();
    let good = path(d.path(), "e.pipe");
    std::fs::write(&good, "p:det; integ(mul(p,log(p)))").unwrap();
    let r = pcq(&["analyze", s(&good)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("plan O(|p|)"), "{}", r.out);

    let p = gen(d.path(), "p.pc", "4", "sd,det");
    let bind = format!("p={}", s(&p));
    let r = pcq(&["analyze", s(&good), "--bind", &bind, "--json"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["verdict"], "plan");
    let ent = pcq::queries::shannon_entropy(&load(&p).unwrap()).unwrap().value;
    assert!((v["value"].as_f64().unwrap() + ent).abs() <= 1e-9);

    let hard = path(d.path(), "h.pipe");
    std::fs::write(&hard, "p:sd; q:sd; mul(p,q)").unwrap();
    let r = pcq(&["analyze", s(&hard), "--json"]);
    assert_eq!(r.code, 2);
    let v: serde_json::Value = serde_json::from_str(r.out.trim()).unwrap();
    assert_eq!(v["verdict"], "hard");
    assert_eq!(v["citation"], hardness::PRODUCT);
}

#[test]
fn cnf_gadgets_count_models() {
    let d = tempfile::tempdir().unwrap();
    let f = path(d.path(), "f.cnf");
    // (x1 ∨ ¬x2 ∨ x3) ∧ (¬x1 ∨ x2 ∨ x3): 8 - 1 - 1 = 6 models
    std::fs::write(&f, "p cnf 3 2\n1 -2 3 0\n-1 2 3 0\n").unwrap();
    let prefix = path(d.path(), "g");
    let r = pcq(&["compile-cnf", s(&f), "-o", s(&prefix), "--count"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.trim(), "6");
    assert!(path(d.path(), "g.beta.pc").exists());
    assert!(path(d.path(), "g.gamma.pc").exists());
}

#[test]
fn eval_matches_library() {
    let d = tempfile::tempdir().unwrap();
    let p = gen(d.path(), "p.pc", "5", "sd,det");
    let r = pcq(&["eval", s(&p), "--state", "0,1,0,1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let want = pcq::circuit::evaluate(&load(&p).unwrap(), &[0, 1, 0, 1]).unwrap();
    assert_eq!(r.out.trim().parse::<f64>().unwrap(), want);
    assert_eq!(pcq(&["eval", s(&p), "--state", "0,1,0,7"]).code, 1);
}
