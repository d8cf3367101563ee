//! Acceptance suite: one PASS/FAIL line per criterion.
//! Runs without the test harness so the report is always printed:
//! `cargo test --test acceptance`.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::golden::GOLDEN;
use common::{close, flags};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcq::analyzer::{analyze, execute, parse_pipeline, Cost, Verdict, OPERATION_ROWS, QUERY_ROWS};
use pcq::circuit::{
    check_property, integrate, save, support_circuit, Circuit, PropertyCheck, PropertyFlags, VarId, Which,
};
use pcq::compile::{cnf_to_gadgets, random_circuit, random_compatible_pair, random_mdet, Cnf};
use pcq::hardness;
use pcq::ops::*;
use pcq::oracle::{children_disjoint, joint_tables, oracle_query, table, DenseTable, OracleQuery};
use pcq::queries;
use pcq::Variable;

const INSTANCES: u64 = 200;
const OP_TOL: f64 = 1e-12;
const CHAINED_TOL: f64 = 1e-9;
const TIME_LIMIT: Duration = Duration::from_secs(60);
const QUERY_INSTANCES: u64 = 100;
const QUERY_TOL: f64 = 1e-9;
const ANCHOR_TOL: f64 = 1e-12;
const COPY_TOL: f64 = 1e-9;
const CLOSURE_INSTANCES: u64 = 25;
const SIZE_INSTANCES: u64 = 100;
const CNF_INSTANCES: usize = 50;
const KLD_INSTANCES: u64 = 50;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nvars(seed: u64) -> usize {
    4 + (seed % 9) as usize
}

fn pointwise(what: &str, seed: u64, got: &DenseTable, want: &[f64], tol: f64) -> Result<(), String> {
    ensure(got.values.len() == want.len(), || format!("{what} seed {seed}: domain mismatch"))?;
    for (i, (a, b)) in got.values.iter().zip(want).enumerate() {
        ensure(close(*a, *b, tol), || format!("{what} seed {seed} state {:?}: {a} vs {b}", got.state(i)))?;
    }
    Ok(())
}

fn err(what: &str, seed: u64) -> impl Fn(pcq::Error) -> String + '_ {
    move |e| format!("{what} seed {seed}: {e}")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for seed in 0..INSTANCES {
        let n = nvars(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // sum: decomposable inputs, no structure required
        let p = random_circuit(seed, n, &flags(false, false)).map_err(err("sum", seed))?;
        let q = random_circuit(seed + 7919, n, &flags(false, false)).map_err(err("sum", seed))?;
        let (t1, t2) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        let r = sum_circuits(&p, &q, t1, t2).map_err(err("sum", seed))?;
        let (tp, tq) = joint_tables(&p, &q).map_err(err("sum", seed))?;
        let want: Vec<f64> = tp.values.iter().zip(&tq.values).map(|(a, b)| t1 * a + t2 * b).collect();
        pointwise("sum", seed, &table(&r.circuit).unwrap(), &want, OP_TOL)?;

        // multiply: compatible pairs
        let (p, q) = random_compatible_pair(seed, n, &flags(true, seed % 2 == 0)).map_err(err("multiply", seed))?;
        let r = multiply(&p, &q).map_err(err("multiply", seed))?;
        let (tp, tq) = joint_tables(&p, &q).unwrap();
        let want: Vec<f64> = tp.values.iter().zip(&tq.values).map(|(a, b)| a * b).collect();
        pointwise("multiply", seed, &table(&r.circuit).unwrap(), &want, OP_TOL)?;

        // natural power: structured-decomposable
        let k = if n <= 8 { 3 } else { 2 };
        let s = random_circuit(seed, n, &flags(true, false)).map_err(err("natural power", seed))?;
        let r = natural_power(&s, k).map_err(err("natural power", seed))?;
        let want: Vec<f64> = table(&s).unwrap().values.iter().map(|v| v.powi(k as i32)).collect();
        pointwise("natural power", seed, &table(&r.circuit).unwrap(), &want, OP_TOL)?;

        // restricted power, log, support: deterministic
        let d = random_circuit(seed, n, &flags(seed % 2 == 1, true)).map_err(err("restricted power", seed))?;
        let td = table(&d).unwrap();
        let alpha = rng.gen_range(-2.0..3.0);
        let r = restricted_power(&d, alpha).map_err(err("restricted power", seed))?;
        let want: Vec<f64> = td.values.iter().map(|&v| if v == 0.0 { 0.0 } else { v.powf(alpha) }).collect();
        pointwise("restricted power", seed, &table(&r.circuit).unwrap(), &want, OP_TOL)?;

        let r = log_circuit(&d).map_err(err("log", seed))?;
        let want: Vec<f64> = td.values.iter().map(|&v| if v == 0.0 { 0.0 } else { v.ln() }).collect();
        pointwise("log", seed, &table(&r.circuit).unwrap(), &want, CHAINED_TOL)?;

        let r = support_circuit(&d).map_err(err("support", seed))?;
        let want: Vec<f64> = td.values.iter().map(|&v| if v == 0.0 { 0.0 } else { 1.0 }).collect();
        pointwise("support", seed, &table(&r).unwrap(), &want, 0.0)?;

        // quotient: deterministic compatible pairs
        let (p, q) = random_compatible_pair(seed, n, &flags(true, true)).map_err(err("quotient", seed))?;
        let r = quotient(&p, &q).map_err(err("quotient", seed))?;
        let (tp, tq) = joint_tables(&p, &q).unwrap();
        let want: Vec<f64> =
            tp.values.iter().zip(&tq.values).map(|(a, b)| if *b == 0.0 { 0.0 } else { a / b }).collect();
        pointwise("quotient", seed, &table(&r.circuit).unwrap(), &want, CHAINED_TOL)?;

        // exp of a linear form
        let vars: Vec<Variable> = (1..=n as u32).map(Variable::binary).collect();
        let theta0 = rng.gen_range(-1.0..1.0);
        let coeffs: Vec<(VarId, f64)> = (1..=n as u32).map(|v| (v, rng.gen_range(-1.0..1.0))).collect();
        let r = exp_linear(&vars, theta0, &coeffs).map_err(err("exp", seed))?;
        let t = table(&r.circuit).unwrap();
        let want: Vec<f64> = (0..t.len())
            .map(|i| {
                let x = t.state(i);
                (theta0 + coeffs.iter().map(|&(v, c)| c * x[v as usize - 1] as f64).sum::<f64>()).exp()
            })
            .collect();
        pointwise("exp", seed, &t, &want, OP_TOL)?;
        checked += 8;
    }
    let took = start.elapsed();
    ensure(took <= TIME_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("{checked} op outputs over {INSTANCES} seeds in {:.1?}", took))
}

fn which(token: &str) -> Which {
    match token {
        "Sm" => Which::Smooth,
        "Dec" => Which::Decomposable,
        "SD" => Which::Structured,
        "Det" => Which::Deterministic,
        t => panic!("unknown output token {t}"),
    }
}

/// Flags a row promises for inputs carrying `have`: the plain part of the
/// output column always, each `+X` part when the inputs have X.
fn promised(output: &str, have: &[Which]) -> Vec<Which> {
    let (plain, extra) = output.split_once('(').unwrap_or((output, ""));
    let mut out: Vec<Which> = plain.split(',').map(str::trim).filter(|t| !t.is_empty()).map(which).collect();
    for t in extra.trim_end_matches(')').split(',').map(|t| t.trim().trim_start_matches('+')) {
        if !t.is_empty() && have.contains(&which(t)) {
            out.push(which(t));
        }
    }
    out
}

fn claims_hold(row: &str, seed: u64, r: &OpResult, want: &[Which]) -> Result<(), String> {
    for w in want {
        ensure(r.flags.get(*w).holds(), || format!("{row} seed {seed}: {w:?} not claimed"))?;
    }
    for w in Which::ALL {
        if !r.flags.get(w).holds() {
            continue;
        }
        let c = check_property(&r.circuit, w).map_err(|e| format!("{row} seed {seed}: {e}"))?;
        ensure(!matches!(c, PropertyCheck::False { .. }), || format!("{row} seed {seed}: {w:?} fails: {c:?}"))?;
        if w == Which::Deterministic {
            let ok = children_disjoint(&r.circuit).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{row} seed {seed}: Det claim fails enumeration"))?;
        }
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let row = |name: &str| OPERATION_ROWS.iter().find(|r| r.name == name).unwrap().output;
    let sd = [Which::Structured];
    let sd_det = [Which::Structured, Which::Deterministic];
    let det = [Which::Deterministic];
    let mut checked = 0;
    for seed in 0..CLOSURE_INSTANCES {
        let n = 3 + (seed % 6) as usize;
        let g = |want: PropertyFlags, s: u64| random_circuit(s, n, &want).unwrap();
        let pair = |want| random_compatible_pair(seed, n, &want).unwrap();

        let (p, q) = pair(flags(true, false));
        claims_hold("sum", seed, &sum_circuits(&p, &q, 0.3, 0.7).unwrap(), &promised(row("sum"), &sd))?;
        let (a, b) = (g(flags(false, false), seed), g(flags(false, false), seed + 1));
        claims_hold("sum", seed, &sum_circuits(&a, &b, 0.3, 0.7).unwrap(), &promised(row("sum"), &[]))?;

        claims_hold("product", seed, &multiply(&p, &q).unwrap(), &promised(row("product"), &sd))?;
        let (pd, qd) = pair(flags(true, true));
        claims_hold("product", seed, &multiply(&pd, &qd).unwrap(), &promised(row("product"), &sd_det))?;

        let r = natural_power(&p, 2).unwrap();
        claims_hold("power (natural)", seed, &r, &promised(row("power (natural)"), &sd))?;
        let r = natural_power(&pd, 3).unwrap();
        claims_hold("power (natural)", seed, &r, &promised(row("power (natural)"), &sd_det))?;

        let d = g(flags(false, true), seed);
        let r = restricted_power(&d, 0.5).unwrap();
        claims_hold("power (real)", seed, &r, &promised(row("power (real)"), &det))?;
        let r = restricted_power(&pd, -1.5).unwrap();
        claims_hold("power (real)", seed, &r, &promised(row("power (real)"), &sd_det))?;

        claims_hold("quotient", seed, &quotient(&pd, &qd).unwrap(), &promised(row("quotient"), &sd_det))?;
        let (ps, _) = pair(flags(true, false));
        let (_, qs) = pair(flags(true, true));
        let r = quotient(&ps, &qs).map_err(|e| format!("quotient seed {seed}: {e}"))?;
        claims_hold("quotient", seed, &r, &promised(row("quotient"), &sd))?;

        claims_hold("log", seed, &log_circuit(&d).unwrap(), &promised(row("log"), &det))?;
        claims_hold("log", seed, &log_circuit(&pd).unwrap(), &promised(row("log"), &sd_det))?;

        let vars: Vec<Variable> = (1..=n as u32).map(Variable::binary).collect();
        let coeffs: Vec<(VarId, f64)> = (1..=n as u32).map(|v| (v, 0.1 * v as f64)).collect();
        claims_hold("exp", seed, &exp_linear(&vars, 0.5, &coeffs).unwrap(), &promised(row("exp"), &[]))?;
        checked += 14;
    }
    Ok(format!("{checked} row instances, every claimed flag re-verified"))
}

fn criterion_3() -> Outcome {
    for seed in 0..SIZE_INSTANCES {
        let n = 3 + (seed % 8) as usize;
        let (p, q) = random_compatible_pair(seed, n, &flags(true, seed % 2 == 0)).unwrap();
        let m = multiply(&p, &q).unwrap();
        ensure(m.circuit.num_edges() <= p.size() * q.size(), || {
            format!("multiply seed {seed}: {} > {}·{}", m.circuit.num_edges(), p.size(), q.size())
        })?;
        let d = random_circuit(seed, n, &flags(seed % 2 == 0, true)).unwrap();
        let r = restricted_power(&d, 0.7).unwrap();
        ensure(r.circuit.size() == d.size(), || {
            format!("restricted power seed {seed}: {} vs {}", r.circuit.size(), d.size())
        })?;
        let l = log_circuit(&d).unwrap();
        ensure(l.circuit.size() <= 4 * d.size(), || format!("log seed {seed}: {} > 4·{}", l.circuit.size(), d.size()))?;
        let s = random_circuit(seed, n, &flags(true, false)).unwrap();
        let sq = natural_power(&s, 2).unwrap();
        ensure(sq.circuit.size() <= s.size() * s.size(), || {
            format!("square seed {seed}: {} > {}²", sq.circuit.size(), s.size())
        })?;
        let dn = natural_power(&d, 2 + (seed % 4) as u32).unwrap();
        ensure(dn.circuit.size() == d.size(), || {
            format!("det power seed {seed}: {} vs {}", dn.circuit.size(), d.size())
        })?;
    }
    Ok(format!("{SIZE_INSTANCES} instances per bound"))
}

fn bern(t: f64) -> Circuit {
    common::bern(1, t)
}

fn anchors() -> Result<(), String> {
    let ln2 = std::f64::consts::LN_2;
    let h = queries::shannon_entropy(&bern(0.5)).unwrap().value;
    ensure((h - ln2).abs() <= ANCHOR_TOL, || format!("entropy(Bernoulli(0.5)) = {h}"))?;
    let b = bern(0.3);
    let k = queries::kld(&b, &b).unwrap().value;
    ensure(k.abs() <= ANCHOR_TOL, || format!("kld(p,p) = {k}"))?;
    let sl = queries::squared_loss(&bern(0.3), &bern(0.5)).unwrap().value;
    ensure((sl - 0.08).abs() <= ANCHOR_TOL, || format!("squared loss = {sl}"))?;

    let vars = vec![Variable::binary(1), Variable::binary(2)];
    let mut b = pcq::Builder::new(vars.clone()).unwrap();
    let mut fac = Vec::new();
    for (v, t) in [(1, 0.3), (2, 0.6)] {
        let x0 = b.input(v, pcq::InputTable::indicator(2, 0)).unwrap();
        let x1 = b.input(v, pcq::InputTable::indicator(2, 1)).unwrap();
        fac.push(b.sum_with(vec![(x0, 1.0 - t), (x1, t)], Vec::new(), true).unwrap());
    }
    let root = b.product(fac).unwrap();
    let ind = b.finish(root, flags(true, true)).unwrap();
    let mi = queries::mutual_information(&ind, &[1], &[2]).unwrap().value;
    ensure(mi.abs() <= ANCHOR_TOL, || format!("MI(independent) = {mi}"))?;

    let mut b = pcq::Builder::new(vars).unwrap();
    let mut kids = Vec::new();
    for v in 0..2 {
        let a = b.input(1, pcq::InputTable::indicator(2, v)).unwrap();
        let c = b.input(2, pcq::InputTable::indicator(2, v)).unwrap();
        kids.push((b.product(vec![a, c]).unwrap(), 0.5));
    }
    let s = b.sum_with(kids, Vec::new(), true).unwrap();
    let copy = b.finish(s, flags(true, true)).unwrap();
    let mi = queries::mutual_information(&copy, &[1], &[2]).unwrap().value;
    ensure((mi - ln2).abs() <= COPY_TOL, || format!("MI(copy) = {mi}"))
}

fn criterion_4() -> Outcome {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for seed in 0..QUERY_INSTANCES {
        let n = 3 + (seed % 8) as usize;
        let (p, q) = random_compatible_pair(seed, n, &flags(true, true)).unwrap();
        let (tp, tq) = joint_tables(&p, &q).unwrap();
        let fsupp = support_circuit(&q).unwrap();
        let (_, tf) = joint_tables(&p, &fsupp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut k: Vec<(VarId, u32)> = Vec::new();
        for v in 1..=n as u32 {
            if rng.gen_bool(0.5) {
                k.push((v, rng.gen_range(1..4)));
            }
        }
        let alpha = [0.5, 2.0, 3.0, 1.5][(seed % 4) as usize];
        let split = 1 + (seed as usize % (n - 1));
        let ids: Vec<VarId> = (1..=n as u32).collect();
        let (x, y) = ids.split_at(split);
        let mp = random_mdet(seed, x, y).unwrap();
        let tm = table(&mp).unwrap();
        let cases: Vec<(&str, pcq::Result<queries::QueryReport>, OracleQuery, Vec<&DenseTable>)> = vec![
            ("entropy", queries::shannon_entropy(&p), OracleQuery::Entropy, vec![&tp]),
            ("renyi", queries::renyi_entropy(&p, alpha), OracleQuery::Renyi(alpha), vec![&tp]),
            ("cross entropy", queries::cross_entropy(&p, &q), OracleQuery::CrossEntropy, vec![&tp, &tq]),
            ("kld", queries::kld(&p, &q), OracleQuery::Kld, vec![&tp, &tq]),
            ("alpha", queries::alpha_divergence(&p, &q, alpha), OracleQuery::Alpha(alpha), vec![&tp, &tq]),
            ("itakura-saito", queries::itakura_saito(&p, &q), OracleQuery::ItakuraSaito, vec![&tp, &tq]),
            ("cauchy-schwarz", queries::cauchy_schwarz(&p, &q), OracleQuery::CauchySchwarz, vec![&tp, &tq]),
            ("squared loss", queries::squared_loss(&p, &q), OracleQuery::SquaredLoss, vec![&tp, &tq]),
            (
                "mutual information",
                queries::mutual_information(&mp, x, y),
                OracleQuery::MutualInformation { x: x.to_vec(), y: y.to_vec() },
                vec![&tm],
            ),
            (
                "moment",
                queries::moment(&p, &k, seed % 2 == 0),
                OracleQuery::Moment { k: k.clone(), normalized: seed % 2 == 0 },
                vec![&tp],
            ),
            ("formula probability", queries::formula_probability(&p, &fsupp), OracleQuery::Expectation, vec![&tp, &tf]),
            ("expected prediction", queries::expected_prediction(&p, &q), OracleQuery::Expectation, vec![&tp, &tq]),
        ];
        for (name, got, o, tables) in cases {
            let got = got.map_err(|e| format!("{name} seed {seed}: {e}"))?.value;
            let want = oracle_query(&o, &tables).map_err(|e| format!("{name} oracle seed {seed}: {e}"))?;
            ensure(close(got, want, QUERY_TOL), || format!("{name} seed {seed}: {got} vs {want}"))?;
            *counts.entry(name).or_default() += 1;
        }
    }
    ensure(counts.len() == 12 && counts.values().all(|&c| c == QUERY_INSTANCES), || format!("coverage {counts:?}"))?;
    anchors()?;
    Ok(format!("12 queries × {QUERY_INSTANCES} instances, 5 analytic anchors"))
}

fn criterion_5() -> Outcome {
    let rows: Vec<_> = OPERATION_ROWS.iter().chain(QUERY_ROWS).collect();
    ensure(rows.len() == GOLDEN.len(), || format!("{} rows, {} golden pipelines", rows.len(), GOLDEN.len()))?;
    for row in &rows {
        let g = GOLDEN.iter().find(|g| g.0 == row.name).ok_or_else(|| format!("no pipeline for {}", row.name))?;
        let want = row.complexity.replace("^n", &format!("^{}", g.1)).replace("^a", &format!("^{}", g.1));
        let want = Cost::parse(&want).ok_or_else(|| format!("{}: unparsable cost", row.name))?;
        let (e, env) = parse_pipeline(g.2).map_err(|e| e.to_string())?;
        match analyze(&e, &env) {
            Verdict::Plan(p) => ensure(p.cost == want, || format!("{}: {} vs {want}", row.name, p.cost))?,
            Verdict::Hard(h) => return Err(format!("{}: unexpected hard verdict {}", row.name, h.citation)),
        }
        let (e, env) = parse_pipeline(g.3).map_err(|e| e.to_string())?;
        match analyze(&e, &env) {
            Verdict::Hard(h) => ensure(h.citation == row.citation, || format!("{}: cites {}", row.name, h.citation))?,
            Verdict::Plan(p) => return Err(format!("{}: condition-removed pipeline planned at {}", row.name, p.cost)),
        }
    }
    Ok(format!("{} of {} rows reproduced", rows.len(), rows.len()))
}

fn brute_count(f: &Cnf) -> u64 {
    (0..1u64 << f.nvars)
        .filter(|a| f.clauses.iter().all(|c| c.iter().any(|&l| ((a >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))))
        .count() as u64
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = MultiplyOptions { enumerate_fallback: Some(1 << 22) };
    for i in 0..CNF_INSTANCES {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(1..=4);
        let clauses: Vec<Vec<i32>> = (0..m)
            .map(|_| {
                let mut vs: Vec<i32> = (1..=n).collect();
                for j in 0..3 {
                    let k = rng.gen_range(j..vs.len());
                    vs.swap(j, k);
                }
                vs[..3].iter().map(|&v| if rng.gen_bool(0.5) { v } else { -v }).collect()
            })
            .collect();
        let f = Cnf::new(n as usize, clauses).map_err(|e| e.to_string())?;
        let (pb, pg) = cnf_to_gadgets(&f).map_err(|e| e.to_string())?;
        let prod = multiply_with(&pb, &pg, &opts).map_err(|e| format!("cnf {i}: {e}"))?;
        let count = integrate(&prod.circuit, &vec![None; prod.circuit.vars().len()]).map_err(|e| e.to_string())?;
        let want = brute_count(&f);
        ensure(count.fract() == 0.0 && count as u64 == want, || format!("cnf {i} {f:?}: {count} vs {want}"))?;
    }
    Ok(format!("{CNF_INSTANCES} formulas counted exactly"))
}

fn criterion_7() -> Outcome {
    let text = "p:det,sd; q:det,sd; cmp(p,q); integ(mul(p,log(div(p,q))))";
    let (e, env) = parse_pipeline(text).map_err(|e| e.to_string())?;
    let Verdict::Plan(plan) = analyze(&e, &env) else { return Err("pipeline refused".into()) };
    ensure(plan.cost.to_string() == "O(|p||q|)", || format!("plan cost {}", plan.cost))?;
    for seed in 0..KLD_INSTANCES {
        let n = 3 + (seed % 8) as usize;
        let (p, q) = random_compatible_pair(seed, n, &flags(true, true)).unwrap();
        let want = queries::kld(&p, &q).map_err(|e| e.to_string())?.value;
        let bind = HashMap::from([("p".to_string(), p), ("q".to_string(), q)]);
        let got = execute(&e, &bind).map_err(|e| format!("seed {seed}: {e}"))?.value.scalar().unwrap();
        ensure(close(got, want, QUERY_TOL), || format!("seed {seed}: {got} vs {want}"))?;
    }
    Ok(format!("plan {}; {KLD_INSTANCES} executions agree with kld", plan.cost))
}

fn cli(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = pcq::cli::run(std::iter::once("pcq").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&err).into_owned())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    // a non-deterministic PC whose non-determinism the checker confirms
    let nd = (0..)
        .map(|s| random_circuit(s, 4, &flags(true, false)).unwrap())
        .find(|c| matches!(check_property(c, Which::Deterministic), Ok(PropertyCheck::False { .. })))
        .unwrap();
    save(&nd, path("nd.pc")).map_err(|e| e.to_string())?;
    let (a, b) = (0..)
        .map(|s| {
            (
                random_circuit(2 * s, 4, &flags(true, false)).unwrap(),
                random_circuit(2 * s + 1, 4, &flags(true, false)).unwrap(),
            )
        })
        .find(|(a, b)| multiply(a, b).is_err())
        .unwrap();
    save(&a, path("a.pc")).map_err(|e| e.to_string())?;
    save(&b, path("b.pc")).map_err(|e| e.to_string())?;
    let cases = [
        (vec!["query", "entropy", "nd.pc"], hardness::ENTROPY),
        (vec!["apply", "mul", "a.pc", "b.pc", "-o", "ab.pc"], hardness::PRODUCT),
        (vec!["apply", "log", "nd.pc", "-o", "log.pc"], hardness::LOG),
    ];
    for (args, cite) in cases {
        let args: Vec<String> = args.iter().map(|a| if a.ends_with(".pc") { path(a) } else { a.to_string() }).collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, err) = cli(&args);
        ensure(code == 2 && err.contains(cite), || format!("{} {}: exit {code}, {}", args[0], args[1], err.trim()))?;
    }
    Ok("entropy, mul, log refused with exit 2 and their citations".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", criterion_1),
        ("flag closure", criterion_2),
        ("size bounds", criterion_3),
        ("queries", criterion_4),
        ("analyzer golden tables", criterion_5),
        ("gadget model counting", criterion_6),
        ("KLD pipeline", criterion_7),
        ("negative paths", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
