use pcq::circuit::{
    check_property, evaluate, integrate, to_text, FlagState, PropertyCheck, PropertyFlags, ScopeSet, UnitKind, Which,
};
use pcq::compile::{
    cnf_to_gadgets, forest_to_circuit, random_circuit, random_with_vtree, regression_to_circuit, Cnf, Forest, Gate,
    GenSpec, Node, RegressionCircuit, Tree,
};
use pcq::ops::{multiply_with, MultiplyOptions};
use pcq::oracle::table;
use pcq::Variable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn want(sd: bool, det: bool) -> PropertyFlags {
    PropertyFlags {
        structured: FlagState::from_bool(sd),
        deterministic: FlagState::from_bool(det),
        ..Default::default()
    }
}

fn states(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in cards {
        out = out.into_iter().flat_map(|s| (0..c).map(move |x| [s.clone(), vec![x]].concat())).collect();
    }
    out
}

#[test]
fn same_seed_same_circuit() {
    for (sd, det) in [(true, true), (false, false), (true, false), (false, true)] {
        let a = random_circuit(42, 7, &want(sd, det)).unwrap();
        let b = random_circuit(42, 7, &want(sd, det)).unwrap();
        assert_eq!(to_text(&a), to_text(&b));
    }
}

#[test]
fn sd_det_family_verifies_by_enumeration() {
    for seed in 0..20 {
        let c = random_circuit(seed, 6, &want(true, true)).unwrap();
        assert_eq!(check_property(&c, Which::Structured).unwrap(), PropertyCheck::Verified, "seed {seed}");
        assert_eq!(check_property(&c, Which::Deterministic).unwrap(), PropertyCheck::Verified, "seed {seed}");
        assert!((table(&c).unwrap().total() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn every_family_is_smooth_and_decomposable() {
    for seed in 0..20 {
        for (sd, det) in [(false, false), (true, false), (false, true)] {
            let c = random_circuit(seed, 5, &want(sd, det)).unwrap();
            assert!(check_property(&c, Which::Smooth).unwrap().holds());
            assert!(check_property(&c, Which::Decomposable).unwrap().holds());
            if det {
                assert!(check_property(&c, Which::Deterministic).unwrap().holds(), "seed {seed}");
            }
            if sd {
                assert!(check_property(&c, Which::Structured).unwrap().holds(), "seed {seed}");
            }
        }
    }
}

#[test]
fn omni_request_is_rejected() {
    let w = PropertyFlags { omni: FlagState::Verified, ..Default::default() };
    assert!(random_circuit(1, 3, &w).is_err());
    assert!(random_circuit(1, 0, &want(true, true)).is_err());
}

#[test]
fn products_follow_the_vtree() {
    for seed in 0..30 {
        let spec = GenSpec { deterministic: seed % 2 == 0, ..Default::default() };
        let (c, vt) = random_with_vtree(seed, 8, &spec).unwrap();
        let splits = vt.splits();
        for u in c.units() {
            if let UnitKind::Product { children } = &u.kind {
                assert_eq!(children.len(), 2);
                let (a, b) = (c.unit(children[0]).scope, c.unit(children[1]).scope);
                assert!(splits.contains(&(a, b)) || splits.contains(&(b, a)), "seed {seed}");
            }
        }
    }
}

// Tree-walk written against the JSON structure, separate from the library's.
fn walk(n: &Node, x: &dyn Fn(u32) -> usize) -> f64 {
    match n {
        Node::Leaf { leaf } => *leaf,
        Node::Split { var, children } => walk(&children[x(*var)], x),
    }
}

fn random_tree(rng: &mut ChaCha8Rng, vars: &[Variable], used: ScopeSet, depth: usize) -> Node {
    let free: Vec<&Variable> = vars.iter().filter(|v| !used.contains(v.id)).collect();
    if free.is_empty() || depth == 0 || rng.gen_bool(0.25) {
        return Node::Leaf { leaf: rng.gen_range(-8i32..=8) as f64 / 4.0 };
    }
    let v = free[rng.gen_range(0..free.len())];
    let used = used.union(ScopeSet::single(v.id));
    Node::Split { var: v.id, children: (0..v.card).map(|_| random_tree(rng, vars, used, depth - 1)).collect() }
}

#[test]
fn forest_matches_tree_walk_exactly() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = vec![Variable::binary(1), Variable::new(2, 3).unwrap(), Variable::binary(3), Variable::binary(4)];
        let trees = (0..3)
            .map(|_| Tree {
                weight: rng.gen_range(1..=4) as f64 / 2.0,
                root: random_tree(&mut rng, &vars, ScopeSet::EMPTY, 3),
            })
            .collect();
        let f = Forest { variables: vars.clone(), trees };
        let json = serde_json::to_string(&f).unwrap();
        let f = Forest::from_json(&json).unwrap();
        let c = forest_to_circuit(&f).unwrap();
        assert!(c.flags().omni.holds());
        for x in states(&[2, 3, 2, 2]) {
            let expect: f64 = f.trees.iter().map(|t| t.weight * walk(&t.root, &|v| x[v as usize - 1])).sum();
            assert_eq!(evaluate(&c, &x).unwrap(), expect, "seed {seed} x {x:?}");
        }
    }
}

fn brute_count(f: &Cnf) -> u64 {
    (0..1u64 << f.nvars)
        .filter(|a| f.clauses.iter().all(|c| c.iter().any(|&l| ((a >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))))
        .count() as u64
}

fn gadget_count(f: &Cnf) -> f64 {
    let (pb, pg) = cnf_to_gadgets(f).unwrap();
    let opts = MultiplyOptions { enumerate_fallback: Some(1 << 22) };
    let m = multiply_with(&pb, &pg, &opts).unwrap();
    integrate(&m.circuit, &vec![None; m.circuit.vars().len()]).unwrap()
}

fn random_cnf(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Cnf {
    let clauses = (0..m)
        .map(|_| {
            let mut vs: Vec<i32> = (1..=n as i32).collect();
            for i in 0..3 {
                let j = rng.gen_range(i..vs.len());
                vs.swap(i, j);
            }
            vs[..3].iter().map(|&v| if rng.gen_bool(0.5) { v } else { -v }).collect()
        })
        .collect();
    Cnf::new(n, clauses).unwrap()
}

#[test]
fn single_clause_has_seven_models() {
    let f = Cnf::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    assert_eq!(brute_count(&f), 7);
    assert_eq!(gadget_count(&f), 7.0);
}

#[test]
fn unsatisfiable_cnf_counts_zero() {
    let clauses: Vec<Vec<i32>> =
        (0..8).map(|h| (0..3).map(|k| if (h >> k) & 1 == 1 { k + 1 } else { -(k + 1) }).collect()).collect();
    let f = Cnf::new(3, clauses).unwrap();
    assert_eq!(brute_count(&f), 0);
    assert_eq!(gadget_count(&f), 0.0);
}

#[test]
fn gadgets_verify_and_count_random_cnfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let f = random_cnf(&mut rng, 4, 5);
        assert_eq!(gadget_count(&f), brute_count(&f) as f64, "{f:?}");
    }
    let f = random_cnf(&mut rng, 4, 3);
    let (pb, pg) = cnf_to_gadgets(&f).unwrap();
    for c in [&pb, &pg] {
        assert_eq!(check_property(c, Which::Structured).unwrap(), PropertyCheck::Verified);
        assert_eq!(check_property(c, Which::Deterministic).unwrap(), PropertyCheck::Verified);
    }
}

// Recursive regression-circuit semantics, restricted to each gate's support.
fn rgc_eval(r: &RegressionCircuit, g: usize, x: &[usize]) -> (f64, f64) {
    match &r.gates[g] {
        Gate::Input { var, values } => {
            let pos = r.vars.iter().position(|v| v.id == *var).unwrap();
            (if values.contains(&x[pos]) { 1.0 } else { 0.0 }, 0.0)
        }
        Gate::And { children } => {
            let parts: Vec<(f64, f64)> = children.iter().map(|&c| rgc_eval(r, c, x)).collect();
            let s: f64 = parts.iter().map(|p| p.0).product();
            (s, if s == 0.0 { 0.0 } else { parts.iter().map(|p| p.1).sum() })
        }
        Gate::Or { children } => {
            let mut s = 0.0;
            let mut f = 0.0;
            for &(c, phi) in children {
                let (sc, fc) = rgc_eval(r, c, x);
                s += sc;
                f += sc * (phi + fc);
            }
            (s, f)
        }
    }
}

// Decision-style generator: every OR splits on one variable, so OR children have disjoint supports.
fn random_gate(rng: &mut ChaCha8Rng, vars: &[u32], gates: &mut Vec<Gate>) -> usize {
    let z = vars[rng.gen_range(0..vars.len())];
    let rest: Vec<u32> = vars.iter().copied().filter(|&v| v != z).collect();
    let mut kids = Vec::new();
    for x in 0..2 {
        if rng.gen_bool(0.2) && !kids.is_empty() {
            continue;
        }
        gates.push(Gate::Input { var: z, values: vec![x] });
        let lit = gates.len() - 1;
        let child = if rest.is_empty() {
            lit
        } else {
            let sub = random_gate(rng, &rest, gates);
            gates.push(Gate::And { children: vec![lit, sub] });
            gates.len() - 1
        };
        kids.push((child, rng.gen_range(-2.0..2.0)));
    }
    gates.push(Gate::Or { children: kids });
    gates.len() - 1
}

#[test]
fn regression_circuit_matches_recursive_semantics() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = [1u32, 2, 3, 4];
        let mut gates = Vec::new();
        let out = random_gate(&mut rng, &ids, &mut gates);
        let r = RegressionCircuit::new(ids.iter().map(|&i| Variable::binary(i)).collect(), gates, out).unwrap();
        let c = regression_to_circuit(&r).unwrap();
        let edges: usize = r
            .gates
            .iter()
            .map(|g| match g {
                Gate::Input { .. } => 1,
                Gate::And { children } => children.len(),
                Gate::Or { children } => children.len(),
            })
            .sum();
        assert!(c.num_edges() <= 6 * (edges + r.gates.len()), "seed {seed}");
        for x in states(&[2, 2, 2, 2]) {
            let expect = rgc_eval(&r, out, &x).1;
            let got = evaluate(&c, &x).unwrap();
            assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0), "seed {seed} x {x:?}: {got} vs {expect}");
        }
    }
}
