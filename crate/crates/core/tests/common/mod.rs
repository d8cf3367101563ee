#![allow(dead_code)]

pub mod golden;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcq::circuit::{FlagState, PropertyFlags, VarId};
use pcq::{Builder, Circuit, InputTable, Variable};

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn flags(sd: bool, det: bool) -> PropertyFlags {
    let f = |b| if b { FlagState::Verified } else { FlagState::Unknown };
    PropertyFlags { structured: f(sd), deterministic: f(det), ..Default::default() }
}

/// Categorical over `var` as a deterministic sum of indicators.
pub fn categorical(var: VarId, probs: &[f64]) -> Circuit {
    let mut b = Builder::new(vec![Variable::new(var, probs.len()).unwrap()]).unwrap();
    let ch: Vec<(usize, f64)> = probs
        .iter()
        .enumerate()
        .map(|(x, &w)| (b.input(var, InputTable::indicator(probs.len(), x)).unwrap(), w))
        .collect();
    let s = b.sum_with(ch, Vec::new(), true).unwrap();
    b.finish(s, flags(true, true)).unwrap()
}

pub fn bern(var: VarId, t: f64) -> Circuit {
    categorical(var, &[1.0 - t, t])
}

/// Single input unit holding `values`.
pub fn table_input(var: VarId, values: &[f64]) -> Circuit {
    let mut b = Builder::new(vec![Variable::new(var, values.len()).unwrap()]).unwrap();
    let u = b.input(var, InputTable::from_values(values.to_vec()).unwrap()).unwrap();
    b.finish(u, PropertyFlags::default()).unwrap()
}

fn random_table(rng: &mut ChaCha8Rng) -> InputTable {
    InputTable::from_values(vec![rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)]).unwrap()
}

fn split(rng: &mut ChaCha8Rng, scope: &[VarId]) -> (Vec<VarId>, Vec<VarId>) {
    let k = rng.gen_range(1..scope.len());
    (scope[..k].to_vec(), scope[k..].to_vec())
}

fn rough(b: &mut Builder, rng: &mut ChaCha8Rng, scope: &[VarId], depth: usize) -> usize {
    if scope.len() == 1 || depth == 0 {
        let ins: Vec<usize> = scope.iter().map(|&v| b.input(v, random_table(rng)).unwrap()).collect();
        return b.product_or_single(ins).unwrap();
    }
    let mut kids = Vec::new();
    for _ in 0..2 {
        // children of a sum may cover only part of the scope
        let sub: Vec<VarId> = if rng.gen_bool(0.4) {
            let keep: Vec<VarId> = scope.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            if keep.is_empty() {
                vec![scope[0]]
            } else {
                keep
            }
        } else {
            scope.to_vec()
        };
        let node = if sub.len() == 1 {
            b.input(sub[0], random_table(rng)).unwrap()
        } else {
            let (l, r) = split(rng, &sub);
            let a = rough(b, rng, &l, depth - 1);
            let c = rough(b, rng, &r, depth - 1);
            b.product(vec![a, c]).unwrap()
        };
        kids.push((node, rng.gen_range(0.1..1.0)));
    }
    b.sum(kids).unwrap()
}

/// Decomposable positive circuit whose sums are usually not smooth.
pub fn rough_circuit(seed: u64, n: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<Variable> = (1..=n as u32).map(Variable::binary).collect();
    let ids: Vec<VarId> = (1..=n as u32).collect();
    let mut b = Builder::new(vars).unwrap();
    let root = rough(&mut b, &mut rng, &ids, 4);
    b.finish(root, PropertyFlags::default()).unwrap()
}

/// Every joint state of `cards`, first variable most significant.
pub fn states(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in cards {
        out = out.into_iter().flat_map(|s| (0..c).map(move |x| [s.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Product over X1,X2,X3 split as {X1X2}{X3} when `left`, else as {X1}{X2X3}.
pub fn split_product(b: &mut Builder, left: bool, vals: [f64; 3]) -> usize {
    let ins: Vec<usize> = (1..=3u32)
        .map(|v| b.input(v, InputTable::from_values(vec![vals[v as usize - 1], 1.0]).unwrap()).unwrap())
        .collect();
    if left {
        let ab = b.product(vec![ins[0], ins[1]]).unwrap();
        b.product(vec![ab, ins[2]]).unwrap()
    } else {
        let bc = b.product(vec![ins[1], ins[2]]).unwrap();
        b.product(vec![ins[0], bc]).unwrap()
    }
}

pub fn three_binary() -> Vec<Variable> {
    (1..=3).map(Variable::binary).collect()
}
