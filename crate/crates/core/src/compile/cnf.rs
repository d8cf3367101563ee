//! DIMACS 3-CNF and the copy-variable gadget pair whose product counts models.

use std::path::Path;

use crate::circuit::{Builder, Circuit, FlagState, InputTable, PropertyFlags, VarId, Variable, MAX_VAR_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub nvars: usize,
    /// Signed DIMACS literals, three per clause.
    pub clauses: Vec<[i32; 3]>,
}

impl Cnf {
    pub fn new(nvars: usize, clauses: Vec<Vec<i32>>) -> Result<Cnf> {
        if clauses.is_empty() {
            return Err(Error::InvalidArgument("CNF has no clauses".into()));
        }
        let mut out = Vec::with_capacity(clauses.len());
        for (j, c) in clauses.iter().enumerate() {
            if c.len() != 3 {
                return Err(Error::InvalidArgument(format!("clause {} has {} literals, expected 3", j + 1, c.len())));
            }
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > nvars {
                    return Err(Error::InvalidArgument(format!(
                        "clause {} has literal {l} outside 1..={nvars}",
                        j + 1
                    )));
                }
            }
            let (a, b, d) = (c[0].abs(), c[1].abs(), c[2].abs());
            if a == b || a == d || b == d {
                return Err(Error::InvalidArgument(format!("clause {} repeats a variable", j + 1)));
            }
            out.push([c[0], c[1], c[2]]);
        }
        Ok(Cnf { nvars, clauses: out })
    }

    pub fn parse_dimacs(text: &str) -> Result<Cnf> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let f: Vec<&str> = t.split_whitespace().collect();
                if f.len() != 4 || f[1] != "cnf" {
                    return Err(Error::Parse { line: no + 1, col: 1, msg: "expected `p cnf <vars> <clauses>`".into() });
                }
                let n = f[2].parse().map_err(|_| Error::Parse {
                    line: no + 1,
                    col: 7,
                    msg: "bad variable count".into(),
                })?;
                let m =
                    f[3].parse().map_err(|_| Error::Parse { line: no + 1, col: 7, msg: "bad clause count".into() })?;
                header = Some((n, m));
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse { line: no + 1, col: 1, msg: "clause before the `p cnf` header".into() });
            }
            for tok in t.split_whitespace() {
                let col = line.find(tok).unwrap_or(0) + 1;
                let l: i32 =
                    tok.parse().map_err(|_| Error::Parse { line: no + 1, col, msg: format!("bad literal `{tok}`") })?;
                if l == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(l);
                }
            }
        }
        let (n, m) = header.ok_or(Error::Parse { line: 1, col: 1, msg: "missing `p cnf` header".into() })?;
        if !cur.is_empty() {
            clauses.push(cur);
        }
        if clauses.len() != m {
            return Err(Error::InvalidArgument(format!("header declares {m} clauses, found {}", clauses.len())));
        }
        Cnf::new(n, clauses)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Cnf> {
        Self::parse_dimacs(&std::fs::read_to_string(path)?)
    }

    /// Id of the copy of variable `i` owned by clause `j` (both 1-based).
    pub fn copy_var(&self, i: usize, j: usize) -> VarId {
        ((i - 1) * self.clauses.len() + j) as VarId
    }
}

/// Gadget pair over the n·m copy variables: `p_beta` forces all copies of a
/// variable to agree and `p_gamma` is a sum over the 7 models of each clause.
/// The partition function of their product is the model count.
#[allow(clippy::needless_range_loop)]
pub fn cnf_to_gadgets(f: &Cnf) -> Result<(Circuit, Circuit)> {
    let (n, m) = (f.nvars, f.clauses.len());
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("CNF needs at least one variable and one clause".into()));
    }
    if n * m > MAX_VAR_ID as usize {
        return Err(Error::InvalidArgument(format!("{n}·{m} copy variables exceed the limit of {MAX_VAR_ID}")));
    }
    let vars: Vec<Variable> = (1..=(n * m) as VarId).map(Variable::binary).collect();
    let flags =
        PropertyFlags { structured: FlagState::Verified, deterministic: FlagState::Verified, ..Default::default() };

    let mut b = Builder::new(vars.clone())?;
    let mut ind = vec![[usize::MAX; 2]; n * m + 1];
    let mut indicator = |b: &mut Builder, v: VarId, x: usize| -> Result<usize> {
        if ind[v as usize][x] == usize::MAX {
            ind[v as usize][x] = b.input(v, InputTable::indicator(2, x))?;
        }
        Ok(ind[v as usize][x])
    };
    let mut groups = Vec::with_capacity(n);
    for i in 1..=n {
        let mut agree = Vec::with_capacity(2);
        for x in [1, 0] {
            let fac = (1..=m).map(|j| indicator(&mut b, f.copy_var(i, j), x)).collect::<Result<Vec<_>>>()?;
            agree.push((b.product_or_single(fac)?, 1.0));
        }
        groups.push(b.sum_with(agree, Vec::new(), true)?);
    }
    let root = b.product_or_single(groups)?;
    let p_beta = b.finish(root, flags)?;

    let mut b = Builder::new(vars)?;
    let mut ind = vec![[usize::MAX; 2]; n * m + 1];
    let mut indicator = |b: &mut Builder, v: VarId, x: usize| -> Result<usize> {
        if ind[v as usize][x] == usize::MAX {
            ind[v as usize][x] = b.input(v, InputTable::indicator(2, x))?;
        }
        Ok(ind[v as usize][x])
    };
    let mut ds = Vec::with_capacity(m);
    for (j0, clause) in f.clauses.iter().enumerate() {
        let j = j0 + 1;
        let mut free = vec![usize::MAX; n + 1];
        for i in 1..=n {
            if clause.iter().all(|l| l.unsigned_abs() as usize != i) {
                let v = f.copy_var(i, j);
                let (a, c) = (indicator(&mut b, v, 0)?, indicator(&mut b, v, 1)?);
                free[i] = b.sum_with(vec![(a, 1.0), (c, 1.0)], Vec::new(), true)?;
            }
        }
        let mut models = Vec::with_capacity(7);
        for h in 0..8usize {
            let bits = [(h >> 2) & 1, (h >> 1) & 1, h & 1];
            let sat = clause.iter().zip(bits).any(|(&l, x)| (l > 0) == (x == 1));
            if !sat {
                continue;
            }
            let mut fac = Vec::with_capacity(n);
            for i in 1..=n {
                match clause.iter().position(|l| l.unsigned_abs() as usize == i) {
                    Some(k) => fac.push(indicator(&mut b, f.copy_var(i, j), bits[k])?),
                    None => fac.push(free[i]),
                }
            }
            models.push((b.product_or_single(fac)?, 1.0));
        }
        ds.push(b.sum_with(models, Vec::new(), true)?);
    }
    let root = b.product_or_single(ds)?;
    let p_gamma = b.finish(root, flags)?;
    Ok((p_beta, p_gamma))
}
