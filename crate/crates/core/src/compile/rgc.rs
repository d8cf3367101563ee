//! Regression circuits: logical circuits whose OR edges carry additive offsets.
//! OR children are expected to have disjoint supports, as in decision circuits.
//!
//! ```text
//! rgc 1
//! var 1 2
//! inp 0 1 0        # literal X1=0
//! inp 1 1 1
//! or 2 2 0 1.5 1 -0.5
//! out 2
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::circuit::text::{tokenize, Line};
use crate::circuit::{Builder, Circuit, InputTable, PropertyFlags, ScopeSet, VarId, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Literal true exactly on the listed values of `var`.
    Input {
        var: VarId,
        values: Vec<usize>,
    },
    And {
        children: Vec<usize>,
    },
    Or {
        children: Vec<(usize, f64)>,
    },
}

/// Gates in topological order; children precede parents.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCircuit {
    pub vars: Vec<Variable>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl RegressionCircuit {
    pub fn new(mut vars: Vec<Variable>, gates: Vec<Gate>, output: usize) -> Result<Self> {
        vars.sort_by_key(|v| v.id);
        let r = RegressionCircuit { vars, gates, output };
        r.scopes()?;
        Ok(r)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| tokenize(i + 1, l)).filter(|l| !l.toks.is_empty());
        let mut header = lines.next().ok_or(Error::Parse { line: 1, col: 1, msg: "empty file".into() })?;
        if header.next("header")? != "rgc" {
            return Err(header.err(1, "expected `rgc 1` header"));
        }
        let version: u32 = header.parse("format version")?;
        if version != 1 {
            return Err(header.err(5, format!("unsupported format version {version}")));
        }
        header.done()?;
        let mut vars: Vec<Variable> = Vec::new();
        let mut gates = Vec::new();
        let mut ids: HashMap<u64, usize> = HashMap::new();
        let mut output = None;
        let mut last_line = 1;
        for mut l in lines {
            last_line = l.no;
            let kw = l.next("keyword")?;
            match kw {
                "var" => {
                    let id: u32 = l.parse("variable id")?;
                    let card: usize = l.parse("cardinality")?;
                    l.done()?;
                    vars.push(Variable::new(id, card).map_err(|e| l.err(5, e.to_string()))?);
                }
                "inp" | "and" | "or" => {
                    let col = l.col();
                    let uid: u64 = l.parse("gate id")?;
                    if ids.contains_key(&uid) {
                        return Err(l.err(col, format!("gate {uid} defined twice")));
                    }
                    let gate = match kw {
                        "inp" => {
                            let col = l.col();
                            let var: u32 = l.parse("variable id")?;
                            let card = vars
                                .iter()
                                .find(|v| v.id == var)
                                .ok_or_else(|| l.err(col, format!("undeclared variable {var}")))?
                                .card;
                            let mut values = Vec::new();
                            while l.pos < l.toks.len() {
                                let col = l.col();
                                let x: usize = l.parse("value")?;
                                if x >= card {
                                    return Err(l.err(col, format!("value {x} outside 0..{card}")));
                                }
                                values.push(x);
                            }
                            Gate::Input { var, values }
                        }
                        "and" => {
                            let n: usize = l.parse("child count")?;
                            let ch = (0..n).map(|_| gate_ref(&mut l, &ids)).collect::<Result<Vec<_>>>()?;
                            l.done()?;
                            Gate::And { children: ch }
                        }
                        _ => {
                            let n: usize = l.parse("child count")?;
                            let mut ch = Vec::with_capacity(n);
                            for _ in 0..n {
                                let c = gate_ref(&mut l, &ids)?;
                                ch.push((c, l.parse::<f64>("offset")?));
                            }
                            l.done()?;
                            Gate::Or { children: ch }
                        }
                    };
                    ids.insert(uid, gates.len());
                    gates.push(gate);
                }
                "out" => {
                    let o = gate_ref(&mut l, &ids)?;
                    l.done()?;
                    output = Some(o);
                }
                _ => return Err(l.err(1, format!("unknown keyword `{kw}`"))),
            }
        }
        let output = output.ok_or(Error::Parse { line: last_line, col: 1, msg: "missing `out` line".into() })?;
        Self::new(vars, gates, output)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Scope of every gate; fails on malformed gates.
    pub fn scopes(&self) -> Result<Vec<ScopeSet>> {
        let mut sc: Vec<ScopeSet> = Vec::with_capacity(self.gates.len());
        let bad = |g: usize, m: String| Error::InvalidArgument(format!("gate {g}: {m}"));
        for (g, gate) in self.gates.iter().enumerate() {
            let s = match gate {
                Gate::Input { var, values } => {
                    let v =
                        self.vars.iter().find(|v| v.id == *var).ok_or_else(|| bad(g, format!("undeclared X{var}")))?;
                    if values.iter().any(|&x| x >= v.card) {
                        return Err(bad(g, format!("literal value outside 0..{}", v.card)));
                    }
                    ScopeSet::single(*var)
                }
                Gate::And { children } => {
                    if children.len() < 2 {
                        return Err(bad(g, "AND needs at least two children".into()));
                    }
                    let mut s = ScopeSet::EMPTY;
                    for &c in children {
                        let cs = *sc.get(c).ok_or_else(|| bad(g, format!("child {c} does not precede it")))?;
                        if !s.is_disjoint(cs) {
                            return Err(bad(g, "AND children share variables".into()));
                        }
                        s = s.union(cs);
                    }
                    s
                }
                Gate::Or { children } => {
                    let Some(&(first, _)) = children.first() else {
                        return Err(bad(g, "OR needs at least one child".into()));
                    };
                    let s = *sc.get(first).ok_or_else(|| bad(g, format!("child {first} does not precede it")))?;
                    for &(c, phi) in children {
                        let cs = *sc.get(c).ok_or_else(|| bad(g, format!("child {c} does not precede it")))?;
                        if cs != s {
                            return Err(bad(g, "OR children have different scopes".into()));
                        }
                        if !phi.is_finite() {
                            return Err(bad(g, "non-finite offset".into()));
                        }
                    }
                    s
                }
            };
            sc.push(s);
        }
        if self.output >= self.gates.len() {
            return Err(Error::InvalidArgument(format!("output gate {} does not exist", self.output)));
        }
        Ok(sc)
    }

    /// Recursive value at `x` (aligned with `vars`): inputs give 0, AND adds
    /// its children's values on its support, OR adds offset plus child value
    /// over the children whose support holds.
    pub fn evaluate(&self, x: &[usize]) -> Result<f64> {
        if x.len() != self.vars.len() {
            return Err(Error::InvalidAssignment(format!("expected {} values, got {}", self.vars.len(), x.len())));
        }
        let pos: HashMap<VarId, usize> = self.vars.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        let mut s = vec![0.0; self.gates.len()];
        let mut f = vec![0.0; self.gates.len()];
        for (g, gate) in self.gates.iter().enumerate() {
            match gate {
                Gate::Input { var, values } => {
                    s[g] = if values.contains(&x[pos[var]]) { 1.0 } else { 0.0 };
                }
                Gate::And { children } => {
                    s[g] = children.iter().map(|&c| s[c]).product();
                    f[g] = s[g] * children.iter().map(|&c| f[c]).sum::<f64>();
                }
                Gate::Or { children } => {
                    s[g] = children.iter().map(|&(c, _)| s[c]).sum();
                    f[g] = children.iter().map(|&(c, phi)| s[c] * (phi + f[c])).sum();
                }
            }
        }
        Ok(f[self.output])
    }
}

fn gate_ref(l: &mut Line, ids: &HashMap<u64, usize>) -> Result<usize> {
    let col = l.col();
    let uid: u64 = l.parse("gate reference")?;
    ids.get(&uid).copied().ok_or_else(|| l.err(col, format!("gate {uid} is not defined before use")))
}

/// Circuit equal to the regression circuit's value at every state.
pub fn regression_to_circuit(r: &RegressionCircuit) -> Result<Circuit> {
    r.scopes()?;
    let mut b = Builder::new(r.vars.clone())?;
    let n = r.gates.len();
    let mut sup = vec![0usize; n];
    let mut val = vec![0usize; n];
    for (g, gate) in r.gates.iter().enumerate() {
        match gate {
            Gate::Input { var, values } => {
                let card = b.card(*var).unwrap();
                let mask: Vec<bool> = (0..card).map(|x| values.contains(&x)).collect();
                let ones = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
                sup[g] = b.input(*var, InputTable::new(ones, mask.clone())?)?;
                val[g] = b.input(*var, InputTable::new(vec![0.0; card], mask)?)?;
            }
            Gate::And { children } => {
                sup[g] = b.product(children.iter().map(|&c| sup[c]).collect())?;
                let mut terms = Vec::with_capacity(children.len());
                for (i, &ci) in children.iter().enumerate() {
                    let fac =
                        children.iter().enumerate().map(|(j, &cj)| if i == j { val[ci] } else { sup[cj] }).collect();
                    terms.push((b.product(fac)?, 1.0));
                }
                val[g] = b.sum(terms)?;
            }
            Gate::Or { children } => {
                sup[g] = b.sum(children.iter().map(|&(c, _)| (sup[c], 1.0)).collect())?;
                let mut terms = Vec::with_capacity(2 * children.len());
                for &(c, phi) in children {
                    terms.push((sup[c], phi));
                    terms.push((val[c], 1.0));
                }
                val[g] = b.sum(terms)?;
            }
        }
    }
    b.finish(val[r.output], PropertyFlags::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::evaluate;

    #[test]
    fn single_input_is_zero() {
        let r = RegressionCircuit::parse("rgc 1\nvar 1 2\ninp 0 1 0 1\nout 0\n").unwrap();
        let c = regression_to_circuit(&r).unwrap();
        assert_eq!(evaluate(&c, &[0]).unwrap(), 0.0);
        assert_eq!(evaluate(&c, &[1]).unwrap(), 0.0);
    }

    #[test]
    fn or_offsets_on_disjoint_children() {
        let r = RegressionCircuit::parse("rgc 1\nvar 1 2\ninp 0 1 0\ninp 1 1 1\nor 2 2 0 1.5 1 -0.5\nout 2\n").unwrap();
        let c = regression_to_circuit(&r).unwrap();
        assert_eq!(evaluate(&c, &[0]).unwrap(), 1.5);
        assert_eq!(evaluate(&c, &[1]).unwrap(), -0.5);
    }

    #[test]
    fn malformed_gates() {
        let shared = "rgc 1\nvar 1 2\ninp 0 1 0\ninp 1 1 1\nand 2 2 0 1\nout 2\n";
        assert!(matches!(RegressionCircuit::parse(shared), Err(Error::InvalidArgument(_))));
        let mixed = "rgc 1\nvar 1 2\nvar 2 2\ninp 0 1 0\ninp 1 2 1\nor 2 2 0 1 1 1\nout 2\n";
        assert!(matches!(RegressionCircuit::parse(mixed), Err(Error::InvalidArgument(_))));
        assert!(matches!(RegressionCircuit::parse("rgc 1\nvar 1 2\nout 0\n"), Err(Error::Parse { .. })));
    }
}
