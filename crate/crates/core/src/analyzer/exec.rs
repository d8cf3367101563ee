//! Executes a pipeline on concrete circuits through the ops module.

use std::collections::HashMap;

use serde::Serialize;

use super::expr::{Op, PipelineExpr};
use crate::circuit::{ensure_deterministic, marginalize, marginalize_labeled, partition, support_circuit, Circuit};
use crate::error::{Error, Result};
use crate::ops::{
    exp_additive, log_circuit, multiply, natural_power, quotient, restricted_power, sum_circuits, OpResult, OpStats,
};
use crate::queries::combine;

#[derive(Debug, Clone)]
pub enum Value {
    Circuit(Circuit),
    Scalar(f64),
}

impl Value {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(v) => Some(*v),
            Value::Circuit(_) => None,
        }
    }

    pub fn circuit(&self) -> Option<&Circuit> {
        match self {
            Value::Circuit(c) => Some(c),
            Value::Scalar(_) => None,
        }
    }
}

/// Size of the result of one executed node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCost {
    pub step: String,
    #[serde(flatten)]
    pub stats: OpStats,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub value: Value,
    /// Values of the root's integrals when the root is a query node.
    pub term_values: Vec<f64>,
    pub steps: Vec<StepCost>,
}

/// Runs `e` bottom-up with each leaf bound to a circuit. Every operation
/// re-checks its own preconditions, whatever the declared flags say.
pub fn execute(e: &PipelineExpr, bindings: &HashMap<String, Circuit>) -> Result<Execution> {
    if e.is_empty() {
        return Err(Error::InvalidArgument("empty pipeline".into()));
    }
    let mut ex = Exec { e, bindings, memo: vec![None; e.len()], steps: Vec::new() };
    let value = ex.run(e.root())?;
    let root = e.node_at(e.root());
    let term_values = if matches!(root.op, Op::Query(_)) {
        root.terms.iter().map(|&t| ex.run(t).map(|v| v.scalar().unwrap_or(f64::NAN))).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(Execution { value, term_values, steps: ex.steps })
}

struct Exec<'a> {
    e: &'a PipelineExpr,
    bindings: &'a HashMap<String, Circuit>,
    memo: Vec<Option<Value>>,
    steps: Vec<StepCost>,
}

impl Exec<'_> {
    fn run(&mut self, id: usize) -> Result<Value> {
        if let Some(v) = &self.memo[id] {
            return Ok(v.clone());
        }
        let v = self.step(id)?;
        self.memo[id] = Some(v.clone());
        Ok(v)
    }

    fn circuit(&mut self, id: usize) -> Result<Circuit> {
        match self.run(id)? {
            Value::Circuit(c) => Ok(c),
            Value::Scalar(_) => Err(Error::Arity(format!("`{}` is scalar where a circuit is needed", self.e.text(id)))),
        }
    }

    fn record(&mut self, id: usize, r: OpResult) -> Value {
        self.steps.push(StepCost { step: self.e.text(id).to_string(), stats: r.stats });
        Value::Circuit(r.circuit)
    }

    fn step(&mut self, id: usize) -> Result<Value> {
        let n = self.e.node_at(id).clone();
        let text = self.e.text(id).to_string();
        Ok(match &n.op {
            Op::Leaf(name) => Value::Circuit(
                self.bindings
                    .get(name)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("no circuit bound to `{name}`")))?,
            ),
            Op::Add(t1, t2) => {
                let (a, b) = (self.circuit(n.args[0])?, self.circuit(n.args[1])?);
                let r = sum_circuits(&a, &b, *t1, *t2)?;
                self.record(id, r)
            }
            Op::Mul => {
                let (a, b) = (self.circuit(n.args[0])?, self.circuit(n.args[1])?);
                let r = multiply(&a, &b)?;
                self.record(id, r)
            }
            Op::Div => {
                let (a, b) = (self.circuit(n.args[0])?, self.circuit(n.args[1])?);
                let r = quotient(&a, &b)?;
                self.record(id, r)
            }
            Op::Pow(alpha) => {
                let a = self.circuit(n.args[0])?;
                let r = if alpha.fract() == 0.0 && *alpha >= 1.0 && *alpha <= u32::MAX as f64 {
                    natural_power(&a, *alpha as u32)?
                } else {
                    restricted_power(&a, *alpha)?
                };
                self.record(id, r)
            }
            Op::Log => {
                let a = self.circuit(n.args[0])?;
                let r = log_circuit(&a)?;
                self.record(id, r)
            }
            Op::Exp => {
                let a = self.circuit(n.args[0])?;
                let r = exp_additive(&a)?;
                self.record(id, r)
            }
            Op::Supp => {
                let a = self.circuit(n.args[0])?;
                let r = support_circuit(&a).map_err(|e| e.cite(crate::hardness::SUPPORT))?;
                self.record(id, OpResult::new(r, 0))
            }
            Op::Marg(vars) => {
                let a = self.circuit(n.args[0])?;
                let labeled = marginalize_labeled(&a, vars).map_err(|e| e.cite(crate::hardness::INTEGRATION))?;
                // labels are only trusted once the marginal passes the determinism check
                let m = if ensure_deterministic(&labeled).is_ok() { labeled } else { marginalize(&a, vars)? };
                self.record(id, OpResult::new(m, 0))
            }
            Op::Integ => {
                let a = self.circuit(n.args[0])?;
                Value::Scalar(partition(&a).map_err(|e| e.cite(crate::hardness::INTEGRATION))?)
            }
            Op::Query(kind) => {
                let mut vals = Vec::with_capacity(n.terms.len());
                for &t in &n.terms {
                    let v = self.run(t).map_err(|e| e.recite(kind.citation()))?;
                    vals.push(v.scalar().ok_or_else(|| Error::Arity(format!("term of `{text}` is not scalar")))?);
                }
                Value::Scalar(combine(kind, &vals)?)
            }
        })
    }
}
