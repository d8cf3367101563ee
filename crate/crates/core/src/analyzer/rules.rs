//! Closure rules for pipeline operations and the bottom-up analysis.

use std::collections::BTreeSet;

use serde::Serialize;

use super::cost::Cost;
use super::expr::{Op, PipelineExpr, PropertyEnv, SymbolFlags};
use crate::circuit::ScopeSet;
use crate::hardness;
use crate::queries::QueryKind;

/// One row of the operation or query rule tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Row {
    pub name: &'static str,
    pub conditions: &'static str,
    pub output: &'static str,
    pub complexity: &'static str,
    pub citation: &'static str,
}

/// Operation rows.
pub const OPERATION_ROWS: &[Row] = &[
    Row { name: "sum", conditions: "(+Cmp)", output: "(+SD)", complexity: "O(|p| + |q|)", citation: hardness::SUM },
    Row {
        name: "product",
        conditions: "Cmp (+Det, +SD)",
        output: "Dec (+Det, +SD)",
        complexity: "O(|p||q|)",
        citation: hardness::PRODUCT,
    },
    Row {
        name: "power (natural)",
        conditions: "SD (+Det)",
        output: "SD (+Det)",
        complexity: "O(|p|^n)",
        citation: hardness::POWER_NATURAL,
    },
    Row {
        name: "power (real)",
        conditions: "Sm, Dec, Det (+SD)",
        output: "Sm, Dec, Det (+SD)",
        complexity: "O(|p|)",
        citation: hardness::POWER_REAL,
    },
    Row {
        name: "quotient",
        conditions: "Cmp; q Det (+p Det, +SD)",
        output: "Dec (+Det, +SD)",
        complexity: "O(|p||q|)",
        citation: hardness::QUOTIENT,
    },
    Row { name: "log", conditions: "Sm, Dec, Det", output: "Sm, Dec", complexity: "O(|p|)", citation: hardness::LOG },
    Row { name: "exp", conditions: "linear", output: "SD", complexity: "O(|p|)", citation: hardness::EXP },
];

/// Query rows.
pub const QUERY_ROWS: &[Row] = &[
    Row {
        name: "cross entropy",
        conditions: "Cmp, q Det",
        output: "scalar",
        complexity: "O(|p||q|)",
        citation: hardness::CROSS_ENTROPY,
    },
    Row {
        name: "Shannon entropy",
        conditions: "Sm, Dec, Det",
        output: "scalar",
        complexity: "O(|p|)",
        citation: hardness::ENTROPY,
    },
    Row {
        name: "Renyi entropy (natural)",
        conditions: "SD",
        output: "scalar",
        complexity: "O(|p|^a)",
        citation: hardness::RENYI_NATURAL,
    },
    Row {
        name: "Renyi entropy (real)",
        conditions: "Sm, Dec, Det",
        output: "scalar",
        complexity: "O(|p|)",
        citation: hardness::RENYI_REAL,
    },
    Row {
        name: "mutual information",
        conditions: "Sm, SD, Det, marginal Det",
        output: "scalar",
        complexity: "O(|p|)",
        citation: hardness::MI,
    },
    Row {
        name: "KL divergence",
        conditions: "Cmp, Det",
        output: "scalar",
        complexity: "O(|p||q|)",
        citation: hardness::KLD,
    },
    Row {
        name: "alpha divergence (natural)",
        conditions: "Cmp, q Det",
        output: "scalar",
        complexity: "O(|p|^a|q|)",
        citation: hardness::ALPHA_NATURAL,
    },
    Row {
        name: "alpha divergence (real)",
        conditions: "Cmp, Det",
        output: "scalar",
        complexity: "O(|p||q|)",
        citation: hardness::ALPHA_REAL,
    },
    Row {
        name: "Itakura-Saito",
        conditions: "Cmp, Det",
        output: "scalar",
        complexity: "O(|p||q|)",
        citation: hardness::IS,
    },
    Row {
        name: "Cauchy-Schwarz",
        conditions: "Cmp",
        output: "scalar",
        complexity: "O(|p||q| + |p|^2 + |q|^2)",
        citation: hardness::CS,
    },
    Row {
        name: "squared loss",
        conditions: "Cmp",
        output: "scalar",
        complexity: "O(|p||q| + |p|^2 + |q|^2)",
        citation: hardness::SL,
    },
];

/// Output of a tractable node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub expr: String,
    pub flags: SymbolFlags,
    pub scalar: bool,
    pub size: Cost,
    pub step_cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub cost: Cost,
    pub nodes: Vec<NodeReport>,
}

/// First unmet condition, found at `expr`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hard {
    pub operation: String,
    pub expr: String,
    pub missing: String,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Plan(Plan),
    Hard(Hard),
}

impl Verdict {
    pub fn is_plan(&self) -> bool {
        matches!(self, Verdict::Plan(_))
    }
}

#[derive(Debug, Clone)]
struct Abs {
    f: SymbolFlags,
    classes: BTreeSet<usize>,
    /// Deterministic symbols whose support partition the node inherits.
    lineage: BTreeSet<String>,
    size: Cost,
    step: Cost,
    scalar: bool,
    /// Row to cite when a later operation needs determinism that was dropped here.
    det_lost: Option<&'static str>,
    symbol: Option<String>,
}

struct Analysis<'a> {
    e: &'a PipelineExpr,
    env: &'a PropertyEnv,
    memo: Vec<Option<Result<Abs, Hard>>>,
    self_class: Vec<String>,
}

/// Propagates the closure rules bottom-up; the first unmet condition yields `Hard`.
pub fn analyze(e: &PipelineExpr, env: &PropertyEnv) -> Verdict {
    if e.is_empty() {
        return Verdict::Hard(Hard {
            operation: "parse".into(),
            expr: String::new(),
            missing: "expression".into(),
            citation: "empty pipeline".into(),
        });
    }
    let mut a = Analysis { e, env, memo: vec![None; e.len()], self_class: env.symbols.keys().cloned().collect() };
    match a.visit(e.root()) {
        Err(h) => Verdict::Hard(h),
        Ok(_) => {
            let mut order = Vec::new();
            let mut seen = vec![false; e.len()];
            post_order(e, e.root(), &mut seen, &mut order);
            let mut cost = Cost::zero();
            let mut nodes = Vec::new();
            for id in order {
                let Some(Ok(abs)) = &a.memo[id] else { continue };
                cost = cost.plus(&abs.step);
                nodes.push(NodeReport {
                    expr: e.text(id).to_string(),
                    flags: abs.f,
                    scalar: abs.scalar,
                    size: abs.size.clone(),
                    step_cost: abs.step.clone(),
                });
            }
            Verdict::Plan(Plan { cost, nodes })
        }
    }
}

fn post_order(e: &PipelineExpr, id: usize, seen: &mut [bool], out: &mut Vec<usize>) {
    if std::mem::replace(&mut seen[id], true) {
        return;
    }
    let n = e.node_at(id);
    for &c in n.args.iter().chain(&n.terms) {
        post_order(e, c, seen, out);
    }
    out.push(id);
}

fn hard(op: &str, expr: &str, missing: &str, citation: &str) -> Hard {
    Hard { operation: op.into(), expr: expr.into(), missing: missing.into(), citation: citation.into() }
}

impl Analysis<'_> {
    fn visit(&mut self, id: usize) -> Result<Abs, Hard> {
        if let Some(r) = &self.memo[id] {
            return r.clone();
        }
        let r = self.rule(id);
        self.memo[id] = Some(r.clone());
        r
    }

    fn leaf(&self, name: &str) -> Abs {
        let f = self.env.flags(name);
        let mut classes: BTreeSet<usize> =
            self.env.classes.iter().enumerate().filter(|(_, c)| c.contains(name)).map(|(i, _)| i).collect();
        if f.sd {
            let k = self.self_class.iter().position(|s| s == name).unwrap_or(0);
            classes.insert(self.env.classes.len() + k);
        }
        Abs {
            f,
            classes,
            lineage: if f.det && f.sm && f.dec { BTreeSet::from([name.to_string()]) } else { BTreeSet::new() },
            size: Cost::size(name),
            step: Cost::zero(),
            scalar: false,
            det_lost: None,
            symbol: Some(name.to_string()),
        }
    }

    fn rule(&mut self, id: usize) -> Result<Abs, Hard> {
        let n = self.e.node_at(id).clone();
        let text = self.e.text(id).to_string();
        let mut args = Vec::with_capacity(n.args.len());
        if !matches!(n.op, Op::Query(_)) {
            for &c in &n.args {
                args.push(self.visit(c)?);
            }
        }
        let need_det = |a: &Abs, op: &str, row: &'static str| -> Result<(), Hard> {
            if a.f.det {
                Ok(())
            } else {
                Err(hard(op, &text, "Det", a.det_lost.unwrap_or(row)))
            }
        };
        let need_smdec = |a: &Abs, op: &str, row: &'static str| -> Result<(), Hard> {
            if a.f.sm && a.f.dec {
                Ok(())
            } else {
                Err(hard(op, &text, "Sm, Dec", row))
            }
        };
        let lost = |xs: &[&Abs]| xs.iter().find_map(|a| a.det_lost);
        let out = match &n.op {
            Op::Leaf(name) => self.leaf(name),
            Op::Add(..) => {
                let (a, b) = (&args[0], &args[1]);
                let shared: BTreeSet<usize> = a.classes.intersection(&b.classes).copied().collect();
                let sd = a.f.sd && b.f.sd && !shared.is_empty();
                let size = a.size.plus(&b.size);
                Abs {
                    f: SymbolFlags {
                        sm: a.f.sm && b.f.sm,
                        dec: a.f.dec && b.f.dec,
                        sd,
                        det: false,
                        omni: a.f.omni && b.f.omni,
                        linear: a.f.linear && b.f.linear,
                    },
                    classes: shared,
                    lineage: BTreeSet::new(),
                    step: size.clone(),
                    size,
                    scalar: false,
                    det_lost: Some(hardness::SUM),
                    symbol: None,
                }
            }
            Op::Mul | Op::Div => {
                let (a, b) = (&args[0], &args[1]);
                let (op, row) = if n.op == Op::Mul { ("mul", hardness::PRODUCT) } else { ("div", hardness::QUOTIENT) };
                if n.op == Op::Div {
                    need_smdec(b, op, row)?;
                    need_det(b, op, row)?;
                }
                let Some((classes, sparse)) = compatible(a, b) else {
                    return Err(hard(op, &text, "Cmp", hardness::PRODUCT));
                };
                let size = if sparse { a.size.plus(&b.size) } else { a.size.times(&b.size) };
                let det = if n.op == Op::Mul { a.f.det && b.f.det } else { a.f.det };
                Abs {
                    f: SymbolFlags {
                        sm: a.f.sm && b.f.sm,
                        dec: true,
                        sd: a.f.sd && b.f.sd,
                        det,
                        omni: a.f.omni && b.f.omni,
                        linear: false,
                    },
                    classes,
                    lineage: a.lineage.union(&b.lineage).cloned().collect(),
                    step: size.clone(),
                    size,
                    scalar: false,
                    det_lost: if det { None } else { lost(&[a, b]) },
                    symbol: None,
                }
            }
            Op::Pow(alpha) => {
                let a = &args[0];
                let natural = alpha.fract() == 0.0 && *alpha >= 1.0;
                let det_path = a.f.det && a.f.sm && a.f.dec;
                if natural && !det_path {
                    if !a.f.sd {
                        return Err(hard("pow", &text, "SD", hardness::POWER_NATURAL));
                    }
                    let size = a.size.pow(*alpha as u32);
                    Abs {
                        step: size.clone(),
                        size,
                        det_lost: a.det_lost,
                        symbol: None,
                        lineage: BTreeSet::new(),
                        ..a.clone()
                    }
                } else {
                    need_smdec(a, "pow", hardness::POWER_REAL)?;
                    need_det(a, "pow", hardness::POWER_REAL)?;
                    Abs { step: a.size.clone(), symbol: None, ..a.clone() }
                }
            }
            Op::Log => {
                let a = &args[0];
                need_smdec(a, "log", hardness::LOG)?;
                need_det(a, "log", hardness::LOG)?;
                Abs {
                    f: SymbolFlags { det: false, omni: false, linear: false, ..a.f },
                    det_lost: None,
                    step: a.size.clone(),
                    symbol: None,
                    ..a.clone()
                }
            }
            Op::Exp => {
                let a = &args[0];
                if !a.f.linear {
                    return Err(hard("exp", &text, "linear", hardness::EXP));
                }
                Abs {
                    f: SymbolFlags { sm: true, dec: true, sd: true, det: false, omni: true, linear: false },
                    classes: BTreeSet::new(),
                    lineage: BTreeSet::new(),
                    step: a.size.clone(),
                    size: a.size.clone(),
                    scalar: false,
                    det_lost: None,
                    symbol: None,
                }
            }
            Op::Supp => {
                let a = &args[0];
                need_smdec(a, "supp", hardness::SUPPORT)?;
                need_det(a, "supp", hardness::SUPPORT)?;
                Abs { f: SymbolFlags { linear: false, ..a.f }, step: a.size.clone(), symbol: None, ..a.clone() }
            }
            Op::Marg(vars) => {
                let a = &args[0];
                need_smdec(a, "marg", hardness::INTEGRATION)?;
                let drop = ScopeSet::from_ids(vars.iter().copied());
                let mdet = a.f.det
                    && a.symbol.as_ref().is_some_and(|s| self.env.mdet.iter().any(|(m, v)| m == s && *v == drop));
                Abs {
                    f: SymbolFlags { det: mdet, linear: false, ..a.f },
                    lineage: if mdet { a.lineage.clone() } else { BTreeSet::new() },
                    det_lost: if mdet { None } else { Some(hardness::MI) },
                    step: a.size.clone(),
                    symbol: None,
                    ..a.clone()
                }
            }
            Op::Integ => {
                let a = &args[0];
                need_smdec(a, "integ", hardness::INTEGRATION)?;
                Abs {
                    f: SymbolFlags::default(),
                    classes: BTreeSet::new(),
                    lineage: BTreeSet::new(),
                    step: a.size.clone(),
                    size: Cost::zero(),
                    scalar: true,
                    det_lost: None,
                    symbol: None,
                }
            }
            Op::Query(kind) => {
                for &t in &n.terms {
                    if let Err(h) = self.visit(t) {
                        return Err(Hard {
                            operation: kind.name().into(),
                            expr: h.expr,
                            missing: h.missing,
                            citation: kind.citation().into(),
                        });
                    }
                }
                if let QueryKind::MutualInformation { .. } = kind {
                    // the structured requirement stands even when every term is tractable
                    let p = self.visit(n.args[0]).map_err(|h| Hard { citation: hardness::MI.into(), ..h })?;
                    if !p.f.sd {
                        return Err(hard("mi", &text, "SD", hardness::MI));
                    }
                }
                Abs {
                    f: SymbolFlags::default(),
                    classes: BTreeSet::new(),
                    lineage: BTreeSet::new(),
                    step: Cost::zero(),
                    size: Cost::zero(),
                    scalar: true,
                    det_lost: None,
                    symbol: None,
                }
            }
        };
        Ok(out)
    }
}

/// Shared classes when `a` and `b` can be multiplied, and whether the product
/// is aligned on a common deterministic support partition (linear size).
fn compatible(a: &Abs, b: &Abs) -> Option<(BTreeSet<usize>, bool)> {
    if !(a.f.sm && a.f.dec && b.f.sm && b.f.dec) {
        return None;
    }
    let nested = (!a.lineage.is_empty() && a.lineage.is_subset(&b.lineage))
        || (!b.lineage.is_empty() && b.lineage.is_subset(&a.lineage));
    let shared: BTreeSet<usize> = a.classes.intersection(&b.classes).copied().collect();
    if !shared.is_empty() {
        return Some((shared, nested));
    }
    if a.f.omni {
        return Some((b.classes.clone(), false));
    }
    if b.f.omni {
        return Some((a.classes.clone(), false));
    }
    if nested {
        let wider = if a.lineage.len() >= b.lineage.len() { a } else { b };
        return Some((wider.classes.clone(), true));
    }
    None
}
