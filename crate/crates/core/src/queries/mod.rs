//! Information-theoretic and expectation queries, each run as a pipeline of
//! circuit operations followed by integration.

use std::collections::HashMap;

use serde::Serialize;

use crate::analyzer::{execute, Op, PipelineExpr, StepCost, OPERATION_ROWS, QUERY_ROWS};
use crate::circuit::{
    check_property, require_pc, Builder, Circuit, FlagState, InputTable, PropertyCheck, PropertyFlags, ScopeSet, VarId,
    Which,
};
use crate::error::{Error, Property, Result};
use crate::hardness;
use crate::oracle::dense_table;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum QueryKind {
    Entropy,
    CrossEntropy,
    Kld,
    Renyi(f64),
    Alpha(f64),
    ItakuraSaito,
    CauchySchwarz,
    SquaredLoss,
    MutualInformation {
        x: Vec<VarId>,
        y: Vec<VarId>,
    },
    /// ∫ p f / ∫ p
    Expectation,
}

fn is_natural(a: f64) -> bool {
    a.fract() == 0.0 && a >= 1.0
}

impl QueryKind {
    pub fn name(&self) -> &'static str {
        match self {
            QueryKind::Entropy => "entropy",
            QueryKind::CrossEntropy => "xent",
            QueryKind::Kld => "kld",
            QueryKind::Renyi(_) => "renyi",
            QueryKind::Alpha(_) => "alpha",
            QueryKind::ItakuraSaito => "is",
            QueryKind::CauchySchwarz => "cs",
            QueryKind::SquaredLoss => "sl",
            QueryKind::MutualInformation { .. } => "mi",
            QueryKind::Expectation => "expect",
        }
    }

    pub fn citation(&self) -> &'static str {
        match self {
            QueryKind::Entropy => hardness::ENTROPY,
            QueryKind::CrossEntropy => hardness::CROSS_ENTROPY,
            QueryKind::Kld => hardness::KLD,
            QueryKind::Renyi(a) if is_natural(*a) => hardness::RENYI_NATURAL,
            QueryKind::Renyi(_) => hardness::RENYI_REAL,
            QueryKind::Alpha(a) if is_natural(*a) => hardness::ALPHA_NATURAL,
            QueryKind::Alpha(_) => hardness::ALPHA_REAL,
            QueryKind::ItakuraSaito => hardness::IS,
            QueryKind::CauchySchwarz => hardness::CS,
            QueryKind::SquaredLoss => hardness::SL,
            QueryKind::MutualInformation { .. } => hardness::MI,
            QueryKind::Expectation => hardness::PRODUCT,
        }
    }

    /// Condition row the query relies on, as "row: conditions".
    pub fn conditions(&self) -> String {
        let cite = self.citation();
        QUERY_ROWS
            .iter()
            .chain(OPERATION_ROWS)
            .find(|r| r.citation == cite)
            .map(|r| match self {
                QueryKind::Expectation => "expectation: Sm, Dec, f Cmp or omni".to_string(),
                _ => format!("{}: {}", r.name, r.conditions),
            })
            .unwrap_or_default()
    }
}

/// Appends the integrals of a query node to `e` and returns their ids.
pub fn expand(e: &mut PipelineExpr, kind: &QueryKind, args: &[usize]) -> Vec<usize> {
    let p = args[0];
    let q = args.get(1).copied().unwrap_or(p);
    let integ = |e: &mut PipelineExpr, id| e.node(Op::Integ, vec![id]);
    match kind {
        QueryKind::Entropy => {
            let lp = e.node(Op::Log, vec![p]);
            let m = e.node(Op::Mul, vec![p, lp]);
            vec![integ(e, m)]
        }
        QueryKind::CrossEntropy => {
            let lq = e.node(Op::Log, vec![q]);
            let m = e.node(Op::Mul, vec![p, lq]);
            vec![integ(e, m)]
        }
        QueryKind::Kld => {
            let sq = e.node(Op::Supp, vec![q]);
            let pq = e.node(Op::Mul, vec![p, sq]);
            let lp = e.node(Op::Log, vec![p]);
            let a = e.node(Op::Mul, vec![pq, lp]);
            let lq = e.node(Op::Log, vec![q]);
            let b = e.node(Op::Mul, vec![p, lq]);
            vec![integ(e, a), integ(e, b)]
        }
        QueryKind::Renyi(a) => {
            let pw = e.node(Op::Pow(*a), vec![p]);
            vec![integ(e, pw)]
        }
        QueryKind::Alpha(a) => {
            let pa = e.node(Op::Pow(*a), vec![p]);
            let qa = e.node(Op::Pow(1.0 - a), vec![q]);
            let m = e.node(Op::Mul, vec![pa, qa]);
            vec![integ(e, m)]
        }
        QueryKind::ItakuraSaito => {
            let d = e.node(Op::Div, vec![p, q]);
            let ld = e.node(Op::Log, vec![d]);
            let sp = e.node(Op::Supp, vec![p]);
            let sq = e.node(Op::Supp, vec![q]);
            let s = e.node(Op::Mul, vec![sp, sq]);
            vec![integ(e, d), integ(e, ld), integ(e, s)]
        }
        QueryKind::CauchySchwarz | QueryKind::SquaredLoss => {
            let pq = e.node(Op::Mul, vec![p, q]);
            let p2 = e.node(Op::Pow(2.0), vec![p]);
            let q2 = e.node(Op::Pow(2.0), vec![q]);
            vec![integ(e, pq), integ(e, p2), integ(e, q2)]
        }
        QueryKind::MutualInformation { x, y } => {
            let lp = e.node(Op::Log, vec![p]);
            let a = e.node(Op::Mul, vec![p, lp]);
            let px = e.node(Op::Marg(y.clone()), vec![p]);
            let lx = e.node(Op::Log, vec![px]);
            let b = e.node(Op::Mul, vec![p, lx]);
            let py = e.node(Op::Marg(x.clone()), vec![p]);
            let ly = e.node(Op::Log, vec![py]);
            let c = e.node(Op::Mul, vec![p, ly]);
            vec![integ(e, a), integ(e, b), integ(e, c)]
        }
        QueryKind::Expectation => {
            let m = e.node(Op::Mul, vec![p, q]);
            vec![integ(e, m), integ(e, p)]
        }
    }
}

/// Query value from the values of its integrals, in the order of [`expand`].
pub fn combine(kind: &QueryKind, t: &[f64]) -> Result<f64> {
    let undefined = |what: &str| Error::DivergenceUndefined(format!("{what} integrates to zero"));
    Ok(match kind {
        QueryKind::Entropy | QueryKind::CrossEntropy => -t[0],
        QueryKind::Kld => t[0] - t[1],
        QueryKind::Renyi(a) => {
            if t[0] == 0.0 {
                return Err(undefined("the power"));
            }
            t[0].ln() / (1.0 - a)
        }
        QueryKind::Alpha(a) => {
            if t[0] == 0.0 {
                return Err(undefined("the product of powers"));
            }
            t[0].ln() / (1.0 - a)
        }
        QueryKind::ItakuraSaito | QueryKind::MutualInformation { .. } => t[0] - t[1] - t[2],
        QueryKind::CauchySchwarz => {
            if t[0] == 0.0 {
                return Err(undefined("the product"));
            }
            -(t[0] / (t[1] * t[2]).sqrt()).ln()
        }
        QueryKind::SquaredLoss => t[1] + t[2] - 2.0 * t[0],
        QueryKind::Expectation => {
            if t[1] == 0.0 {
                return Err(Error::DomainError("expectation under a circuit with zero partition function".into()));
            }
            t[0] / t[1]
        }
    })
}

/// Result of a query together with the pipeline that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct QueryReport {
    pub query: String,
    /// Nats for logarithmic quantities.
    pub value: f64,
    /// Re-executable with `p`, `q` or `f` bound to the inputs.
    pub plan: PipelineExpr,
    pub terms: Vec<String>,
    pub term_values: Vec<f64>,
    pub cost: Vec<StepCost>,
    pub conditions_used: String,
}

fn run(kind: QueryKind, inputs: &[(&str, &Circuit)], conditions: String) -> Result<QueryReport> {
    let mut e = PipelineExpr::new();
    let args: Vec<usize> = inputs.iter().map(|(n, _)| e.leaf(n)).collect();
    let root = e.node(Op::Query(kind.clone()), args);
    e.set_root(root);
    let bindings: HashMap<String, Circuit> = inputs.iter().map(|(n, c)| (n.to_string(), (*c).clone())).collect();
    let x = execute(&e, &bindings)?;
    let terms = e.node_at(root).terms.iter().map(|&t| e.text(t).to_string()).collect();
    Ok(QueryReport {
        query: kind.name().to_string(),
        value: x.value.scalar().unwrap_or(f64::NAN),
        plan: e,
        terms,
        term_values: x.term_values,
        cost: x.steps,
        conditions_used: conditions,
    })
}

fn query(kind: QueryKind, inputs: &[(&str, &Circuit)], pc: bool) -> Result<QueryReport> {
    if pc {
        for (_, c) in inputs {
            require_pc(c).map_err(|e| e.cite(kind.citation()))?;
        }
    }
    let cond = kind.conditions();
    run(kind, inputs, cond)
}

/// −∫ p log p.
pub fn shannon_entropy(p: &Circuit) -> Result<QueryReport> {
    query(QueryKind::Entropy, &[("p", p)], true)
}

/// (1−α)⁻¹ log ∫ p^α, through the natural power for integer α and the
/// restricted power otherwise.
pub fn renyi_entropy(p: &Circuit, alpha: f64) -> Result<QueryReport> {
    if alpha == 1.0 {
        return Err(Error::InvalidArgument("order 1 is the Shannon entropy; use shannon_entropy".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("Renyi order must be positive and finite, got {alpha}")));
    }
    query(QueryKind::Renyi(alpha), &[("p", p)], true)
}

/// −∫ p log q over the support of q.
pub fn cross_entropy(p: &Circuit, q: &Circuit) -> Result<QueryReport> {
    query(QueryKind::CrossEntropy, &[("p", p), ("q", q)], true)
}

/// ∫ p log(p/q) over the intersection of the supports.
pub fn kld(p: &Circuit, q: &Circuit) -> Result<QueryReport> {
    query(QueryKind::Kld, &[("p", p), ("q", q)], true)
}

/// (1−α)⁻¹ log ∫ p^α q^(1−α) over the intersection of the supports.
pub fn alpha_divergence(p: &Circuit, q: &Circuit, alpha: f64) -> Result<QueryReport> {
    if alpha == 1.0 {
        return Err(Error::InvalidArgument("order 1 is the KL divergence; use kld".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("order must be finite, got {alpha}")));
    }
    query(QueryKind::Alpha(alpha), &[("p", p), ("q", q)], true)
}

/// ∫ [p/q − log(p/q) − 1] over the intersection of the supports.
pub fn itakura_saito(p: &Circuit, q: &Circuit) -> Result<QueryReport> {
    query(QueryKind::ItakuraSaito, &[("p", p), ("q", q)], true)
}

/// −log(∫pq / √(∫p² ∫q²)).
pub fn cauchy_schwarz(p: &Circuit, q: &Circuit) -> Result<QueryReport> {
    query(QueryKind::CauchySchwarz, &[("p", p), ("q", q)], true)
}

/// ∫ (p − q)².
pub fn squared_loss(p: &Circuit, q: &Circuit) -> Result<QueryReport> {
    query(QueryKind::SquaredLoss, &[("p", p), ("q", q)], false)
}

/// ∫ p log(p / (p_X p_Y)) where X and Y partition the scope of p.
pub fn mutual_information(p: &Circuit, x: &[VarId], y: &[VarId]) -> Result<QueryReport> {
    let xs = ScopeSet::from_ids(x.iter().copied());
    let ys = ScopeSet::from_ids(y.iter().copied());
    if x.is_empty() || y.is_empty() || !xs.is_disjoint(ys) || xs.union(ys) != p.scope() {
        return Err(Error::InvalidArgument(format!("{xs} and {ys} do not partition the scope {}", p.scope())));
    }
    let structured = match p.flags().structured {
        FlagState::Verified | FlagState::Declared => true,
        FlagState::False => false,
        FlagState::Unknown => matches!(check_property(p, Which::Structured), Ok(PropertyCheck::Verified)),
    };
    if !structured {
        return Err(Error::violation(
            Property::Structured,
            None,
            "mutual information needs a structured-decomposable circuit",
        )
        .cite(hardness::MI));
    }
    query(QueryKind::MutualInformation { x: xs.ids(), y: ys.ids() }, &[("p", p)], true)
}

/// Fully factorized circuit over the scope of `p` computing Πᵢ xᵢ^kᵢ.
pub fn monomial(p: &Circuit, k: &[(VarId, u32)]) -> Result<Circuit> {
    for &(v, _) in k {
        if !p.scope().contains(v) {
            return Err(Error::ScopeError(format!("X{v} is not in the scope {}", p.scope())));
        }
    }
    let mut b = Builder::new(p.vars().to_vec())?;
    let mut fac = Vec::new();
    for v in p.scope().ids() {
        let card = p.card(v).unwrap();
        let deg: u32 = k.iter().filter(|e| e.0 == v).map(|e| e.1).sum();
        let values: Vec<f64> = (0..card).map(|x| (x as f64).powi(deg as i32)).collect();
        let support = values.iter().map(|&x| x != 0.0).collect();
        fac.push(b.input(v, InputTable::new(values, support)?)?);
    }
    let root = b.product_or_single(fac)?;
    let flags = PropertyFlags {
        structured: FlagState::Verified,
        deterministic: FlagState::Verified,
        omni: FlagState::Verified,
        ..Default::default()
    };
    b.finish(root, flags)
}

/// ∫ Πᵢ xᵢ^kᵢ p(x), divided by ∫ p when `normalized`. Values enter through their index.
pub fn moment(p: &Circuit, k: &[(VarId, u32)], normalized: bool) -> Result<QueryReport> {
    let m = monomial(p, k)?;
    let cond = "moment: Sm, Dec".to_string();
    if normalized {
        return run(QueryKind::Expectation, &[("p", p), ("m", &m)], cond);
    }
    let mut e = PipelineExpr::new();
    let (lp, lm) = (e.leaf("p"), e.leaf("m"));
    let prod = e.node(Op::Mul, vec![lp, lm]);
    let root = e.node(Op::Integ, vec![prod]);
    e.set_root(root);
    let bindings = HashMap::from([("p".to_string(), p.clone()), ("m".to_string(), m)]);
    let x = execute(&e, &bindings)?;
    let v = x.value.scalar().unwrap_or(f64::NAN);
    Ok(QueryReport {
        query: "moment".into(),
        value: v,
        terms: vec![e.text(root).to_string()],
        term_values: vec![v],
        plan: e,
        cost: x.steps,
        conditions_used: cond,
    })
}

/// Probability under p of the 0/1-valued circuit f, normalized by ∫ p.
/// The 0/1 semantics of f are checked by enumeration when its domain fits the budget.
pub fn formula_probability(p: &Circuit, f: &Circuit) -> Result<QueryReport> {
    match dense_table(f, crate::circuit::enumeration_budget()) {
        Ok(t) => {
            if let Some(v) = t.values.iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidArgument(format!("formula circuit takes the value {v}, expected 0 or 1")));
            }
        }
        Err(Error::BudgetExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    run(QueryKind::Expectation, &[("p", p), ("f", f)], "formula probability: Sm, Dec, Cmp".into())
}

/// E_{x∼p}[f(x)] for a forest or regression-circuit translation f.
pub fn expected_prediction(p: &Circuit, f: &Circuit) -> Result<QueryReport> {
    run(QueryKind::Expectation, &[("p", p), ("f", f)], QueryKind::Expectation.conditions())
}
