//! Circuit transformations: sums, products, powers, quotients, logarithms,
//! exponentials and the gadget constructors, with closure bookkeeping.

mod log;
mod multiply;
mod power;

pub use log::log_circuit;
pub use multiply::{multiply, multiply_with, sort_pairs_by_scope, MultiplyOptions};
pub use power::{natural_power, quotient, restricted_power};

use crate::circuit::{
    smooth_transform, Builder, Circuit, FlagState, InputTable, PropertyFlags, ScopeSet, UnitKind, VarId, Variable,
};
use crate::error::{Error, Property, Result};
use crate::hardness;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct OpStats {
    pub units: usize,
    pub edges: usize,
    pub cache_hits: usize,
    /// True when a product fell back to enumerating the models of a deterministic operand.
    pub enumerated: bool,
}

#[derive(Debug, Clone)]
pub struct OpResult {
    pub circuit: Circuit,
    pub flags: PropertyFlags,
    pub stats: OpStats,
}

impl OpResult {
    pub(crate) fn new(circuit: Circuit, cache_hits: usize) -> Self {
        let stats = OpStats { units: circuit.num_units(), edges: circuit.num_edges(), cache_hits, enumerated: false };
        OpResult { flags: *circuit.flags(), circuit, stats }
    }
}

fn class_of(p: &Circuit, q: &Circuit) -> Option<u64> {
    match (p.flags().compat_class, q.flags().compat_class) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    }
}

/// Claim that holds when both inputs carry it.
fn both(a: FlagState, b: FlagState) -> FlagState {
    if a.holds() && b.holds() {
        a.and(b)
    } else {
        FlagState::Unknown
    }
}

/// Weighted sum θ1·p + θ2·q over the union of the two scopes.
pub fn sum_circuits(p: &Circuit, q: &Circuit, theta1: f64, theta2: f64) -> Result<OpResult> {
    if !theta1.is_finite() || !theta2.is_finite() {
        return Err(Error::InvalidArgument("sum weights must be finite".into()));
    }
    for c in [p, q] {
        if !c.flags().decomposable.holds() {
            return Err(Error::violation(Property::Decomposable, None, "sum operands must be decomposable"));
        }
    }
    let vars = Circuit::merge_vars(p.vars(), q.vars())?;
    if theta1 == 0.0 && theta2 == 0.0 {
        return Ok(OpResult::new(Circuit::zero(vars)?, 0));
    }
    let ps = smooth_transform(p)?;
    let qs = smooth_transform(q)?;
    let scope = ps.scope().union(qs.scope());
    let mut b = Builder::new(vars)?;
    let pr = pad(&mut b, &ps, scope)?;
    let qr = pad(&mut b, &qs, scope)?;
    let root = b.sum(vec![(pr, theta1), (qr, theta2)])?;
    let class = class_of(p, q);
    let same_scope = p.scope() == q.scope();
    let structured = if class.is_some() && same_scope {
        both(p.flags().structured, q.flags().structured)
    } else {
        FlagState::Unknown
    };
    let flags = PropertyFlags {
        structured,
        compat_class: if structured.holds() { class } else { None },
        omni: both(p.flags().omni, q.flags().omni),
        ..Default::default()
    };
    Ok(OpResult::new(b.finish(root, flags)?, 0))
}

/// Imports `c` and multiplies it by all-ones inputs over the variables of `scope` it misses.
fn pad(b: &mut Builder, c: &Circuit, scope: ScopeSet) -> Result<usize> {
    let mut memo = Vec::new();
    let root = b.import(c, c.output(), &mut memo)?;
    let missing = scope.minus(c.scope());
    if missing.is_empty() {
        return Ok(root);
    }
    let mut fac = vec![root];
    for v in missing.ids() {
        fac.push(b.input(v, InputTable::ones(b.card(v).unwrap()))?);
    }
    b.product(fac)
}

/// exp(θ0 + Σ θi·Xi) as a single product of univariate inputs, the first absorbing θ0.
/// Discrete values enter the linear form through their 0-based index.
pub fn exp_linear(vars: &[Variable], theta0: f64, coeffs: &[(VarId, f64)]) -> Result<OpResult> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("exponential needs at least one coefficient".into()));
    }
    let mut b = Builder::new(vars.to_vec())?;
    let mut seen = ScopeSet::EMPTY;
    let mut fac = Vec::with_capacity(coeffs.len());
    for (k, &(v, t)) in coeffs.iter().enumerate() {
        if seen.contains(v) {
            return Err(Error::InvalidArgument(format!("coefficient for X{v} given twice")));
        }
        seen = seen.union(ScopeSet::single(v));
        let card = b.card(v).ok_or_else(|| Error::InvalidArgument(format!("X{v} is not in the variable table")))?;
        let offset = if k == 0 { theta0 } else { 0.0 };
        let values: Vec<f64> = (0..card).map(|x| (offset + t * x as f64).exp()).collect();
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::DomainError(format!("exponential of the X{v} term leaves the finite positive range")));
        }
        fac.push(b.input(v, InputTable::new(values, vec![true; card])?)?);
    }
    let root = b.product_or_single(fac)?;
    Ok(OpResult::new(b.finish(root, factorized_flags())?, 0))
}

/// exp(f) for an additive circuit f = Σ wᵢ gᵢ(Xᵢ): a weighted sum (or a
/// single term) whose terms are univariate inputs, possibly padded by
/// all-ones inputs. The result is one product of univariate inputs.
pub fn exp_additive(f: &Circuit) -> Result<OpResult> {
    let not_linear = |detail: &str| Error::violation(Property::Linear, None, detail.to_string()).cite(hardness::EXP);
    let root = f.unit(f.output());
    let terms: Vec<(usize, f64)> = match &root.kind {
        UnitKind::Sum { children, .. } => children.clone(),
        _ => vec![(f.output(), 1.0)],
    };
    let mut tables: Vec<(VarId, Vec<f64>)> =
        f.scope().ids().into_iter().map(|v| (v, vec![0.0; f.card(v).unwrap()])).collect();
    for (t, w) in terms {
        let factors = match &f.unit(t).kind {
            UnitKind::Input { .. } => vec![t],
            UnitKind::Product { children } => children.clone(),
            UnitKind::Sum { .. } => return Err(not_linear("a term of the sum is itself a sum")),
        };
        let mut body: Option<(VarId, &InputTable)> = None;
        for k in factors {
            let UnitKind::Input { var, table } = &f.unit(k).kind else {
                return Err(not_linear("a term has a non-input factor"));
            };
            let ones = table.values.iter().all(|&v| v == 1.0);
            if !ones {
                if body.is_some() {
                    return Err(not_linear("a term depends on more than one variable"));
                }
                body = Some((*var, table));
            }
        }
        // a term made only of all-ones factors adds a constant to the first variable
        let (var, values) = match body {
            Some((v, tb)) => (v, tb.values.clone()),
            None => {
                let v = tables.first().map(|t| t.0).ok_or_else(|| not_linear("empty scope"))?;
                (v, vec![1.0; f.card(v).unwrap()])
            }
        };
        let slot = tables.iter_mut().find(|t| t.0 == var).unwrap();
        for (acc, x) in slot.1.iter_mut().zip(values) {
            *acc += w * x;
        }
    }
    let mut b = Builder::new(f.vars().to_vec())?;
    let mut fac = Vec::with_capacity(tables.len());
    for (v, t) in tables {
        let values: Vec<f64> = t.iter().map(|x| x.exp()).collect();
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::DomainError(format!("exponential of the X{v} term leaves the finite positive range")));
        }
        let n = values.len();
        fac.push(b.input(v, InputTable::new(values, vec![true; n])?)?);
    }
    let root = b.product_or_single(fac)?;
    Ok(OpResult::new(b.finish(root, factorized_flags())?, 0))
}

/// Flags of a single product of univariate inputs.
fn factorized_flags() -> PropertyFlags {
    PropertyFlags {
        structured: FlagState::Verified,
        deterministic: FlagState::Verified,
        omni: FlagState::Verified,
        ..Default::default()
    }
}

/// Circuit equal to `c` at every joint state of `vars`.
pub fn uniform_circuit(vars: &[Variable], c: f64) -> Result<Circuit> {
    if vars.is_empty() {
        return Err(Error::InvalidArgument("uniform circuit needs at least one variable".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("uniform constant must be positive, got {c}")));
    }
    let mut b = Builder::new(vars.to_vec())?;
    let ids: Vec<Variable> = b.vars().to_vec();
    let mut fac = Vec::with_capacity(ids.len());
    for (k, v) in ids.iter().enumerate() {
        let table =
            if k == 0 { InputTable::new(vec![c; v.card], vec![true; v.card])? } else { InputTable::ones(v.card) };
        fac.push(b.input(v.id, table)?);
    }
    let root = b.product_or_single(fac)?;
    b.finish(root, factorized_flags())
}
