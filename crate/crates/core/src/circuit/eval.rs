//! Feedforward evaluation, tractable integration and marginalization.

use super::{check, Builder, Circuit, InputTable, LabelPart, PropertyFlags, ScopeSet, UnitKind, VarId};
use crate::error::{Error, Property, Result};

/// Value of `c` at a complete assignment `x` (aligned with `c.vars()`).
pub fn evaluate(c: &Circuit, x: &[usize]) -> Result<f64> {
    validate_assignment(c, x)?;
    let mut val = vec![0.0f64; c.num_units()];
    for (i, u) in c.units().iter().enumerate() {
        val[i] = match &u.kind {
            UnitKind::Input { var, table } => table.values[x[c.var_index(*var).unwrap()]],
            UnitKind::Sum { children, .. } => children.iter().map(|&(k, w)| w * val[k]).sum(),
            UnitKind::Product { children } => children.iter().map(|&k| val[k]).product(),
        };
    }
    Ok(val[c.output()])
}

fn validate_assignment(c: &Circuit, x: &[usize]) -> Result<()> {
    if x.len() != c.vars().len() {
        return Err(Error::InvalidAssignment(format!("expected {} values, got {}", c.vars().len(), x.len())));
    }
    for (v, &xi) in c.vars().iter().zip(x) {
        if xi >= v.card {
            return Err(Error::InvalidAssignment(format!("X{} = {xi} outside 0..{}", v.id, v.card)));
        }
    }
    Ok(())
}

pub(crate) fn require_smooth_dec(c: &Circuit) -> Result<()> {
    if !c.flags().smooth.holds() {
        let unit = check::first_smoothness_violation(c.units());
        return Err(Error::violation(
            Property::Smooth,
            unit,
            format!("sum unit {} has children with different scopes", unit.unwrap_or(0)),
        ));
    }
    if !c.flags().decomposable.holds() {
        let unit = check::first_decomposability_violation(c.units());
        return Err(Error::violation(
            Property::Decomposable,
            unit,
            format!("product unit {} has overlapping children", unit.unwrap_or(0)),
        ));
    }
    Ok(())
}

/// Integral of `c` over every variable not fixed by `evidence` (aligned with
/// `c.vars()`), including table variables outside the root scope.
pub fn integrate(c: &Circuit, evidence: &[Option<usize>]) -> Result<f64> {
    require_smooth_dec(c)?;
    if evidence.len() != c.vars().len() {
        return Err(Error::InvalidAssignment(format!(
            "evidence has {} entries, circuit has {} variables",
            evidence.len(),
            c.vars().len()
        )));
    }
    for (v, e) in c.vars().iter().zip(evidence) {
        if let Some(xi) = e {
            if *xi >= v.card {
                return Err(Error::InvalidAssignment(format!("X{} = {xi} outside 0..{}", v.id, v.card)));
            }
        }
    }
    let mut val = vec![0.0f64; c.num_units()];
    for (i, u) in c.units().iter().enumerate() {
        val[i] = match &u.kind {
            UnitKind::Input { var, table } => match evidence[c.var_index(*var).unwrap()] {
                Some(xi) => table.values[xi],
                None => table.total(),
            },
            UnitKind::Sum { children, .. } => children.iter().map(|&(k, w)| w * val[k]).sum(),
            UnitKind::Product { children } => children.iter().map(|&k| val[k]).product(),
        };
    }
    let root = c.scope();
    let outside: f64 = c
        .vars()
        .iter()
        .zip(evidence)
        .filter(|(v, e)| e.is_none() && !root.contains(v.id))
        .map(|(v, _)| v.card as f64)
        .product();
    Ok(val[c.output()] * outside)
}

/// Partition function: integral with no evidence.
pub(crate) fn partition(c: &Circuit) -> Result<f64> {
    integrate(c, &vec![None; c.vars().len()])
}

#[derive(Clone, Copy)]
enum Marg {
    Const(f64),
    Node(usize, f64),
}

/// Circuit over the remaining variables computing the integral of `c` over `drop`.
pub fn marginalize(c: &Circuit, drop: &[VarId]) -> Result<Circuit> {
    marginalize_impl(c, drop, false)
}

/// Like [`marginalize`], and also carries `c`'s label parts restricted to the
/// remaining variables. Only sound once the result is known to be deterministic.
pub(crate) fn marginalize_labeled(c: &Circuit, drop: &[VarId]) -> Result<Circuit> {
    marginalize_impl(c, drop, true)
}

fn marginalize_impl(c: &Circuit, drop: &[VarId], labeled: bool) -> Result<Circuit> {
    require_smooth_dec(c)?;
    let drop_set = ScopeSet::from_ids(drop.iter().copied());
    if !drop_set.is_subset(c.scope()) {
        return Err(Error::ScopeError(format!(
            "cannot marginalize {} out of a circuit with scope {}",
            drop_set.minus(c.scope()),
            c.scope()
        )));
    }
    let remaining: Vec<_> = c.vars().iter().copied().filter(|v| !drop_set.contains(v.id)).collect();
    let carrier = if c.scope().is_subset(drop_set) { drop_set.ids().first().copied() } else { None };
    let mut table_vars = remaining.clone();
    if let Some(id) = carrier {
        table_vars.push(*c.vars().iter().find(|v| v.id == id).unwrap());
    }
    let mut b = Builder::new(table_vars)?;
    let mut res: Vec<Marg> = Vec::with_capacity(c.num_units());
    for (i, u) in c.units().iter().enumerate() {
        let r = match &u.kind {
            UnitKind::Input { var, table } => {
                if drop_set.contains(*var) {
                    Marg::Const(table.total())
                } else {
                    Marg::Node(b.input(*var, table.clone())?, 1.0)
                }
            }
            UnitKind::Sum { children, .. } => {
                let mut consts = 0.0;
                let mut all_const = true;
                let mut kept = Vec::new();
                let mut kept_pos = Vec::new();
                for (pos, &(k, w)) in children.iter().enumerate() {
                    match res[k] {
                        Marg::Const(v) => consts += w * v,
                        Marg::Node(id, s) => {
                            all_const = false;
                            if w * s != 0.0 {
                                kept.push((id, w * s));
                                kept_pos.push(pos);
                            }
                        }
                    }
                }
                if all_const {
                    Marg::Const(consts)
                } else if kept.is_empty() {
                    Marg::Const(0.0)
                } else {
                    let labels = if labeled { restricted_labels(c, i, &kept_pos, drop_set) } else { Vec::new() };
                    Marg::Node(b.sum_with(kept, labels, false)?, 1.0)
                }
            }
            UnitKind::Product { children } => {
                let mut factor = 1.0;
                let mut nodes = Vec::new();
                for &k in children {
                    match res[k] {
                        Marg::Const(v) => factor *= v,
                        Marg::Node(id, s) => {
                            factor *= s;
                            nodes.push(id);
                        }
                    }
                }
                if factor == 0.0 {
                    Marg::Const(0.0)
                } else if nodes.is_empty() {
                    Marg::Const(factor)
                } else {
                    Marg::Node(b.product_or_single(nodes)?, factor)
                }
            }
        };
        res.push(r);
    }
    let out = match res[c.output()] {
        Marg::Const(k) => {
            // a zero factor can collapse the root before every variable is dropped
            let id = carrier
                .or_else(|| b.vars().first().map(|v| v.id))
                .ok_or_else(|| Error::InvalidArgument("marginal has no variable to carry its constant".into()))?;
            let card = b.card(id).unwrap();
            let table =
                if k == 0.0 { InputTable::zero(card) } else { InputTable::new(vec![k; card], vec![true; card])? };
            b.input(id, table)?
        }
        Marg::Node(id, 1.0) => id,
        Marg::Node(id, s) => b.sum(vec![(id, s)])?,
    };
    let flags = PropertyFlags { compat_class: c.flags().compat_class, ..Default::default() };
    b.finish(out, flags)
}

fn restricted_labels(c: &Circuit, u: usize, kept_pos: &[usize], drop: ScopeSet) -> Vec<LabelPart> {
    c.effective_labels(u)
        .into_iter()
        .filter_map(|p| {
            let scope = p.scope.minus(drop);
            if scope.is_empty() {
                return None;
            }
            Some(LabelPart {
                origin: p.origin,
                unit: p.unit,
                scope,
                groups: kept_pos.iter().map(|&k| p.groups[k]).collect(),
            })
        })
        .collect()
}
