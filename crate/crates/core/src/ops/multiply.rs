use std::collections::HashMap;

use super::{both, class_of, OpResult};
use crate::circuit::{
    ensure_deterministic, evaluate, group_factors, require_smooth_dec, Builder, Circuit, FactorGroup, FlagState,
    InputTable, LabelPart, PropertyFlags, ScopeSet, UnitKind, VarId,
};
use crate::error::{Error, Result};
use crate::hardness;

#[derive(Debug, Clone, Copy, Default)]
pub struct MultiplyOptions {
    /// When the operands cannot be aligned, enumerate the models of a
    /// deterministic operand instead, visiting at most this many states.
    pub enumerate_fallback: Option<u64>,
}

/// Product of two compatible smooth and decomposable circuits.
pub fn multiply(p: &Circuit, q: &Circuit) -> Result<OpResult> {
    multiply_with(p, q, &MultiplyOptions::default())
}

pub fn multiply_with(p: &Circuit, q: &Circuit, opts: &MultiplyOptions) -> Result<OpResult> {
    require_smooth_dec(p)?;
    require_smooth_dec(q)?;
    let p = checked_det(p);
    let q = checked_det(q);
    let vars = Circuit::merge_vars(p.vars(), q.vars())?;
    let mut m = Mul {
        p: &p,
        q: &q,
        b: Builder::new(vars.clone())?,
        memo: HashMap::new(),
        pimp: Vec::new(),
        qimp: Vec::new(),
        pne: nonempty(&p),
        qne: nonempty(&q),
        hits: 0,
    };
    let root = match m.run(vec![p.output()], vec![q.output()]) {
        Ok(r) => r,
        Err(Error::RearrangementFailure { .. }) if opts.enumerate_fallback.is_some() => {
            return enumerate_product(&p, &q, opts.enumerate_fallback.unwrap());
        }
        Err(e) => return Err(e.cite(hardness::PRODUCT)),
    };
    let hits = m.hits;
    let Some(root) = root else {
        return Ok(OpResult::new(Circuit::zero(vars)?, hits));
    };
    let f = (p.flags(), q.flags());
    let structured = both(f.0.structured, f.1.structured);
    let flags = PropertyFlags {
        deterministic: both(f.0.deterministic, f.1.deterministic),
        structured,
        omni: both(f.0.omni, f.1.omni),
        compat_class: if structured.holds() { class_of(&p, &q) } else { None },
        ..Default::default()
    };
    Ok(OpResult::new(m.b.finish(root, flags)?, hits))
}

/// Confirms a declared determinism claim before its implied labels are used.
fn checked_det(c: &Circuit) -> Circuit {
    if c.flags().deterministic == FlagState::Declared && ensure_deterministic(c).is_err() {
        return c.with_flags(PropertyFlags { deterministic: FlagState::False, ..*c.flags() });
    }
    c.clone()
}

/// Structural non-emptiness of each unit's support.
fn nonempty(c: &Circuit) -> Vec<bool> {
    let mut out = vec![false; c.num_units()];
    for (i, u) in c.units().iter().enumerate() {
        out[i] = match &u.kind {
            UnitKind::Input { table, .. } => !table.is_empty_support(),
            UnitKind::Sum { children, .. } => children.iter().any(|&(k, _)| out[k]),
            UnitKind::Product { children } => children.iter().all(|&k| out[k]),
        };
    }
    out
}

fn certified(c: &Circuit, u: usize) -> bool {
    match &c.unit(u).kind {
        UnitKind::Sum { children, disjoint, .. } => *disjoint || children.len() == 1 || c.flags().deterministic.holds(),
        _ => true,
    }
}

/// A side of a pair: one unit, or several units standing for their product.
type Side = Vec<usize>;

struct Mul<'a> {
    p: &'a Circuit,
    q: &'a Circuit,
    b: Builder,
    memo: HashMap<(Side, Side), Option<usize>>,
    pimp: Vec<Option<usize>>,
    qimp: Vec<Option<usize>>,
    pne: Vec<bool>,
    qne: Vec<bool>,
    hits: usize,
}

fn side_scope(c: &Circuit, s: &[usize]) -> ScopeSet {
    s.iter().fold(ScopeSet::EMPTY, |acc, &u| acc.union(c.unit(u).scope))
}

fn sum_of(c: &Circuit, s: &[usize]) -> Option<usize> {
    (s.len() == 1 && c.unit(s[0]).is_sum()).then_some(s[0])
}

fn factors(c: &Circuit, s: &[usize]) -> Vec<usize> {
    if s.len() > 1 {
        return s.to_vec();
    }
    match &c.unit(s[0]).kind {
        UnitKind::Product { children } => children.clone(),
        _ => s.to_vec(),
    }
}

fn scope_list(c: &Circuit, s: &[usize]) -> String {
    s.iter().map(|&u| c.unit(u).scope.to_string()).collect::<Vec<_>>().join("")
}

impl Mul<'_> {
    fn run(&mut self, ps: Side, qs: Side) -> Result<Option<usize>> {
        let key = (ps, qs);
        if let Some(&r) = self.memo.get(&key) {
            self.hits += 1;
            return Ok(r);
        }
        let r = self.compute(&key.0, &key.1)?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn import_p(&mut self, u: usize) -> Result<usize> {
        self.b.import_effective(self.p, u, &mut self.pimp)
    }

    fn import_q(&mut self, u: usize) -> Result<usize> {
        self.b.import_effective(self.q, u, &mut self.qimp)
    }

    fn compute(&mut self, ps: &[usize], qs: &[usize]) -> Result<Option<usize>> {
        let (p, q) = (self.p, self.q);
        if !ps.iter().all(|&u| self.pne[u]) || !qs.iter().all(|&u| self.qne[u]) {
            return Ok(None);
        }
        if side_scope(p, ps).is_disjoint(side_scope(q, qs)) {
            let mut fac = Vec::with_capacity(ps.len() + qs.len());
            for &u in ps {
                fac.push(self.import_p(u)?);
            }
            for &u in qs {
                fac.push(self.import_q(u)?);
            }
            return Ok(Some(self.b.product(fac)?));
        }
        match (sum_of(p, ps), sum_of(q, qs)) {
            (Some(u), Some(v)) => self.cross(u, v),
            (Some(u), None) => {
                let UnitKind::Sum { children, .. } = &p.unit(u).kind else { unreachable!() };
                let mut kept = Vec::new();
                let mut pos = Vec::new();
                for (i, &(k, w)) in children.iter().enumerate() {
                    if let Some(id) = self.run(vec![k], qs.to_vec())? {
                        kept.push((id, w));
                        pos.push(i);
                    }
                }
                self.emit_sum(kept, mapped_labels(p.effective_labels(u), &pos), certified(p, u))
            }
            (None, Some(v)) => {
                let UnitKind::Sum { children, .. } = &q.unit(v).kind else { unreachable!() };
                let mut kept = Vec::new();
                let mut pos = Vec::new();
                for (j, &(k, w)) in children.iter().enumerate() {
                    if let Some(id) = self.run(ps.to_vec(), vec![k])? {
                        kept.push((id, w));
                        pos.push(j);
                    }
                }
                self.emit_sum(kept, mapped_labels(q.effective_labels(v), &pos), certified(q, v))
            }
            (None, None) => {
                if ps.len() == 1 && qs.len() == 1 {
                    if let (UnitKind::Input { var, table: a }, UnitKind::Input { table: b, .. }) =
                        (&p.unit(ps[0]).kind, &q.unit(qs[0]).kind)
                    {
                        return self.input_product(*var, a, b);
                    }
                }
                self.factor_product(ps, qs)
            }
        }
    }

    fn input_product(&mut self, var: VarId, a: &InputTable, b: &InputTable) -> Result<Option<usize>> {
        let support: Vec<bool> = a.support.iter().zip(&b.support).map(|(x, y)| *x && *y).collect();
        if !support.iter().any(|&m| m) {
            return Ok(None);
        }
        let values =
            a.values.iter().zip(&b.values).zip(&support).map(|((x, y), &m)| if m { x * y } else { 0.0 }).collect();
        Ok(Some(self.b.input(var, InputTable::new(values, support)?)?))
    }

    fn factor_product(&mut self, ps: &[usize], qs: &[usize]) -> Result<Option<usize>> {
        let (p, q) = (self.p, self.q);
        let pf = factors(p, ps);
        let qf = factors(q, qs);
        let groups = group_factors(p, &pf, q, &qf).map_err(|g| Error::RearrangementFailure {
            p_unit: ps[0],
            q_unit: qs[0],
            detail: format!("factor scopes {:?} and {:?} admit no common split", g.p_scopes, g.q_scopes),
            citation: None,
        })?;
        let mut fac = Vec::with_capacity(groups.len());
        for FactorGroup { p: a, q: b } in groups {
            let (a, b) = (a.members(), b.members());
            if b.is_empty() {
                fac.push(self.import_p(a[0])?);
            } else if a.is_empty() {
                fac.push(self.import_q(b[0])?);
            } else if a == ps && b == qs {
                return Err(Error::RearrangementFailure {
                    p_unit: ps[0],
                    q_unit: qs[0],
                    detail: format!("factors {} and {} cannot be refined", scope_list(p, ps), scope_list(q, qs)),
                    citation: None,
                });
            } else {
                match self.run(a, b)? {
                    Some(id) => fac.push(id),
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(self.b.product_or_single(fac)?))
    }

    fn cross(&mut self, u: usize, v: usize) -> Result<Option<usize>> {
        let (p, q) = (self.p, self.q);
        let (UnitKind::Sum { children: pc, .. }, UnitKind::Sum { children: qc, .. }) =
            (&p.unit(u).kind, &q.unit(v).kind)
        else {
            unreachable!()
        };
        let pl = p.effective_labels(u);
        let ql = q.effective_labels(v);
        let shared = pl.iter().find_map(|a| {
            ql.iter()
                .find(|b| {
                    a.origin == b.origin
                        && a.unit == b.unit
                        && (a.scope.is_subset(b.scope) || b.scope.is_subset(a.scope))
                })
                .map(|b| (a.groups.clone(), b.groups.clone()))
        });
        let mut kept = Vec::new();
        let mut pairs = Vec::new();
        for (i, &(ki, wi)) in pc.iter().enumerate() {
            for (j, &(kj, wj)) in qc.iter().enumerate() {
                if let Some((ga, gb)) = &shared {
                    if ga[i] != gb[j] {
                        continue;
                    }
                }
                if let Some(id) = self.run(vec![ki], vec![kj])? {
                    kept.push((id, wi * wj));
                    pairs.push((i, j));
                }
            }
        }
        let mut labels: Vec<LabelPart> = Vec::new();
        for part in &pl {
            push_unique(
                &mut labels,
                LabelPart { groups: pairs.iter().map(|&(i, _)| part.groups[i]).collect(), ..part.clone() },
            );
        }
        for part in &ql {
            push_unique(
                &mut labels,
                LabelPart { groups: pairs.iter().map(|&(_, j)| part.groups[j]).collect(), ..part.clone() },
            );
        }
        self.emit_sum(kept, labels, certified(p, u) && certified(q, v))
    }

    fn emit_sum(&mut self, kept: Vec<(usize, f64)>, labels: Vec<LabelPart>, disjoint: bool) -> Result<Option<usize>> {
        if kept.is_empty() {
            return Ok(None);
        }
        Ok(Some(self.b.sum_with(kept, labels, disjoint)?))
    }
}

fn push_unique(v: &mut Vec<LabelPart>, part: LabelPart) {
    if !v.contains(&part) {
        v.push(part);
    }
}

/// Label parts re-indexed to the kept child positions.
pub(crate) fn mapped_labels(parts: Vec<LabelPart>, pos: &[usize]) -> Vec<LabelPart> {
    parts.into_iter().map(|p| LabelPart { groups: pos.iter().map(|&i| p.groups[i]).collect(), ..p }).collect()
}

/// Product of `p` and `q`, split by the scope grouping of matching factors.
pub fn sort_pairs_by_scope(
    p: &Circuit,
    pu: usize,
    q: &Circuit,
    qu: usize,
    shared: ScopeSet,
) -> Result<Vec<FactorGroup>> {
    let (UnitKind::Product { children: pc }, UnitKind::Product { children: qc }) = (&p.unit(pu).kind, &q.unit(qu).kind)
    else {
        return Err(Error::InvalidArgument("scope pairing takes two product units".into()));
    };
    if p.unit(pu).scope.intersect(shared) != q.unit(qu).scope.intersect(shared) {
        return Err(Error::ScopeError(format!(
            "units cover {} and {} of the shared variables",
            p.unit(pu).scope.intersect(shared),
            q.unit(qu).scope.intersect(shared)
        )));
    }
    group_factors(p, pc, q, qc).map_err(|g| Error::RearrangementFailure {
        p_unit: pu,
        q_unit: qu,
        detail: format!("factor scopes {:?} and {:?} admit no common split", g.p_scopes, g.q_scopes),
        citation: Some(hardness::PRODUCT.to_string()),
    })
}

/// Product built from the models of a deterministic operand: one indicator
/// product per joint state in its support, weighted by p·q at that state.
fn enumerate_product(p: &Circuit, q: &Circuit, budget: u64) -> Result<OpResult> {
    // enumerate whichever deterministic operand has fewer models
    let candidates: Vec<&Circuit> = [q, p].into_iter().filter(|c| ensure_deterministic(c).is_ok()).collect();
    let Some(&d) = candidates.iter().min_by_key(|c| model_count(c)) else {
        return Err(Error::RearrangementFailure {
            p_unit: p.output(),
            q_unit: q.output(),
            detail: "operands are incompatible and neither is deterministic".into(),
            citation: Some(hardness::PRODUCT.to_string()),
        });
    };
    let vars = Circuit::merge_vars(p.vars(), q.vars())?;
    let scope = p.scope().union(q.scope());
    let free: Vec<(VarId, usize)> =
        vars.iter().filter(|v| scope.contains(v.id) && !d.scope().contains(v.id)).map(|v| (v.id, v.card)).collect();
    let free_states: u128 = free.iter().fold(1u128, |a, &(_, c)| a.saturating_mul(c as u128));
    let models = models(d, budget)?;
    let total = (models.len() as u128).saturating_mul(free_states);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { states: total, budget });
    }
    let mut b = Builder::new(vars.clone())?;
    let mut ind: HashMap<(VarId, usize), usize> = HashMap::new();
    let mut terms = Vec::new();
    let pos = |c: &Circuit, x: &HashMap<VarId, usize>| -> Vec<usize> {
        c.vars().iter().map(|v| x.get(&v.id).copied().unwrap_or(0)).collect()
    };
    for m in &models {
        for f in 0..free_states as usize {
            let mut x: HashMap<VarId, usize> = m.iter().copied().collect();
            let mut r = f;
            for &(id, card) in free.iter().rev() {
                x.insert(id, r % card);
                r /= card;
            }
            let w = evaluate(p, &pos(p, &x))? * evaluate(q, &pos(q, &x))?;
            if w == 0.0 {
                continue;
            }
            let mut state: Vec<(VarId, usize)> = x.into_iter().collect();
            state.sort_unstable();
            let mut fac = Vec::with_capacity(state.len());
            for (id, val) in state {
                let u = match ind.get(&(id, val)) {
                    Some(&u) => u,
                    None => {
                        let u = b.input(id, InputTable::indicator(b.card(id).unwrap(), val))?;
                        ind.insert((id, val), u);
                        u
                    }
                };
                fac.push(u);
            }
            terms.push((b.product_or_single(fac)?, w));
        }
    }
    if terms.is_empty() {
        let mut r = OpResult::new(Circuit::zero(vars)?, 0);
        r.stats.enumerated = true;
        return Ok(r);
    }
    let root = b.sum_with(terms, Vec::new(), true)?;
    let flags = PropertyFlags {
        structured: FlagState::Verified,
        deterministic: FlagState::Verified,
        omni: FlagState::Verified,
        ..Default::default()
    };
    let mut r = OpResult::new(b.finish(root, flags)?, 0);
    r.stats.enumerated = true;
    Ok(r)
}

/// Upper bound on the number of joint states in `c`'s structural support.
fn model_count(c: &Circuit) -> u128 {
    let mut n = vec![0u128; c.num_units()];
    for (i, u) in c.units().iter().enumerate() {
        n[i] = match &u.kind {
            UnitKind::Input { table, .. } => table.support.iter().filter(|&&m| m).count() as u128,
            UnitKind::Sum { children, .. } => children.iter().fold(0u128, |a, &(k, _)| a.saturating_add(n[k])),
            UnitKind::Product { children } => children.iter().fold(1u128, |a, &k| a.saturating_mul(n[k])),
        };
    }
    n[c.output()]
}

type Models = Vec<Vec<(VarId, usize)>>;

/// Joint states of `c`'s scope in its structural support.
fn models(c: &Circuit, budget: u64) -> Result<Models> {
    let mut memo: Vec<Option<Models>> = vec![None; c.num_units()];
    for (i, u) in c.units().iter().enumerate() {
        let set = match &u.kind {
            UnitKind::Input { var, table } => {
                table.support.iter().enumerate().filter(|(_, &m)| m).map(|(x, _)| vec![(*var, x)]).collect()
            }
            UnitKind::Sum { children, .. } => {
                let mut all: Vec<Vec<(VarId, usize)>> = Vec::new();
                for &(k, _) in children {
                    all.extend(memo[k].as_ref().unwrap().iter().cloned());
                }
                all.sort_unstable();
                all.dedup();
                all
            }
            UnitKind::Product { children } => {
                let mut acc: Vec<Vec<(VarId, usize)>> = vec![Vec::new()];
                for &k in children {
                    let part = memo[k].as_ref().unwrap();
                    if (acc.len() as u128) * (part.len() as u128) > budget as u128 {
                        return Err(Error::BudgetExceeded {
                            states: (acc.len() as u128) * (part.len() as u128),
                            budget,
                        });
                    }
                    acc = acc
                        .iter()
                        .flat_map(|a| {
                            part.iter().map(move |b| {
                                let mut v = a.clone();
                                v.extend(b.iter().copied());
                                v
                            })
                        })
                        .collect();
                }
                acc
            }
        };
        if set.len() as u128 > budget as u128 {
            return Err(Error::BudgetExceeded { states: set.len() as u128, budget });
        }
        memo[i] = Some(set);
    }
    Ok(memo[c.output()].take().unwrap())
}
