//! Compatibility checking through scope-aligned grouping of product factors.

use std::collections::HashSet;

use super::{require_smooth_dec, Circuit, ScopeSet, UnitKind, Witness};
use crate::error::Result;

/// One side of a matched factor group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PairSide {
    Absent,
    One(usize),
    /// Several factors that jointly face a single factor of the other side.
    Bundle(Vec<usize>),
}

impl PairSide {
    fn from_members(m: Vec<usize>) -> PairSide {
        match m.len() {
            0 => PairSide::Absent,
            1 => PairSide::One(m[0]),
            _ => PairSide::Bundle(m),
        }
    }

    pub fn members(&self) -> Vec<usize> {
        match self {
            PairSide::Absent => Vec::new(),
            PairSide::One(u) => vec![*u],
            PairSide::Bundle(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGroup {
    pub p: PairSide,
    pub q: PairSide,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Compatibility {
    /// `matching` lists the product units of `p` and `q` aligned by the check.
    Compatible {
        matching: Vec<(usize, usize)>,
    },
    Incompatible {
        witness: Witness,
    },
    Unknown {
        p_unit: usize,
        q_unit: usize,
        detail: String,
    },
}

/// Scopes of the factors that could not be split consistently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupConflict {
    pub p_scopes: Vec<Vec<u32>>,
    pub q_scopes: Vec<Vec<u32>>,
}

/// Aligns two factor lists by their shared variables. Factors are linked when
/// their scopes intersect; each connected component becomes one group, which
/// must have a single factor on at least one side.
pub fn group_factors(
    p: &Circuit,
    pf: &[usize],
    q: &Circuit,
    qf: &[usize],
) -> std::result::Result<Vec<FactorGroup>, GroupConflict> {
    let ps: Vec<ScopeSet> = pf.iter().map(|&u| p.unit(u).scope).collect();
    let qs: Vec<ScopeSet> = qf.iter().map(|&u| q.unit(u).scope).collect();
    let n = pf.len();
    // union-find over p factors (0..n) and q factors (n..)
    let mut parent: Vec<usize> = (0..n + qf.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut linked = vec![false; n + qf.len()];
    for i in 0..n {
        for j in 0..qf.len() {
            if !ps[i].is_disjoint(qs[j]) {
                linked[i] = true;
                linked[n + j] = true;
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut index_of_root = std::collections::HashMap::new();
    for i in 0..n + qf.len() {
        if !linked[i] {
            continue;
        }
        let r = find(&mut parent, i);
        let g = *index_of_root.entry(r).or_insert_with(|| {
            groups.push((usize::MAX, Vec::new(), Vec::new()));
            groups.len() - 1
        });
        if i < n {
            groups[g].0 = groups[g].0.min(i);
            groups[g].1.push(pf[i]);
        } else {
            groups[g].2.push(qf[i - n]);
        }
    }
    let mut out = Vec::with_capacity(pf.len() + qf.len());
    groups.sort_by_key(|g| g.0);
    for (_, pm, qm) in groups {
        if pm.len() >= 2 && qm.len() >= 2 {
            let scopes = |c: &Circuit, m: &[usize]| m.iter().map(|&u| c.unit(u).scope.ids()).collect();
            return Err(GroupConflict { p_scopes: scopes(p, &pm), q_scopes: scopes(q, &qm) });
        }
        out.push(FactorGroup { p: PairSide::from_members(pm), q: PairSide::from_members(qm) });
    }
    // factors sharing nothing are zipped in ascending unit id; extras stay unpaired
    let mut pfree: Vec<usize> = (0..n).filter(|&i| !linked[i]).map(|i| pf[i]).collect();
    let mut qfree: Vec<usize> = (0..qf.len()).filter(|&j| !linked[n + j]).map(|j| qf[j]).collect();
    pfree.sort_unstable();
    qfree.sort_unstable();
    for k in 0..pfree.len().max(qfree.len()) {
        let side = |v: &[usize]| v.get(k).map_or(PairSide::Absent, |&u| PairSide::One(u));
        out.push(FactorGroup { p: side(&pfree), q: side(&qfree) });
    }
    Ok(out)
}

/// Checks that `p` and `q` decompose their shared variables the same way,
/// visiting the unit pairs a product of the two would visit.
pub fn check_compatible(p: &Circuit, q: &Circuit) -> Result<Compatibility> {
    require_smooth_dec(p)?;
    require_smooth_dec(q)?;
    let mut walk = Walk { p, q, seen: HashSet::new(), matching: Vec::new() };
    match walk.visit(vec![p.output()], vec![q.output()]) {
        Ok(()) => {
            let mut matching = walk.matching;
            matching.sort_unstable();
            matching.dedup();
            Ok(Compatibility::Compatible { matching })
        }
        Err(c) => Ok(c),
    }
}

struct Walk<'a> {
    p: &'a Circuit,
    q: &'a Circuit,
    seen: HashSet<(Vec<usize>, Vec<usize>)>,
    matching: Vec<(usize, usize)>,
}

impl Walk<'_> {
    fn scope(c: &Circuit, side: &[usize]) -> ScopeSet {
        side.iter().fold(ScopeSet::EMPTY, |s, &u| s.union(c.unit(u).scope))
    }

    /// Factor list of a side: product children, bundle members, or the unit itself.
    fn factors(c: &Circuit, side: &[usize]) -> Vec<usize> {
        if side.len() > 1 {
            return side.to_vec();
        }
        match &c.unit(side[0]).kind {
            UnitKind::Product { children } => children.clone(),
            _ => side.to_vec(),
        }
    }

    fn sum_children(c: &Circuit, side: &[usize]) -> Option<Vec<usize>> {
        if side.len() != 1 {
            return None;
        }
        match &c.unit(side[0]).kind {
            UnitKind::Sum { children, .. } => Some(children.iter().map(|x| x.0).collect()),
            _ => None,
        }
    }

    fn visit(&mut self, ps: Vec<usize>, qs: Vec<usize>) -> std::result::Result<(), Compatibility> {
        if Self::scope(self.p, &ps).is_disjoint(Self::scope(self.q, &qs)) {
            return Ok(());
        }
        if !self.seen.insert((ps.clone(), qs.clone())) {
            return Ok(());
        }
        let psum = Self::sum_children(self.p, &ps);
        let qsum = Self::sum_children(self.q, &qs);
        match (psum, qsum) {
            (Some(a), Some(b)) => {
                for &i in &a {
                    for &j in &b {
                        self.visit(vec![i], vec![j])?;
                    }
                }
                Ok(())
            }
            (Some(a), None) => a.into_iter().try_for_each(|i| self.visit(vec![i], qs.clone())),
            (None, Some(b)) => b.into_iter().try_for_each(|j| self.visit(ps.clone(), vec![j])),
            (None, None) => {
                let p_input = ps.len() == 1 && self.p.unit(ps[0]).is_input();
                let q_input = qs.len() == 1 && self.q.unit(qs[0]).is_input();
                if p_input && q_input {
                    return Ok(());
                }
                let pf = Self::factors(self.p, &ps);
                let qf = Self::factors(self.q, &qs);
                let p_unit = ps[0];
                let q_unit = qs[0];
                if ps.len() == 1 && qs.len() == 1 && !p_input && !q_input {
                    self.matching.push((p_unit, q_unit));
                }
                let groups = group_factors(self.p, &pf, self.q, &qf).map_err(|g| Compatibility::Incompatible {
                    witness: Witness::ScopePair { p_unit, q_unit, p_scopes: g.p_scopes, q_scopes: g.q_scopes },
                })?;
                for g in groups {
                    let (a, b) = (g.p.members(), g.q.members());
                    if a.is_empty() || b.is_empty() {
                        continue;
                    }
                    if a == ps && b == qs {
                        return Err(Compatibility::Unknown {
                            p_unit,
                            q_unit,
                            detail: "factor grouping made no progress".into(),
                        });
                    }
                    self.visit(a, b)?;
                }
                Ok(())
            }
        }
    }
}
