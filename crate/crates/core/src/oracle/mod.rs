//! Brute-force reference: dense enumeration of circuit functions and
//! direct-summation formulas for every query.

use rayon::prelude::*;

use crate::circuit::{enumeration_budget, Circuit, UnitKind, VarId, Variable};
use crate::error::{Error, Result};

/// States evaluated per parallel chunk.
const CHUNK: usize = 1 << 12;

/// Function values over the joint domain of `vars`, row-major with the
/// smallest variable id most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTable {
    pub vars: Vec<Variable>,
    pub values: Vec<f64>,
}

impl DenseTable {
    pub fn new(vars: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        let n = state_count(&vars).ok_or_else(|| Error::InvalidArgument("domain too large".into()))?;
        if n != values.len() {
            return Err(Error::InvalidArgument(format!("table has {} entries, domain has {n}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("table entries must be finite".into()));
        }
        Ok(DenseTable { vars, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Assignment (aligned with `vars`) of state index `i`.
    pub fn state(&self, i: usize) -> Vec<usize> {
        decode(&self.vars, i)
    }

    pub fn total(&self) -> f64 {
        kahan(self.values.iter().copied())
    }

    /// The same function over a superset of variables, constant in the new ones.
    pub fn extend(&self, vars: &[Variable]) -> Result<DenseTable> {
        let mut all = vars.to_vec();
        all.sort_by_key(|v| v.id);
        let pos: Vec<Option<usize>> = all.iter().map(|v| self.vars.iter().position(|w| w.id == v.id)).collect();
        for v in &self.vars {
            if !all.iter().any(|w| w.id == v.id && w.card == v.card) {
                return Err(Error::InvalidArgument(format!("X{} missing from the extended domain", v.id)));
            }
        }
        let n = state_count(&all).ok_or_else(|| Error::InvalidArgument("domain too large".into()))?;
        let values = (0..n)
            .map(|i| {
                let x = decode(&all, i);
                let mut idx = 0usize;
                for (k, v) in self.vars.iter().enumerate() {
                    let j = pos.iter().position(|p| *p == Some(k)).unwrap();
                    idx = idx * v.card + x[j];
                }
                self.values[idx]
            })
            .collect();
        Ok(DenseTable { vars: all, values })
    }

    /// Sums out the variables in `drop`.
    pub fn marginal(&self, drop: &[VarId]) -> DenseTable {
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&k| !drop.contains(&self.vars[k].id)).collect();
        let vars: Vec<Variable> = keep.iter().map(|&k| self.vars[k]).collect();
        let n = state_count(&vars).unwrap_or(0);
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (i, &v) in self.values.iter().enumerate() {
            let x = decode(&self.vars, i);
            let idx = keep.iter().fold(0usize, |acc, &k| acc * self.vars[k].card + x[k]);
            parts[idx].push(v);
        }
        DenseTable { vars, values: parts.into_iter().map(|p| kahan(p.into_iter())).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTable {
        DenseTable { vars: self.vars.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, o: &DenseTable, f: impl Fn(f64, f64) -> f64) -> Result<DenseTable> {
        same_shape(self, o)?;
        Ok(DenseTable {
            vars: self.vars.clone(),
            values: self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

fn state_count(vars: &[Variable]) -> Option<usize> {
    vars.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.card))
}

fn decode(vars: &[Variable], mut i: usize) -> Vec<usize> {
    let mut x = vec![0usize; vars.len()];
    for k in (0..vars.len()).rev() {
        x[k] = i % vars[k].card;
        i /= vars[k].card;
    }
    x
}

fn same_shape(a: &DenseTable, b: &DenseTable) -> Result<()> {
    if a.vars != b.vars {
        return Err(Error::InvalidArgument("tables are over different variables".into()));
    }
    Ok(())
}

/// Compensated sum in iteration order.
pub fn kahan(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in it {
        let y = v - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// Chunk-parallel compensated sum of `f(i)` over `0..n`, merged in chunk order.
fn par_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let parts: Vec<f64> =
        (0..n.div_ceil(CHUNK)).into_par_iter().map(|c| kahan((c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f))).collect();
    kahan(parts.into_iter())
}

/// Evaluates `c` at every joint state of its variable table.
pub fn dense_table(c: &Circuit, budget: u64) -> Result<DenseTable> {
    let vars = c.vars().to_vec();
    let states = c.state_count(c.table_scope());
    if states > budget as u128 {
        return Err(Error::BudgetExceeded { states, budget });
    }
    let n = states as usize;
    let slot: Vec<usize> = c
        .units()
        .iter()
        .map(|u| match &u.kind {
            UnitKind::Input { var, .. } => vars.iter().position(|v| v.id == *var).unwrap(),
            _ => 0,
        })
        .collect();
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ch| {
            let mut val = vec![0.0f64; c.num_units()];
            (ch * CHUNK..((ch + 1) * CHUNK).min(n))
                .map(|i| {
                    let x = decode(&vars, i);
                    for (k, u) in c.units().iter().enumerate() {
                        val[k] = match &u.kind {
                            UnitKind::Input { table, .. } => table.values[x[slot[k]]],
                            UnitKind::Sum { children, .. } => kahan(children.iter().map(|&(j, w)| w * val[j])),
                            UnitKind::Product { children } => children.iter().fold(1.0, |acc, &j| acc * val[j]),
                        };
                    }
                    val[c.output()]
                })
                .collect()
        })
        .collect();
    Ok(DenseTable { vars, values: chunks.concat() })
}

/// [`dense_table`] with the default budget.
pub fn table(c: &Circuit) -> Result<DenseTable> {
    dense_table(c, enumeration_budget())
}

/// Dense tables of `p` and `q` over the union of their variables.
pub fn joint_tables(p: &Circuit, q: &Circuit) -> Result<(DenseTable, DenseTable)> {
    let vars = Circuit::merge_vars(p.vars(), q.vars())?;
    Ok((table(p)?.extend(&vars)?, table(q)?.extend(&vars)?))
}

/// Queries computed by direct summation over dense tables.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleQuery {
    /// −Σ p ln p over supp(p).
    Entropy,
    /// (1−α)⁻¹ ln Σ p^α over supp(p).
    Renyi(f64),
    /// −Σ p ln q over supp(q).
    CrossEntropy,
    /// Σ p ln(p/q) over supp(p)∩supp(q).
    Kld,
    /// (1−α)⁻¹ ln Σ p^α q^(1−α) over supp(p)∩supp(q).
    Alpha(f64),
    /// Σ [p/q − ln(p/q) − 1] over supp(p)∩supp(q).
    ItakuraSaito,
    /// −ln(Σ pq / √(Σp² Σq²)).
    CauchySchwarz,
    /// Σ (p − q)².
    SquaredLoss,
    /// Σ p ln(p / (p_X p_Y)) over supp(p).
    MutualInformation { x: Vec<VarId>, y: Vec<VarId> },
    /// Σ Πᵢ xᵢ^kᵢ p, divided by Σ p when `normalized`.
    Moment { k: Vec<(VarId, u32)>, normalized: bool },
    /// Σ p f / Σ p.
    Expectation,
}

pub fn oracle_query(kind: &OracleQuery, tables: &[&DenseTable]) -> Result<f64> {
    let need = match kind {
        OracleQuery::Entropy
        | OracleQuery::Renyi(_)
        | OracleQuery::MutualInformation { .. }
        | OracleQuery::Moment { .. } => 1,
        _ => 2,
    };
    if tables.len() != need {
        return Err(Error::InvalidArgument(format!("query takes {need} tables, got {}", tables.len())));
    }
    let p = tables[0];
    if need == 2 {
        same_shape(p, tables[1])?;
    }
    let pv = &p.values;
    let n = pv.len();
    let qv = if need == 2 { &tables[1].values } else { pv };
    Ok(match kind {
        OracleQuery::Entropy => -par_sum(n, |i| if pv[i] != 0.0 { pv[i] * pv[i].ln() } else { 0.0 }),
        OracleQuery::Renyi(a) => {
            if *a == 1.0 {
                return Err(Error::InvalidArgument("order 1 is the Shannon entropy".into()));
            }
            par_sum(n, |i| if pv[i] != 0.0 { pv[i].powf(*a) } else { 0.0 }).ln() / (1.0 - a)
        }
        OracleQuery::CrossEntropy => -par_sum(n, |i| if qv[i] != 0.0 { pv[i] * qv[i].ln() } else { 0.0 }),
        OracleQuery::Kld => {
            par_sum(n, |i| if pv[i] != 0.0 && qv[i] != 0.0 { pv[i] * (pv[i] / qv[i]).ln() } else { 0.0 })
        }
        OracleQuery::Alpha(a) => {
            if *a == 1.0 {
                return Err(Error::InvalidArgument("order 1 is the KL divergence".into()));
            }
            let s =
                par_sum(n, |i| if pv[i] != 0.0 && qv[i] != 0.0 { pv[i].powf(*a) * qv[i].powf(1.0 - a) } else { 0.0 });
            s.ln() / (1.0 - a)
        }
        OracleQuery::ItakuraSaito => par_sum(n, |i| {
            if pv[i] != 0.0 && qv[i] != 0.0 {
                let r = pv[i] / qv[i];
                r - r.ln() - 1.0
            } else {
                0.0
            }
        }),
        OracleQuery::CauchySchwarz => {
            let pq = par_sum(n, |i| pv[i] * qv[i]);
            if pq == 0.0 {
                return Err(Error::DivergenceUndefined("the two functions have disjoint supports".into()));
            }
            let pp = par_sum(n, |i| pv[i] * pv[i]);
            let qq = par_sum(n, |i| qv[i] * qv[i]);
            -(pq / (pp * qq).sqrt()).ln()
        }
        OracleQuery::SquaredLoss => par_sum(n, |i| (pv[i] - qv[i]).powi(2)),
        OracleQuery::MutualInformation { x, y } => {
            let px = p.marginal(y).extend(&p.vars)?;
            let py = p.marginal(x).extend(&p.vars)?;
            par_sum(n, |i| if pv[i] != 0.0 { pv[i] * (pv[i] / (px.values[i] * py.values[i])).ln() } else { 0.0 })
        }
        OracleQuery::Moment { k, normalized } => {
            let pos: Vec<(usize, u32)> = k
                .iter()
                .map(|&(v, d)| {
                    p.vars
                        .iter()
                        .position(|w| w.id == v)
                        .map(|j| (j, d))
                        .ok_or_else(|| Error::InvalidArgument(format!("X{v} not in table")))
                })
                .collect::<Result<_>>()?;
            let m = par_sum(n, |i| {
                let x = decode(&p.vars, i);
                pos.iter().fold(pv[i], |acc, &(j, d)| acc * (x[j] as f64).powi(d as i32))
            });
            if *normalized {
                m / p.total()
            } else {
                m
            }
        }
        OracleQuery::Expectation => par_sum(n, |i| pv[i] * qv[i]) / p.total(),
    })
}

/// True when every pair of children of every sum unit of `c` has disjoint
/// support over the joint domain, by evaluating each child sub-circuit densely.
#[allow(clippy::needless_range_loop)]
pub fn children_disjoint(c: &Circuit) -> Result<bool> {
    let vars = c.vars().to_vec();
    let n = state_count(&vars).ok_or_else(|| Error::InvalidArgument("domain too large".into()))?;
    let mut tables: Vec<Vec<f64>> = vec![vec![0.0; n]; c.num_units()];
    for i in 0..n {
        let x = decode(&vars, i);
        for (k, u) in c.units().iter().enumerate() {
            let v = match &u.kind {
                UnitKind::Input { var, table } => table.values[x[vars.iter().position(|w| w.id == *var).unwrap()]],
                UnitKind::Sum { children, .. } => children.iter().map(|&(j, w)| w * tables[j][i]).sum(),
                UnitKind::Product { children } => children.iter().map(|&j| tables[j][i]).product(),
            };
            tables[k][i] = v;
        }
    }
    for u in c.units() {
        if let UnitKind::Sum { children, .. } = &u.kind {
            if (0..n).any(|i| children.iter().filter(|&&(j, _)| tables[j][i] != 0.0).count() > 1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
