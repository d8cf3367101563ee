use super::{Circuit, InputTable, LabelPart, PropertyFlags, ScopeSet, Unit, UnitKind, VarId, Variable, MAX_VAR_ID};
use crate::error::{Error, Result};

/// Append-only arena used to construct circuits in topological order.
#[derive(Debug, Clone)]
pub struct Builder {
    vars: Vec<Variable>,
    cards: Vec<usize>,
    units: Vec<Unit>,
}

impl Builder {
    pub fn new(mut vars: Vec<Variable>) -> Result<Self> {
        vars.sort_by_key(|v| v.id);
        let mut cards = vec![0usize; MAX_VAR_ID as usize + 1];
        for w in vars.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidArgument(format!("variable X{} declared twice", w[0].id)));
            }
        }
        for v in &vars {
            Variable::new(v.id, v.card)?;
            cards[v.id as usize] = v.card;
        }
        Ok(Builder { vars, cards, units: Vec::new() })
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn scope(&self, id: usize) -> ScopeSet {
        self.units[id].scope
    }

    pub fn unit(&self, id: usize) -> &Unit {
        &self.units[id]
    }

    pub fn card(&self, var: VarId) -> Option<usize> {
        self.cards.get(var as usize).copied().filter(|&c| c != 0)
    }

    pub fn input(&mut self, var: VarId, table: InputTable) -> Result<usize> {
        let card =
            self.card(var).ok_or_else(|| Error::InvalidArgument(format!("input over undeclared variable X{var}")))?;
        if table.card() != card {
            return Err(Error::InvalidArgument(format!(
                "input over X{var} has {} entries, cardinality is {card}",
                table.card()
            )));
        }
        self.units.push(Unit { kind: UnitKind::Input { var, table }, scope: ScopeSet::single(var) });
        Ok(self.units.len() - 1)
    }

    pub fn sum(&mut self, children: Vec<(usize, f64)>) -> Result<usize> {
        self.sum_with(children, Vec::new(), false)
    }

    pub fn sum_with(&mut self, children: Vec<(usize, f64)>, labels: Vec<LabelPart>, disjoint: bool) -> Result<usize> {
        if children.is_empty() {
            return Err(Error::InvalidArgument("sum unit needs at least one child".into()));
        }
        let mut scope = ScopeSet::EMPTY;
        for &(c, w) in &children {
            self.check_child(c)?;
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite weight {w}")));
            }
            scope = scope.union(self.units[c].scope);
        }
        for l in &labels {
            debug_assert_eq!(l.groups.len(), children.len());
        }
        self.units.push(Unit { kind: UnitKind::Sum { children, labels, disjoint }, scope });
        Ok(self.units.len() - 1)
    }

    pub fn product(&mut self, children: Vec<usize>) -> Result<usize> {
        if children.len() < 2 {
            return Err(Error::InvalidArgument("product unit needs at least two children".into()));
        }
        let mut scope = ScopeSet::EMPTY;
        for &c in &children {
            self.check_child(c)?;
            scope = scope.union(self.units[c].scope);
        }
        self.units.push(Unit { kind: UnitKind::Product { children }, scope });
        Ok(self.units.len() - 1)
    }

    /// Product of the given units, or the unit itself when there is only one.
    pub fn product_or_single(&mut self, children: Vec<usize>) -> Result<usize> {
        match children.len() {
            0 => Err(Error::InvalidArgument("empty product".into())),
            1 => Ok(children[0]),
            _ => self.product(children),
        }
    }

    /// Copies the sub-circuit rooted at `u` of `c`, memoized through `memo`.
    pub fn import(&mut self, c: &Circuit, u: usize, memo: &mut Vec<Option<usize>>) -> Result<usize> {
        self.import_impl(c, u, memo, false)
    }

    /// Like [`Builder::import`], but sum units also keep the label part that
    /// `c`'s own determinism implies.
    pub fn import_effective(&mut self, c: &Circuit, u: usize, memo: &mut Vec<Option<usize>>) -> Result<usize> {
        self.import_impl(c, u, memo, true)
    }

    fn import_impl(&mut self, c: &Circuit, u: usize, memo: &mut Vec<Option<usize>>, effective: bool) -> Result<usize> {
        if memo.len() < c.num_units() {
            memo.resize(c.num_units(), None);
        }
        if let Some(id) = memo[u] {
            return Ok(id);
        }
        let id = match &c.unit(u).kind {
            UnitKind::Input { var, table } => self.input(*var, table.clone())?,
            UnitKind::Sum { children, labels, disjoint } => {
                let mut ch = Vec::with_capacity(children.len());
                for &(k, w) in children {
                    ch.push((self.import_impl(c, k, memo, effective)?, w));
                }
                let labels = if effective { c.effective_labels(u) } else { labels.clone() };
                self.sum_with(ch, labels, *disjoint)?
            }
            UnitKind::Product { children } => {
                let mut ch = Vec::with_capacity(children.len());
                for &k in children {
                    ch.push(self.import_impl(c, k, memo, effective)?);
                }
                self.product(ch)?
            }
        };
        memo[u] = Some(id);
        Ok(id)
    }

    fn check_child(&self, c: usize) -> Result<()> {
        if c >= self.units.len() {
            return Err(Error::InvalidArgument(format!("child {c} is not defined yet")));
        }
        Ok(())
    }

    /// Prunes zero-weight edges and unreachable units, renumbers, and freezes the circuit.
    pub fn finish(self, output: usize, flags: PropertyFlags) -> Result<Circuit> {
        if output >= self.units.len() {
            return Err(Error::InvalidArgument(format!("output unit {output} is not defined")));
        }
        let Builder { vars, units, .. } = self;
        let mut units = units;
        for u in units.iter_mut() {
            if let UnitKind::Sum { children, labels, .. } = &mut u.kind {
                if children.iter().any(|&(_, w)| w == 0.0) {
                    let keep: Vec<bool> = children.iter().map(|&(_, w)| w != 0.0).collect();
                    let mut it = keep.iter();
                    children.retain(|_| *it.next().unwrap());
                    for l in labels.iter_mut() {
                        let mut it = keep.iter();
                        l.groups.retain(|_| *it.next().unwrap());
                    }
                    if children.is_empty() {
                        return Err(Error::InvalidArgument("sum unit has only zero weights".into()));
                    }
                }
            }
        }
        let mut reach = vec![false; units.len()];
        reach[output] = true;
        for i in (0..units.len()).rev() {
            if reach[i] {
                for c in units[i].child_ids() {
                    reach[c] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; units.len()];
        let mut kept = Vec::with_capacity(units.len());
        for (i, mut u) in units.into_iter().enumerate() {
            if !reach[i] {
                continue;
            }
            match &mut u.kind {
                UnitKind::Input { .. } => {}
                UnitKind::Sum { children, .. } => {
                    for c in children.iter_mut() {
                        c.0 = remap[c.0];
                    }
                }
                UnitKind::Product { children } => {
                    for c in children.iter_mut() {
                        *c = remap[*c];
                    }
                }
            }
            // recompute scopes so that pruned edges are reflected
            u.scope = match &u.kind {
                UnitKind::Input { var, .. } => ScopeSet::single(*var),
                UnitKind::Sum { children, .. } => {
                    children.iter().fold(ScopeSet::EMPTY, |s, c| s.union(kept_scope(&kept, c.0)))
                }
                UnitKind::Product { children } => {
                    children.iter().fold(ScopeSet::EMPTY, |s, &c| s.union(kept_scope(&kept, c)))
                }
            };
            remap[i] = kept.len();
            kept.push(u);
        }
        Ok(Circuit::assemble(vars, kept, remap[output], flags))
    }
}

fn kept_scope(kept: &[Unit], c: usize) -> ScopeSet {
    kept[c].scope
}
