//! Circuit representation: variables, scopes, units, flags, and the
//! immutable [`Circuit`] DAG together with its core algorithms.

mod builder;
mod check;
mod compat;
mod eval;
pub(crate) mod text;
mod transform;

pub use builder::Builder;
pub(crate) use check::require_pc;
pub use check::{check_property, check_property_with_budget, ensure_deterministic, PropertyCheck, Which, Witness};
pub use compat::{check_compatible, group_factors, Compatibility, FactorGroup, PairSide};
pub use eval::{evaluate, integrate, marginalize};
pub(crate) use eval::{marginalize_labeled, partition, require_smooth_dec};
pub use text::{load, parse, save, to_text};
pub(crate) use transform::det_preserving_flags;
pub use transform::{smooth_transform, support_circuit};

use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub type VarId = u32;

/// Largest variable id representable in a [`ScopeSet`].
pub const MAX_VAR_ID: VarId = 128;

/// Default number of joint states the exhaustive checkers may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Enumeration budget, overridable through the `PCQ_BUDGET` environment variable.
pub fn enumeration_budget() -> u64 {
    static BUDGET: OnceLock<u64> = OnceLock::new();
    *BUDGET
        .get_or_init(|| std::env::var("PCQ_BUDGET").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub card: usize,
}

impl Variable {
    pub fn new(id: VarId, card: usize) -> Result<Self> {
        if id == 0 || id > MAX_VAR_ID {
            return Err(Error::InvalidArgument(format!("variable id {id} outside 1..={MAX_VAR_ID}")));
        }
        if card < 2 {
            return Err(Error::InvalidArgument(format!("variable {id} has cardinality {card} < 2")));
        }
        Ok(Variable { id, card })
    }

    pub fn binary(id: VarId) -> Self {
        Variable { id, card: 2 }
    }
}

/// Set of variable ids stored as a bitmask (bit `id - 1`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopeSet(u128);

impl serde::Serialize for ScopeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.ids())
    }
}

impl ScopeSet {
    pub const EMPTY: ScopeSet = ScopeSet(0);

    pub fn single(id: VarId) -> Self {
        debug_assert!((1..=MAX_VAR_ID).contains(&id));
        ScopeSet(1u128 << (id - 1))
    }

    pub fn from_ids<I: IntoIterator<Item = VarId>>(ids: I) -> Self {
        ids.into_iter().fold(ScopeSet::EMPTY, |s, id| s.union(ScopeSet::single(id)))
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, id: VarId) -> bool {
        (1..=MAX_VAR_ID).contains(&id) && self.0 & (1u128 << (id - 1)) != 0
    }

    pub fn union(self, o: ScopeSet) -> ScopeSet {
        ScopeSet(self.0 | o.0)
    }

    pub fn intersect(self, o: ScopeSet) -> ScopeSet {
        ScopeSet(self.0 & o.0)
    }

    pub fn minus(self, o: ScopeSet) -> ScopeSet {
        ScopeSet(self.0 & !o.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, o: ScopeSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: ScopeSet) -> bool {
        self.0 & o.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Variable ids in ascending order.
    pub fn ids(self) -> Vec<VarId> {
        let mut out = Vec::with_capacity(self.len());
        let mut bits = self.0;
        while bits != 0 {
            let tz = bits.trailing_zeros();
            out.push(tz + 1);
            bits &= bits - 1;
        }
        out
    }
}

impl std::fmt::Display for ScopeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<String> = self.ids().iter().map(|i| format!("X{i}")).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

/// Univariate input function: a value per domain element and an explicit support mask.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub values: Vec<f64>,
    pub support: Vec<bool>,
}

impl InputTable {
    pub fn new(values: Vec<f64>, support: Vec<bool>) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::InvalidArgument(format!(
                "input table has {} values but {} mask entries",
                values.len(),
                support.len()
            )));
        }
        for (i, (&v, &m)) in values.iter().zip(&support).enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite input value at index {i}")));
            }
            if !m && v != 0.0 {
                return Err(Error::InvalidArgument(format!("value {v} at index {i} lies outside the support mask")));
            }
        }
        Ok(InputTable { values, support })
    }

    /// Table whose mask marks the nonzero values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let support = values.iter().map(|&v| v != 0.0).collect();
        InputTable::new(values, support)
    }

    pub fn ones(card: usize) -> Self {
        InputTable { values: vec![1.0; card], support: vec![true; card] }
    }

    pub fn indicator(card: usize, value: usize) -> Self {
        let mut values = vec![0.0; card];
        let mut support = vec![false; card];
        values[value] = 1.0;
        support[value] = true;
        InputTable { values, support }
    }

    pub fn zero(card: usize) -> Self {
        InputTable { values: vec![0.0; card], support: vec![false; card] }
    }

    pub fn card(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty_support(&self) -> bool {
        !self.support.iter().any(|&m| m)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Records that the children of a sum refine the children of a deterministic
/// source unit: child `k` is nonzero only where the source's child `groups[k]`
/// is, when both are projected onto `scope`, and those projections are disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelPart {
    pub origin: u64,
    pub unit: u32,
    pub scope: ScopeSet,
    pub groups: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitKind {
    Input { var: VarId, table: InputTable },
    Sum { children: Vec<(usize, f64)>, labels: Vec<LabelPart>, disjoint: bool },
    Product { children: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub kind: UnitKind,
    pub scope: ScopeSet,
}

impl Unit {
    pub fn child_ids(&self) -> Vec<usize> {
        match &self.kind {
            UnitKind::Input { .. } => Vec::new(),
            UnitKind::Sum { children, .. } => children.iter().map(|c| c.0).collect(),
            UnitKind::Product { children } => children.clone(),
        }
    }

    pub fn num_children(&self) -> usize {
        match &self.kind {
            UnitKind::Input { .. } => 0,
            UnitKind::Sum { children, .. } => children.len(),
            UnitKind::Product { children } => children.len(),
        }
    }

    pub fn is_sum(&self) -> bool {
        matches!(self.kind, UnitKind::Sum { .. })
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, UnitKind::Product { .. })
    }

    pub fn is_input(&self) -> bool {
        matches!(self.kind, UnitKind::Input { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    General,
    Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagState {
    Verified,
    Declared,
    False,
    #[default]
    Unknown,
}

impl FlagState {
    pub fn holds(self) -> bool {
        matches!(self, FlagState::Verified | FlagState::Declared)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            FlagState::Verified
        } else {
            FlagState::False
        }
    }

    /// Weakest of two claims: a conjunction of facts is only as strong as its weakest part.
    pub fn and(self, o: FlagState) -> FlagState {
        use FlagState::*;
        match (self, o) {
            (False, _) | (_, False) => False,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Declared, _) | (_, Declared) => Declared,
            (Verified, Verified) => Verified,
        }
    }

    /// Claim carried over by a closure rule; `False` inputs make the output unknown.
    pub fn derived(self) -> FlagState {
        match self {
            FlagState::False => FlagState::Unknown,
            s => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct PropertyFlags {
    pub smooth: FlagState,
    pub decomposable: FlagState,
    pub structured: FlagState,
    pub deterministic: FlagState,
    pub omni: FlagState,
    pub compat_class: Option<u64>,
}

impl PropertyFlags {
    pub fn get(&self, which: Which) -> FlagState {
        match which {
            Which::Smooth => self.smooth,
            Which::Decomposable => self.decomposable,
            Which::Structured => self.structured,
            Which::Deterministic => self.deterministic,
        }
    }
}

/// Immutable circuit over a table of discrete variables.
#[derive(Debug, Clone)]
pub struct Circuit {
    vars: Vec<Variable>,
    var_pos: Vec<usize>,
    units: Vec<Unit>,
    output: usize,
    flags: PropertyFlags,
    mode: Mode,
    token: u64,
    det_cache: OnceLock<Option<Witness>>,
}

const NO_POS: usize = usize::MAX;

impl Circuit {
    pub(crate) fn assemble(vars: Vec<Variable>, units: Vec<Unit>, output: usize, mut flags: PropertyFlags) -> Self {
        let mut var_pos = vec![NO_POS; MAX_VAR_ID as usize + 1];
        for (i, v) in vars.iter().enumerate() {
            var_pos[v.id as usize] = i;
        }
        let mode = if units.iter().all(unit_is_pc) { Mode::Pc } else { Mode::General };
        let smooth = check::first_smoothness_violation(&units).is_none();
        let dec = check::first_decomposability_violation(&units).is_none();
        flags.smooth = FlagState::from_bool(smooth);
        flags.decomposable = FlagState::from_bool(dec);
        if !dec {
            flags.structured = FlagState::False;
        }
        let token = content_token(&vars, &units, output);
        Circuit { vars, var_pos, units, output, flags, mode, token, det_cache: OnceLock::new() }
    }

    /// Canonical zero circuit: one input unit whose support mask is empty.
    pub fn zero(vars: Vec<Variable>) -> Result<Self> {
        let first = *vars.first().ok_or_else(|| Error::InvalidArgument("zero circuit needs a variable".into()))?;
        let mut b = Builder::new(vars)?;
        let u = b.input(first.id, InputTable::zero(first.card))?;
        let flags = PropertyFlags {
            structured: FlagState::Verified,
            deterministic: FlagState::Verified,
            omni: FlagState::Verified,
            ..Default::default()
        };
        b.finish(u, flags)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit(&self, id: usize) -> &Unit {
        &self.units[id]
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn flags(&self) -> &PropertyFlags {
        &self.flags
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Content hash identifying this circuit's structure and parameters.
    pub fn token(&self) -> u64 {
        self.token
    }

    /// Root scope.
    pub fn scope(&self) -> ScopeSet {
        self.units[self.output].scope
    }

    /// All variables of the table as a scope.
    pub fn table_scope(&self) -> ScopeSet {
        ScopeSet::from_ids(self.vars.iter().map(|v| v.id))
    }

    pub fn var_index(&self, id: VarId) -> Option<usize> {
        self.var_pos.get(id as usize).copied().filter(|&p| p != NO_POS)
    }

    pub fn card(&self, id: VarId) -> Option<usize> {
        self.var_index(id).map(|p| self.vars[p].card)
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_edges(&self) -> usize {
        self.units.iter().map(Unit::num_children).sum()
    }

    /// Size in the usual sense: the number of edges.
    pub fn size(&self) -> usize {
        self.num_edges()
    }

    pub fn is_zero(&self) -> bool {
        self.units.len() == 1
            && matches!(&self.units[0].kind, UnitKind::Input { table, .. } if table.is_empty_support())
    }

    /// Number of joint states of the variables in `scope`, saturating.
    pub fn state_count(&self, scope: ScopeSet) -> u128 {
        self.vars.iter().filter(|v| scope.contains(v.id)).fold(1u128, |acc, v| acc.saturating_mul(v.card as u128))
    }

    /// Returns a copy with the given flag overrides; structural flags stay authoritative.
    pub fn with_flags(&self, flags: PropertyFlags) -> Circuit {
        let mut c = self.clone();
        c.flags = PropertyFlags { smooth: self.flags.smooth, decomposable: self.flags.decomposable, ..flags };
        if !c.flags.decomposable.holds() {
            c.flags.structured = FlagState::False;
        }
        if flags.deterministic != self.flags.deterministic {
            c.det_cache = OnceLock::new();
        }
        c
    }

    pub(crate) fn det_cache(&self) -> &OnceLock<Option<Witness>> {
        &self.det_cache
    }

    /// Label parts in effect for sum unit `u`: the stored ones, plus the unit
    /// itself when the circuit is known to be deterministic.
    pub fn effective_labels(&self, u: usize) -> Vec<LabelPart> {
        let unit = &self.units[u];
        let UnitKind::Sum { children, labels, .. } = &unit.kind else {
            return Vec::new();
        };
        let mut out = labels.clone();
        if self.flags.deterministic.holds() {
            out.push(LabelPart {
                origin: self.token,
                unit: u as u32,
                scope: unit.scope,
                groups: (0..children.len() as u32).collect(),
            });
        }
        out
    }

    /// Merges two variable tables by id; cardinalities must agree.
    pub fn merge_vars(a: &[Variable], b: &[Variable]) -> Result<Vec<Variable>> {
        let mut out: Vec<Variable> = a.to_vec();
        for v in b {
            match out.iter().find(|w| w.id == v.id) {
                Some(w) if w.card != v.card => {
                    return Err(Error::InvalidArgument(format!(
                        "variable X{} has cardinality {} and {}",
                        v.id, w.card, v.card
                    )))
                }
                Some(_) => {}
                None => out.push(*v),
            }
        }
        out.sort_by_key(|v| v.id);
        Ok(out)
    }
}

fn unit_is_pc(u: &Unit) -> bool {
    match &u.kind {
        UnitKind::Input { table, .. } => table.values.iter().all(|&v| v >= 0.0),
        UnitKind::Sum { children, .. } => children.iter().all(|&(_, w)| w > 0.0),
        UnitKind::Product { .. } => true,
    }
}

fn content_token(vars: &[Variable], units: &[Unit], output: usize) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    vars.hash(&mut h);
    output.hash(&mut h);
    for u in units {
        match &u.kind {
            UnitKind::Input { var, table } => {
                0u8.hash(&mut h);
                var.hash(&mut h);
                for v in &table.values {
                    v.to_bits().hash(&mut h);
                }
                table.support.hash(&mut h);
            }
            UnitKind::Sum { children, .. } => {
                1u8.hash(&mut h);
                for (c, w) in children {
                    c.hash(&mut h);
                    w.to_bits().hash(&mut h);
                }
            }
            UnitKind::Product { children } => {
                2u8.hash(&mut h);
                children.hash(&mut h);
            }
        }
    }
    h.finish()
}
