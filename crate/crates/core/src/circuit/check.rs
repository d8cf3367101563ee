//! Structural property verification.

use super::{check_compatible, enumeration_budget, Circuit, Compatibility, FlagState, Mode, ScopeSet, Unit, UnitKind};
use crate::error::{Error, Property, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Smooth,
    Decomposable,
    Structured,
    Deterministic,
}

impl Which {
    pub fn parse(s: &str) -> Option<Which> {
        match s {
            "smooth" | "sm" => Some(Which::Smooth),
            "dec" | "decomposable" => Some(Which::Decomposable),
            "sd" | "structured" => Some(Which::Structured),
            "det" | "deterministic" => Some(Which::Deterministic),
            _ => None,
        }
    }

    pub fn property(self) -> Property {
        match self {
            Which::Smooth => Property::Smooth,
            Which::Decomposable => Property::Decomposable,
            Which::Structured => Property::Structured,
            Which::Deterministic => Property::Deterministic,
        }
    }

    pub const ALL: [Which; 4] = [Which::Smooth, Which::Decomposable, Which::Structured, Which::Deterministic];
}

/// Evidence that a property fails.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A unit whose children violate a scope condition.
    Unit { unit: usize, detail: String },
    /// Two children of `unit` are both nonzero at `state` (values by variable id order).
    State { unit: usize, children: (usize, usize), state: Vec<(u32, usize)> },
    /// Product units whose child scopes admit no common binary split.
    ScopePair { p_unit: usize, q_unit: usize, p_scopes: Vec<Vec<u32>>, q_scopes: Vec<Vec<u32>> },
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::Unit { unit, detail } => write!(f, "unit {unit}: {detail}"),
            Witness::State { unit, children, state } => {
                let s: Vec<String> = state.iter().map(|(v, x)| format!("X{v}={x}")).collect();
                write!(f, "unit {unit}: children {} and {} overlap at [{}]", children.0, children.1, s.join(" "))
            }
            Witness::ScopePair { p_unit, q_unit, p_scopes, q_scopes } => {
                let fmt = |v: &Vec<Vec<u32>>| {
                    v.iter()
                        .map(|s| format!("{{{}}}", s.iter().map(|i| format!("X{i}")).collect::<Vec<_>>().join(",")))
                        .collect::<Vec<_>>()
                        .join("")
                };
                write!(f, "units {p_unit}/{q_unit} split as {} vs {}", fmt(p_scopes), fmt(q_scopes))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PropertyCheck {
    Verified,
    /// Accepted on the strength of constructor certificates, without enumeration.
    Certified,
    False {
        witness: Witness,
    },
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        !matches!(self, PropertyCheck::False { .. })
    }
}

pub(crate) fn first_smoothness_violation(units: &[Unit]) -> Option<usize> {
    units.iter().position(|u| match &u.kind {
        UnitKind::Sum { children, .. } => children.iter().any(|&(c, _)| units[c].scope != u.scope),
        _ => false,
    })
}

pub(crate) fn first_decomposability_violation(units: &[Unit]) -> Option<usize> {
    units.iter().position(|u| match &u.kind {
        UnitKind::Product { children } => {
            let mut seen = ScopeSet::EMPTY;
            children.iter().any(|&c| {
                let s = units[c].scope;
                let clash = !seen.is_disjoint(s);
                seen = seen.union(s);
                clash
            })
        }
        _ => false,
    })
}

pub fn check_property(c: &Circuit, which: Which) -> Result<PropertyCheck> {
    check_property_with_budget(c, which, enumeration_budget())
}

pub fn check_property_with_budget(c: &Circuit, which: Which, budget: u64) -> Result<PropertyCheck> {
    match which {
        Which::Smooth => Ok(match first_smoothness_violation(c.units()) {
            None => PropertyCheck::Verified,
            Some(u) => PropertyCheck::False {
                witness: Witness::Unit { unit: u, detail: "sum children have different scopes".into() },
            },
        }),
        Which::Decomposable => Ok(match first_decomposability_violation(c.units()) {
            None => PropertyCheck::Verified,
            Some(u) => PropertyCheck::False {
                witness: Witness::Unit { unit: u, detail: "product children share variables".into() },
            },
        }),
        Which::Structured => {
            if let Some(u) = first_decomposability_violation(c.units()) {
                return Ok(PropertyCheck::False {
                    witness: Witness::Unit { unit: u, detail: "product children share variables".into() },
                });
            }
            match check_compatible(c, c)? {
                Compatibility::Compatible { .. } => Ok(PropertyCheck::Verified),
                Compatibility::Incompatible { witness } => Ok(PropertyCheck::False { witness }),
                Compatibility::Unknown { p_unit, q_unit, detail } => {
                    Err(Error::RearrangementFailure { p_unit, q_unit, detail, citation: None })
                }
            }
        }
        Which::Deterministic => check_deterministic(c, budget),
    }
}

fn check_deterministic(c: &Circuit, budget: u64) -> Result<PropertyCheck> {
    let scope = c.scope();
    let states = c.state_count(scope);
    if states > budget as u128 {
        let certified = c.units().iter().all(|u| match &u.kind {
            UnitKind::Sum { children, disjoint, .. } => *disjoint || children.len() == 1,
            _ => true,
        });
        if certified {
            return Ok(PropertyCheck::Certified);
        }
        return Err(Error::BudgetExceeded { states, budget });
    }
    Ok(match find_overlap(c, scope, states as u64) {
        None => PropertyCheck::Verified,
        Some(w) => PropertyCheck::False { witness: w },
    })
}

/// Enumerates the joint states of `scope` 64 at a time, propagating support
/// bitmasks through the circuit and looking for two overlapping sum children.
fn find_overlap(c: &Circuit, scope: ScopeSet, states: u64) -> Option<Witness> {
    let vars: Vec<_> = c.vars().iter().copied().filter(|v| scope.contains(v.id)).collect();
    let mut bits = vec![0u64; c.num_units()];
    let mut var_bits: Vec<Vec<u64>> = vars.iter().map(|v| vec![0u64; v.card]).collect();
    let mut slot = vec![usize::MAX; super::MAX_VAR_ID as usize + 1];
    for (i, v) in vars.iter().enumerate() {
        slot[v.id as usize] = i;
    }
    let mut base = 0u64;
    let mut digits = vec![0usize; vars.len()];
    while base < states {
        let n = (states - base).min(64) as usize;
        for vb in var_bits.iter_mut() {
            vb.iter_mut().for_each(|b| *b = 0);
        }
        for k in 0..n {
            for (i, &d) in digits.iter().enumerate() {
                var_bits[i][d] |= 1u64 << k;
            }
            // increment mixed-radix counter, last variable fastest
            for i in (0..vars.len()).rev() {
                digits[i] += 1;
                if digits[i] < vars[i].card {
                    break;
                }
                digits[i] = 0;
            }
        }
        let valid = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for (ui, u) in c.units().iter().enumerate() {
            bits[ui] = match &u.kind {
                UnitKind::Input { var, table } => {
                    let vb = &var_bits[slot[*var as usize]];
                    table.support.iter().zip(vb).filter(|(m, _)| **m).fold(0u64, |acc, (_, b)| acc | b)
                }
                UnitKind::Product { children } => children.iter().fold(valid, |acc, &k| acc & bits[k]),
                UnitKind::Sum { children, .. } => {
                    let mut seen = 0u64;
                    for (pos, &(k, _)) in children.iter().enumerate() {
                        let overlap = seen & bits[k];
                        if overlap != 0 {
                            let bit = overlap.trailing_zeros() as u64;
                            let other = children[..pos].iter().find(|&&(j, _)| bits[j] & (1u64 << bit) != 0).unwrap().0;
                            return Some(Witness::State {
                                unit: ui,
                                children: (other, k),
                                state: decode(&vars, base + bit),
                            });
                        }
                        seen |= bits[k];
                    }
                    seen
                }
            };
        }
        base += n as u64;
    }
    None
}

fn decode(vars: &[super::Variable], mut index: u64) -> Vec<(u32, usize)> {
    let mut out = vec![(0u32, 0usize); vars.len()];
    for i in (0..vars.len()).rev() {
        let card = vars[i].card as u64;
        out[i] = (vars[i].id, (index % card) as usize);
        index /= card;
    }
    out
}

/// Succeeds when `c` is deterministic, verifying declared or unknown claims
/// by enumeration within the budget. The outcome is cached on the circuit.
pub fn ensure_deterministic(c: &Circuit) -> Result<()> {
    let flag = c.flags().deterministic;
    if flag == FlagState::Verified {
        return Ok(());
    }
    if flag == FlagState::False {
        return Err(Error::violation(Property::Deterministic, None, "circuit is not deterministic"));
    }
    if let Some(w) = c.det_cache().get() {
        return match w {
            None => Ok(()),
            Some(w) => Err(det_violation(w)),
        };
    }
    match check_property(c, Which::Deterministic) {
        Ok(PropertyCheck::False { witness }) => {
            let _ = c.det_cache().set(Some(witness.clone()));
            Err(det_violation(&witness))
        }
        Ok(_) => {
            let _ = c.det_cache().set(None);
            Ok(())
        }
        // declared claims stand when they cannot be checked
        Err(Error::BudgetExceeded { .. }) if flag == FlagState::Declared => Ok(()),
        Err(e) => Err(e),
    }
}

fn det_violation(w: &Witness) -> Error {
    let unit = match w {
        Witness::State { unit, .. } | Witness::Unit { unit, .. } => Some(*unit),
        Witness::ScopePair { p_unit, .. } => Some(*p_unit),
    };
    Error::violation(Property::Deterministic, unit, format!("not deterministic: {w}"))
}

/// Succeeds for circuits with non-negative parameters.
pub(crate) fn require_pc(c: &Circuit) -> Result<()> {
    if c.mode() != Mode::Pc {
        return Err(Error::violation(Property::PcMode, None, "circuit has negative parameters"));
    }
    Ok(())
}
