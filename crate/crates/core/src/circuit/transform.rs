//! Smoothing and support circuits.

use std::collections::HashMap;

use super::{
    ensure_deterministic, require_pc, require_smooth_dec, Builder, Circuit, FlagState, InputTable, PropertyFlags,
    ScopeSet, UnitKind,
};
use crate::error::{Error, Property, Result};

/// Smooth circuit equal to `c` on the joint domain: sum children that miss
/// variables of their parent are multiplied by all-ones inputs over them.
pub fn smooth_transform(c: &Circuit) -> Result<Circuit> {
    if !c.flags().decomposable.holds() {
        return Err(Error::violation(
            Property::Decomposable,
            super::check::first_decomposability_violation(c.units()),
            "smoothing requires a decomposable circuit",
        ));
    }
    if c.flags().smooth.holds() {
        return Ok(c.clone());
    }
    let mut b = Builder::new(c.vars().to_vec())?;
    let mut map = vec![0usize; c.num_units()];
    let mut ones: HashMap<u32, usize> = HashMap::new();
    let mut padded: HashMap<(usize, ScopeSet), usize> = HashMap::new();
    for (i, u) in c.units().iter().enumerate() {
        map[i] = match &u.kind {
            UnitKind::Input { var, table } => b.input(*var, table.clone())?,
            UnitKind::Product { children } => b.product(children.iter().map(|&k| map[k]).collect())?,
            UnitKind::Sum { children, .. } => {
                let mut ch = Vec::with_capacity(children.len());
                for &(k, w) in children {
                    let missing = u.scope.minus(c.unit(k).scope);
                    if missing.is_empty() {
                        ch.push((map[k], w));
                        continue;
                    }
                    let id = match padded.get(&(k, missing)) {
                        Some(&id) => id,
                        None => {
                            let mut fac = vec![map[k]];
                            for v in missing.ids() {
                                let one = match ones.get(&v) {
                                    Some(&o) => o,
                                    None => {
                                        let o = b.input(v, InputTable::ones(c.card(v).unwrap()))?;
                                        ones.insert(v, o);
                                        o
                                    }
                                };
                                fac.push(one);
                            }
                            let id = b.product(fac)?;
                            padded.insert((k, missing), id);
                            id
                        }
                    };
                    ch.push((id, w));
                }
                let disjoint = matches!(u.kind, UnitKind::Sum { disjoint: true, .. });
                b.sum_with(ch, c.effective_labels(i), disjoint)?
            }
        };
    }
    let f = c.flags();
    let flags = PropertyFlags { deterministic: f.deterministic.derived(), ..Default::default() };
    b.finish(map[c.output()], flags)
}

/// Circuit with the shape of `c` computing the indicator of its support.
pub fn support_circuit(c: &Circuit) -> Result<Circuit> {
    require_smooth_dec(c)?;
    require_pc(c)?;
    ensure_deterministic(c)?;
    let mut b = Builder::new(c.vars().to_vec())?;
    for (i, u) in c.units().iter().enumerate() {
        match &u.kind {
            UnitKind::Input { var, table } => {
                let values = table.support.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
                b.input(*var, InputTable { values, support: table.support.clone() })?;
            }
            UnitKind::Product { children } => {
                b.product(children.clone())?;
            }
            UnitKind::Sum { children, disjoint, .. } => {
                b.sum_with(children.iter().map(|&(k, _)| (k, 1.0)).collect(), c.effective_labels(i), *disjoint)?;
            }
        }
    }
    b.finish(c.output(), det_preserving_flags(c))
}

/// Flags for an output with the DAG shape and supports of the deterministic circuit `c`.
pub(crate) fn det_preserving_flags(c: &Circuit) -> PropertyFlags {
    let f = c.flags();
    let det = match f.deterministic {
        FlagState::Verified => FlagState::Verified,
        _ if matches!(c.det_cache().get(), Some(None)) => FlagState::Verified,
        _ => FlagState::Declared,
    };
    PropertyFlags {
        deterministic: det,
        structured: f.structured.derived(),
        omni: f.omni.derived(),
        compat_class: f.compat_class,
        ..Default::default()
    }
}
