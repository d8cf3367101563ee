use super::multiply::mapped_labels;
use super::OpResult;
use crate::circuit::{
    ensure_deterministic, require_pc, require_smooth_dec, Builder, Circuit, FlagState, InputTable, LabelPart,
    PropertyFlags, UnitKind,
};
use crate::error::{Error, Result};
use crate::hardness;

/// Natural logarithm of a deterministic PC, restricted to its support.
///
/// A sum unit with weights θi becomes a sum over pairs (support of child i
/// weighted ln θi, log of child i weighted 1). A product unit becomes a sum
/// with one term per child: that child's log times its siblings' supports.
pub fn log_circuit(p: &Circuit) -> Result<OpResult> {
    require_smooth_dec(p).map_err(|e| e.cite(hardness::LOG))?;
    require_pc(p).map_err(|e| e.cite(hardness::LOG))?;
    ensure_deterministic(p).map_err(|e| e.cite(hardness::LOG))?;
    let mut b = Builder::new(p.vars().to_vec())?;
    let n = p.num_units();
    let mut sup = vec![0usize; n];
    let mut lg = vec![0usize; n];
    for (i, u) in p.units().iter().enumerate() {
        match &u.kind {
            UnitKind::Input { var, table } => {
                let ones = table.support.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
                sup[i] = b.input(*var, InputTable { values: ones, support: table.support.clone() })?;
                let mut values = Vec::with_capacity(table.card());
                for (x, (&v, &m)) in table.values.iter().zip(&table.support).enumerate() {
                    if !m {
                        values.push(0.0);
                    } else if v <= 0.0 {
                        return Err(Error::DomainError(format!(
                            "logarithm of {v} at X{var}={x}, inside the support of unit {i}"
                        )));
                    } else {
                        values.push(v.ln());
                    }
                }
                lg[i] = b.input(*var, InputTable::new(values, table.support.clone())?)?;
            }
            UnitKind::Product { children } => {
                sup[i] = b.product(children.iter().map(|&k| sup[k]).collect())?;
                let mut terms = Vec::with_capacity(children.len());
                for a in 0..children.len() {
                    let fac: Vec<usize> =
                        children.iter().enumerate().map(|(c, &j)| if c == a { lg[j] } else { sup[j] }).collect();
                    terms.push((b.product(fac)?, 1.0));
                }
                lg[i] = b.sum(terms)?;
            }
            UnitKind::Sum { children, disjoint, .. } => {
                let labels = p.effective_labels(i);
                sup[i] =
                    b.sum_with(children.iter().map(|&(k, _)| (sup[k], 1.0)).collect(), labels.clone(), *disjoint)?;
                let mut terms = Vec::with_capacity(2 * children.len());
                let mut pos = Vec::with_capacity(2 * children.len());
                for (c, &(k, w)) in children.iter().enumerate() {
                    terms.push((sup[k], w.ln()));
                    terms.push((lg[k], 1.0));
                    pos.push(c);
                    pos.push(c);
                }
                let parts: Vec<LabelPart> = mapped_labels(labels, &pos);
                lg[i] = b.sum_with(terms, parts, false)?;
            }
        }
    }
    let f = p.flags();
    let flags = PropertyFlags {
        structured: f.structured.derived(),
        compat_class: f.compat_class,
        deterministic: FlagState::Unknown,
        ..Default::default()
    };
    Ok(OpResult::new(b.finish(lg[p.output()], flags)?, 0))
}
