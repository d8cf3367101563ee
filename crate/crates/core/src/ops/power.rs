use super::{multiply, OpResult};
use crate::circuit::{
    check_property, ensure_deterministic, require_pc, require_smooth_dec, Builder, Circuit, FlagState, InputTable,
    Mode, PropertyCheck, UnitKind, Which,
};
use crate::error::{Error, Property, Result};
use crate::hardness;

/// p^n for a structured-decomposable circuit by repeated squaring, or with
/// the restricted power when `p` is deterministic.
pub fn natural_power(p: &Circuit, n: u32) -> Result<OpResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("natural power needs n >= 1".into()));
    }
    require_smooth_dec(p).map_err(|e| e.cite(hardness::POWER_NATURAL))?;
    if n == 1 {
        return Ok(OpResult::new(p.clone(), 0));
    }
    if p.mode() == Mode::Pc && p.flags().deterministic.holds() && ensure_deterministic(p).is_ok() {
        return restricted_power(p, n as f64);
    }
    let structured = match p.flags().structured {
        FlagState::Verified | FlagState::Declared => true,
        FlagState::False => false,
        FlagState::Unknown => matches!(check_property(p, Which::Structured), Ok(PropertyCheck::Verified)),
    };
    if !structured {
        return Err(Error::violation(
            Property::Structured,
            None,
            "natural power needs a structured-decomposable or deterministic circuit",
        )
        .cite(hardness::POWER_NATURAL));
    }
    let mut hits = 0;
    let mut result: Option<Circuit> = None;
    let mut base = p.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => {
                    let m = multiply(&r, &base)?;
                    hits += m.stats.cache_hits;
                    m.circuit
                }
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        let sq = multiply(&base, &base)?;
        hits += sq.stats.cache_hits;
        base = sq.circuit;
    }
    Ok(OpResult::new(result.unwrap(), hits))
}

/// p^α restricted to the support of a deterministic PC, with the shape of `p`.
pub fn restricted_power(p: &Circuit, alpha: f64) -> Result<OpResult> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("exponent must be finite, got {alpha}")));
    }
    require_smooth_dec(p).map_err(|e| e.cite(hardness::POWER_REAL))?;
    require_pc(p)?;
    ensure_deterministic(p).map_err(|e| e.cite(hardness::POWER_REAL))?;
    let mut b = Builder::new(p.vars().to_vec())?;
    for (i, u) in p.units().iter().enumerate() {
        match &u.kind {
            UnitKind::Input { var, table } => {
                let mut values = Vec::with_capacity(table.card());
                for (x, (&v, &m)) in table.values.iter().zip(&table.support).enumerate() {
                    if !m {
                        values.push(0.0);
                    } else if v == 0.0 && alpha < 0.0 {
                        return Err(Error::DomainError(format!(
                            "negative power of zero at X{var}={x}, inside the support of unit {i}"
                        )));
                    } else {
                        values.push(if alpha == 0.0 { 1.0 } else { v.powf(alpha) });
                    }
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::DomainError(format!("power of unit {i} overflows")));
                }
                b.input(*var, InputTable::new(values, table.support.clone())?)?;
            }
            UnitKind::Product { children } => {
                b.product(children.clone())?;
            }
            UnitKind::Sum { children, disjoint, .. } => {
                let ch = children.iter().map(|&(k, w)| (k, w.powf(alpha))).collect();
                b.sum_with(ch, p.effective_labels(i), *disjoint)?;
            }
        }
    }
    let c = b.finish(p.output(), crate::circuit::det_preserving_flags(p))?;
    Ok(OpResult::new(c, 0))
}

/// p / q restricted to the support of the deterministic `q`.
pub fn quotient(p: &Circuit, q: &Circuit) -> Result<OpResult> {
    require_smooth_dec(q)?;
    ensure_deterministic(q).map_err(|e| e.recite(hardness::QUOTIENT))?;
    let inv = restricted_power(q, -1.0).map_err(|e| e.recite(hardness::QUOTIENT))?;
    let m = multiply(p, &inv.circuit)?;
    Ok(m)
}
