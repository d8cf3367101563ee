//! Symbolic big-O costs: sums of monomials over model sizes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Product of symbol sizes, e.g. |p|^2|q|.
pub type Monomial = BTreeMap<String, u32>;

/// Sum of monomials with dominated terms removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cost(BTreeSet<Vec<(String, u32)>>);

impl Cost {
    pub fn zero() -> Cost {
        Cost(BTreeSet::new())
    }

    /// |name|
    pub fn size(name: &str) -> Cost {
        Cost(BTreeSet::from([vec![(name.to_string(), 1)]]))
    }

    pub fn parse(text: &str) -> Option<Cost> {
        let body = text.trim().strip_prefix("O(")?.strip_suffix(')')?;
        let mut out = Cost::zero();
        for term in body.split('+') {
            let mut m = Monomial::new();
            let mut rest = term.trim();
            while !rest.is_empty() {
                rest = rest.strip_prefix('|')?;
                let end = rest.find('|')?;
                let name = &rest[..end];
                rest = &rest[end + 1..];
                let mut exp = 1;
                if let Some(r) = rest.strip_prefix('^') {
                    let digits = r.chars().take_while(|c| c.is_ascii_digit()).count();
                    exp = r[..digits].parse().ok()?;
                    rest = &r[digits..];
                }
                *m.entry(name.to_string()).or_default() += exp;
            }
            out = out.plus(&Cost::from_monomial(m));
        }
        Some(out)
    }

    fn from_monomial(m: Monomial) -> Cost {
        Cost(BTreeSet::from([m.into_iter().filter(|(_, e)| *e > 0).collect()]))
    }

    fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.0.iter().map(|t| t.iter().cloned().collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn plus(&self, o: &Cost) -> Cost {
        let mut all: Vec<Monomial> = self.monomials().chain(o.monomials()).collect();
        all.sort_by_key(|m| std::cmp::Reverse(degree(m)));
        let mut kept: Vec<Monomial> = Vec::new();
        for m in all {
            if !kept.iter().any(|k| divides(&m, k)) {
                kept.push(m);
            }
        }
        Cost(kept.into_iter().map(|m| m.into_iter().collect()).collect())
    }

    pub fn times(&self, o: &Cost) -> Cost {
        let mut out = Cost::zero();
        for a in self.monomials() {
            for b in o.monomials() {
                let mut m = a.clone();
                for (k, e) in b {
                    *m.entry(k).or_default() += e;
                }
                out = out.plus(&Cost::from_monomial(m));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Cost {
        let mut out = self.clone();
        for _ in 1..n.max(1) {
            out = out.times(self);
        }
        out
    }
}

fn degree(m: &Monomial) -> u32 {
    m.values().sum()
}

/// True when `a` divides `b`, so `a` is dominated by `b`.
fn divides(a: &Monomial, b: &Monomial) -> bool {
    a.iter().all(|(k, e)| b.get(k).is_some_and(|f| f >= e))
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "O(1)");
        }
        let mut terms: Vec<Monomial> = self.monomials().collect();
        let top = |m: &Monomial| m.values().copied().max().unwrap_or(0);
        terms.sort_by(|a, b| degree(b).cmp(&degree(a)).then_with(|| top(a).cmp(&top(b))).then_with(|| a.cmp(b)));
        let parts: Vec<String> = terms
            .iter()
            .map(|m| {
                m.iter().map(|(k, e)| if *e == 1 { format!("|{k}|") } else { format!("|{k}|^{e}") }).collect::<String>()
            })
            .collect();
        write!(f, "O({})", parts.join(" + "))
    }
}

impl serde::Serialize for Cost {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominated_terms_drop() {
        let p = Cost::size("p");
        let q = Cost::size("q");
        let c = p.times(&q).plus(&p).plus(&q);
        assert_eq!(c.to_string(), "O(|p||q|)");
        let cs = p.times(&q).plus(&p.pow(2)).plus(&q.pow(2));
        assert_eq!(cs.to_string(), "O(|p||q| + |p|^2 + |q|^2)");
        assert_eq!(Cost::parse("O(|p|^2|q|)").unwrap(), p.pow(2).times(&q));
        assert_eq!(Cost::parse(&cs.to_string()).unwrap(), cs);
    }
}
