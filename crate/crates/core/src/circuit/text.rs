//! Line-oriented circuit text format.
//!
//! ```text
//! pcirc 1
//! var 1 2
//! inp 0 1 0.3 0.7
//! inp 1 1 0 1 | 0 1
//! sum 2 2 0 0.5 1 0.5
//! out 2
//! flag det
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Builder, Circuit, FlagState, InputTable, PropertyFlags, UnitKind, Variable};
use crate::error::{Error, Result};

pub fn load(path: impl AsRef<Path>) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

pub fn save(c: &Circuit, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(c))?;
    Ok(())
}

pub(crate) struct Line<'a> {
    pub(crate) no: usize,
    pub(crate) toks: Vec<(usize, &'a str)>,
    pub(crate) pos: usize,
}

impl<'a> Line<'a> {
    pub(crate) fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.no, col, msg: msg.into() }
    }

    pub(crate) fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or_else(|| self.toks.last().map(|t| t.0 + t.1.len()).unwrap_or(1))
    }

    pub(crate) fn next(&mut self, what: &str) -> Result<&'a str> {
        let col = self.col();
        let t = self.toks.get(self.pos).ok_or_else(|| self.err(col, format!("expected {what}")))?.1;
        self.pos += 1;
        Ok(t)
    }

    pub(crate) fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let col = self.col();
        let t = self.next(what)?;
        t.parse().map_err(|_| self.err(col, format!("expected {what}, found `{t}`")))
    }

    pub(crate) fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return Err(self.err(self.toks[self.pos].0, format!("unexpected token `{}`", self.toks[self.pos].1)));
        }
        Ok(())
    }
}

pub(crate) fn tokenize(no: usize, line: &str) -> Line<'_> {
    let body = line.split('#').next().unwrap_or("");
    let mut toks = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push((s + 1, &body[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push((s + 1, &body[s..]));
    }
    Line { no, toks, pos: 0 }
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate().map(|(i, l)| tokenize(i + 1, l)).filter(|l| !l.toks.is_empty());
    let mut header = lines.next().ok_or(Error::Parse { line: 1, col: 1, msg: "empty circuit file".into() })?;
    if header.next("header")? != "pcirc" {
        return Err(header.err(1, "expected `pcirc 1` header"));
    }
    let version: u32 = header.parse("format version")?;
    if version != 1 {
        return Err(header.err(7, format!("unsupported format version {version}")));
    }
    header.done()?;

    let lines: Vec<Line> = lines.collect();
    let mut vars = Vec::new();
    for l in &lines {
        if l.toks[0].1 == "var" {
            let mut l = Line { no: l.no, toks: l.toks.clone(), pos: 1 };
            let id: u32 = l.parse("variable id")?;
            let card: usize = l.parse("cardinality")?;
            l.done()?;
            vars.push(Variable::new(id, card).map_err(|e| l.err(5, e.to_string()))?);
        }
    }
    let mut b = Builder::new(vars).map_err(|e| Error::Parse { line: 1, col: 1, msg: e.to_string() })?;
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut last_uid: Option<u64> = None;
    let mut output = None;
    let mut flags = PropertyFlags::default();
    for mut l in lines {
        let kw = l.next("keyword")?;
        match kw {
            "var" => {}
            "inp" | "sum" | "prd" => {
                let col = l.col();
                let uid: u64 = l.parse("unit id")?;
                if last_uid.is_some_and(|p| uid <= p) {
                    return Err(l.err(col, format!("unit id {uid} is not strictly increasing")));
                }
                last_uid = Some(uid);
                let id = match kw {
                    "inp" => parse_input(&mut l, &mut b)?,
                    "sum" => {
                        let n: usize = l.parse("child count")?;
                        let mut ch = Vec::with_capacity(n);
                        for _ in 0..n {
                            let child = child_ref(&mut l, &ids)?;
                            let w: f64 = l.parse("weight")?;
                            ch.push((child, w));
                        }
                        l.done()?;
                        b.sum(ch).map_err(|e| l.err(1, e.to_string()))?
                    }
                    _ => {
                        let n: usize = l.parse("child count")?;
                        let mut ch = Vec::with_capacity(n);
                        for _ in 0..n {
                            ch.push(child_ref(&mut l, &ids)?);
                        }
                        l.done()?;
                        b.product(ch).map_err(|e| l.err(1, e.to_string()))?
                    }
                };
                ids.insert(uid, id);
            }
            "out" => {
                let o = child_ref(&mut l, &ids)?;
                l.done()?;
                output = Some(o);
            }
            "flag" => {
                let col = l.col();
                let name = l.next("flag name")?;
                l.done()?;
                match name {
                    "smooth" => flags.smooth = FlagState::Declared,
                    "dec" => flags.decomposable = FlagState::Declared,
                    "sd" => flags.structured = FlagState::Declared,
                    "det" => flags.deterministic = FlagState::Declared,
                    "omni" => flags.omni = FlagState::Declared,
                    _ => return Err(l.err(col, format!("unknown flag `{name}`"))),
                }
            }
            _ => return Err(l.err(1, format!("unknown keyword `{kw}`"))),
        }
    }
    let output =
        output.ok_or(Error::Parse { line: text.lines().count().max(1), col: 1, msg: "missing `out` line".into() })?;
    b.finish(output, flags)
}

fn child_ref(l: &mut Line, ids: &HashMap<u64, usize>) -> Result<usize> {
    let col = l.col();
    let uid: u64 = l.parse("unit reference")?;
    ids.get(&uid).copied().ok_or_else(|| l.err(col, format!("unit {uid} is not defined before use")))
}

fn parse_input(l: &mut Line, b: &mut Builder) -> Result<usize> {
    let col = l.col();
    let var: u32 = l.parse("variable id")?;
    let card = b.card(var).ok_or_else(|| l.err(col, format!("undeclared variable {var}")))?;
    let mut values = Vec::with_capacity(card);
    for _ in 0..card {
        values.push(l.parse::<f64>("value")?);
    }
    let table = if l.pos < l.toks.len() {
        let col = l.col();
        if l.next("`|`")? != "|" {
            return Err(l.err(col, "expected `|` before the support mask"));
        }
        let mut mask = Vec::with_capacity(card);
        for _ in 0..card {
            let col = l.col();
            match l.next("mask entry")? {
                "0" => mask.push(false),
                "1" => mask.push(true),
                t => return Err(l.err(col, format!("mask entries are 0 or 1, found `{t}`"))),
            }
        }
        InputTable::new(values, mask)
    } else {
        InputTable::from_values(values)
    };
    l.done()?;
    let table = table.map_err(|e| l.err(1, e.to_string()))?;
    b.input(var, table).map_err(|e| l.err(1, e.to_string()))
}

pub fn to_text(c: &Circuit) -> String {
    let mut s = String::from("pcirc 1\n");
    for v in c.vars() {
        let _ = writeln!(s, "var {} {}", v.id, v.card);
    }
    for (i, u) in c.units().iter().enumerate() {
        match &u.kind {
            UnitKind::Input { var, table } => {
                let _ = write!(s, "inp {i} {var}");
                for v in &table.values {
                    let _ = write!(s, " {v:?}");
                }
                let implied: Vec<bool> = table.values.iter().map(|&v| v != 0.0).collect();
                if implied != table.support {
                    s.push_str(" |");
                    for &m in &table.support {
                        s.push_str(if m { " 1" } else { " 0" });
                    }
                }
                s.push('\n');
            }
            UnitKind::Sum { children, .. } => {
                let _ = write!(s, "sum {i} {}", children.len());
                for (k, w) in children {
                    let _ = write!(s, " {k} {w:?}");
                }
                s.push('\n');
            }
            UnitKind::Product { children } => {
                let _ = write!(s, "prd {i} {}", children.len());
                for k in children {
                    let _ = write!(s, " {k}");
                }
                s.push('\n');
            }
        }
    }
    let _ = writeln!(s, "out {}", c.output());
    let f = c.flags();
    for (state, name) in [
        (f.smooth, "smooth"),
        (f.decomposable, "dec"),
        (f.structured, "sd"),
        (f.deterministic, "det"),
        (f.omni, "omni"),
    ] {
        if state.holds() {
            let _ = writeln!(s, "flag {name}");
        }
    }
    s
}
