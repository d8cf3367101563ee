//! Pipeline expressions and their text grammar.
//!
//! ```text
//! p: det, sd;
//! q: det, sd;
//! cmp(p, q);
//! integ(mul(p, log(div(p, q))))
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::circuit::{ScopeSet, VarId, MAX_VAR_ID};
use crate::error::{Error, Result};
use crate::queries::{expand, QueryKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", content = "arg", rename_all = "snake_case")]
pub enum Op {
    Leaf(String),
    Add(f64, f64),
    Mul,
    Div,
    Pow(f64),
    Log,
    Exp,
    Supp,
    Marg(Vec<VarId>),
    Integ,
    Query(QueryKind),
}

impl Op {
    pub fn name(&self) -> &str {
        match self {
            Op::Leaf(s) => s,
            Op::Add(..) => "add",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Pow(_) => "pow",
            Op::Log => "log",
            Op::Exp => "exp",
            Op::Supp => "supp",
            Op::Marg(_) => "marg",
            Op::Integ => "integ",
            Op::Query(k) => k.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExprNode {
    pub op: Op,
    pub args: Vec<usize>,
    /// Integrals a query node expands to; empty for other nodes.
    pub terms: Vec<usize>,
}

/// Expression DAG; structurally equal subexpressions share one node.
#[derive(Debug, Clone, Default)]
pub struct PipelineExpr {
    nodes: Vec<ExprNode>,
    index: HashMap<String, usize>,
    texts: Vec<String>,
    root: usize,
}

impl PipelineExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, name: &str) -> usize {
        self.node(Op::Leaf(name.to_string()), Vec::new())
    }

    /// Adds (or reuses) a node; query nodes are expanded into their integrals.
    pub fn node(&mut self, op: Op, args: Vec<usize>) -> usize {
        let text = self.render(&op, &args);
        if let Some(&id) = self.index.get(&text) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(ExprNode { op: op.clone(), args: args.clone(), terms: Vec::new() });
        self.texts.push(text.clone());
        self.index.insert(text, id);
        if let Op::Query(kind) = op {
            let terms = expand(self, &kind, &args);
            self.nodes[id].terms = terms;
        }
        self.root = id;
        id
    }

    pub fn set_root(&mut self, id: usize) {
        self.root = id;
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[ExprNode] {
        &self.nodes
    }

    pub fn node_at(&self, id: usize) -> &ExprNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Canonical text of node `id`.
    pub fn text(&self, id: usize) -> &str {
        &self.texts[id]
    }

    pub fn is_scalar(&self, id: usize) -> bool {
        matches!(self.nodes[id].op, Op::Integ | Op::Query(_))
    }

    /// Leaf symbols reachable from the root, sorted.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                continue;
            }
            let n = &self.nodes[id];
            if let Op::Leaf(s) = &n.op {
                out.insert(s.clone());
            }
            stack.extend(&n.args);
            stack.extend(&n.terms);
        }
        out.into_iter().collect()
    }

    fn render(&self, op: &Op, args: &[usize]) -> String {
        let a: Vec<&str> = args.iter().map(|&i| self.texts[i].as_str()).collect();
        let ids = |v: &[VarId]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match op {
            Op::Leaf(s) => s.clone(),
            Op::Add(t1, t2) if *t1 == 1.0 && *t2 == 1.0 => format!("add({},{})", a[0], a[1]),
            Op::Add(t1, t2) => format!("add({},{},{t1},{t2})", a[0], a[1]),
            Op::Pow(x) => format!("pow({},{x})", a[0]),
            Op::Marg(v) => format!("marg({};{})", a[0], ids(v)),
            Op::Query(QueryKind::Renyi(x)) => format!("renyi({},{x})", a[0]),
            Op::Query(QueryKind::Alpha(x)) => format!("alpha({},{},{x})", a[0], a[1]),
            Op::Query(QueryKind::MutualInformation { x, y }) => format!("mi({};{};{})", a[0], ids(x), ids(y)),
            _ => format!("{}({})", op.name(), a.join(",")),
        }
    }

    /// Parses a lone expression (no declarations).
    pub fn parse(text: &str) -> Result<PipelineExpr> {
        let (e, env) = parse_pipeline(text)?;
        if env.symbols.values().any(|f| *f != SymbolFlags::default()) || !env.classes.is_empty() || !env.mdet.is_empty()
        {
            return Err(Error::InvalidArgument("expected an expression without declarations".into()));
        }
        Ok(e)
    }
}

impl Serialize for PipelineExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for PipelineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.nodes.is_empty() {
            return Ok(());
        }
        f.write_str(&self.texts[self.root])
    }
}

/// Declared properties of one symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SymbolFlags {
    pub sm: bool,
    pub dec: bool,
    pub sd: bool,
    pub det: bool,
    pub omni: bool,
    /// The symbol is an additive (linear) form, so its exponential is tractable.
    pub linear: bool,
}

impl SymbolFlags {
    /// Adds the properties implied by the declared ones.
    pub fn closed(mut self) -> Self {
        if self.sd || self.omni || self.det {
            self.sm = true;
            self.dec = true;
        }
        self
    }
}

/// Declared environment of a pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PropertyEnv {
    pub symbols: BTreeMap<String, SymbolFlags>,
    /// Sets of mutually compatible symbols.
    pub classes: Vec<BTreeSet<String>>,
    /// Symbols whose marginal over the remaining variables stays deterministic
    /// after summing out the listed ones.
    pub mdet: Vec<(String, ScopeSet)>,
}

impl PropertyEnv {
    pub fn declare(&mut self, name: &str, flags: SymbolFlags) {
        let f = self.symbols.entry(name.to_string()).or_default();
        *f = SymbolFlags {
            sm: f.sm || flags.sm,
            dec: f.dec || flags.dec,
            sd: f.sd || flags.sd,
            det: f.det || flags.det,
            omni: f.omni || flags.omni,
            linear: f.linear || flags.linear,
        }
        .closed();
    }

    pub fn compatible(&mut self, names: &[&str]) {
        for n in names {
            let f = self.symbols.entry(n.to_string()).or_default();
            f.sm = true;
            f.dec = true;
        }
        self.classes.push(names.iter().map(|s| s.to_string()).collect());
    }

    pub fn marginal_det(&mut self, name: &str, summed_out: ScopeSet) {
        self.mdet.push((name.to_string(), summed_out));
    }

    pub fn flags(&self, name: &str) -> SymbolFlags {
        self.symbols.get(name).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Punct(char),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut end = (1, 1);
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let chars: Vec<(usize, char)> = body.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (off, c) = chars[i];
            let col = body[..off].chars().count() + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = off;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let stop = chars.get(i).map(|c| c.0).unwrap_or(body.len());
                toks.push((Tok::Ident(body[start..stop].to_string()), ln + 1, col));
            } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
                let start = off;
                i += 1;
                while i < chars.len() {
                    let d = chars[i].1;
                    let prev = chars[i - 1].1;
                    if d.is_ascii_digit()
                        || d == '.'
                        || d == 'e'
                        || d == 'E'
                        || ((d == '-' || d == '+') && (prev == 'e' || prev == 'E'))
                    {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let stop = chars.get(i).map(|c| c.0).unwrap_or(body.len());
                let s = &body[start..stop];
                let v: f64 =
                    s.parse().map_err(|_| Error::Parse { line: ln + 1, col, msg: format!("bad number `{s}`") })?;
                toks.push((Tok::Num(v), ln + 1, col));
            } else if "(),;:".contains(c) {
                toks.push((Tok::Punct(c), ln + 1, col));
                i += 1;
            } else {
                return Err(Error::Parse { line: ln + 1, col, msg: format!("unexpected character `{c}`") });
            }
        }
        end = (ln + 1, body.chars().count() + 1);
    }
    Ok(Lexer { toks, pos: 0, end })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn at(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.1, t.2)).unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.at();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn var_list(&mut self) -> Result<Vec<VarId>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 1.0 && *v <= MAX_VAR_ID as f64 => {
                    out.push(*v as VarId);
                    self.pos += 1;
                }
                _ => return Err(self.err(format!("expected a variable id in 1..={MAX_VAR_ID}"))),
            }
            if !matches!(self.peek(), Some(Tok::Punct(','))) {
                return Ok(out);
            }
            self.pos += 1;
        }
    }
}

/// Parses declarations followed by one expression.
pub fn parse_pipeline(text: &str) -> Result<(PipelineExpr, PropertyEnv)> {
    let mut lx = lex(text)?;
    let mut env = PropertyEnv::default();
    let mut e = PipelineExpr::new();
    loop {
        match (lx.peek(), lx.peek2()) {
            (Some(Tok::Ident(_)), Some(Tok::Punct(':'))) => {
                let name = lx.ident()?;
                lx.expect(':')?;
                let mut f = SymbolFlags::default();
                loop {
                    let flag = lx.ident()?;
                    match flag.as_str() {
                        "sm" | "smooth" => f.sm = true,
                        "dec" => f.dec = true,
                        "sd" => f.sd = true,
                        "det" => f.det = true,
                        "omni" => f.omni = true,
                        "lin" | "linear" => f.linear = true,
                        _ => {
                            lx.pos -= 1;
                            return Err(lx.err(format!("unknown property `{flag}`")));
                        }
                    }
                    if !matches!(lx.peek(), Some(Tok::Punct(','))) {
                        break;
                    }
                    lx.pos += 1;
                }
                lx.expect(';')?;
                env.declare(&name, f);
            }
            (Some(Tok::Ident(k)), Some(Tok::Punct('('))) if k == "cmp" => {
                lx.pos += 2;
                let mut names = vec![lx.ident()?];
                while matches!(lx.peek(), Some(Tok::Punct(','))) {
                    lx.pos += 1;
                    names.push(lx.ident()?);
                }
                lx.expect(')')?;
                lx.expect(';')?;
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                env.compatible(&refs);
            }
            (Some(Tok::Ident(k)), Some(Tok::Punct('('))) if k == "mdet" => {
                lx.pos += 2;
                let name = lx.ident()?;
                lx.expect(';')?;
                let vars = lx.var_list()?;
                lx.expect(')')?;
                lx.expect(';')?;
                env.marginal_det(&name, ScopeSet::from_ids(vars));
            }
            (None, _) => return Err(lx.err("expected an expression")),
            _ => break,
        }
    }
    let root = parse_expr(&mut lx, &mut e)?;
    if matches!(lx.peek(), Some(Tok::Punct(';'))) {
        lx.pos += 1;
    }
    if lx.peek().is_some() {
        return Err(lx.err("unexpected input after the expression"));
    }
    e.set_root(root);
    for s in e.symbols() {
        env.symbols.entry(s).or_default();
    }
    Ok((e, env))
}

enum Arg {
    Expr(usize, (usize, usize)),
    Num(f64),
}

fn parse_expr(lx: &mut Lexer, e: &mut PipelineExpr) -> Result<usize> {
    let at = lx.at();
    let name = lx.ident()?;
    if !matches!(lx.peek(), Some(Tok::Punct('('))) {
        return Ok(e.leaf(&name));
    }
    lx.pos += 1;
    let known = [
        "add", "mul", "div", "pow", "log", "exp", "supp", "marg", "integ", "entropy", "xent", "kld", "renyi", "alpha",
        "is", "cs", "sl", "mi", "expect",
    ];
    if !known.contains(&name.as_str()) {
        return Err(Error::UnknownOperation(name));
    }
    // sections separated by ';', items by ','
    let mut sections: Vec<Vec<Arg>> = vec![Vec::new()];
    let mut var_sections: Vec<Vec<VarId>> = Vec::new();
    let takes_vars = name == "marg" || name == "mi";
    loop {
        if matches!(lx.peek(), Some(Tok::Punct(')'))) && sections.len() == 1 && sections[0].is_empty() {
            lx.pos += 1;
            break;
        }
        if takes_vars && sections.len() > 1 {
            var_sections.push(lx.var_list()?);
        } else {
            let at = lx.at();
            let item = match lx.peek() {
                Some(Tok::Num(v)) => {
                    let v = *v;
                    lx.pos += 1;
                    Arg::Num(v)
                }
                _ => Arg::Expr(parse_expr(lx, e)?, at),
            };
            sections.last_mut().unwrap().push(item);
        }
        match lx.bump() {
            Some(Tok::Punct(',')) => {}
            Some(Tok::Punct(';')) => sections.push(Vec::new()),
            Some(Tok::Punct(')')) => break,
            _ => {
                lx.pos -= 1;
                return Err(lx.err("expected `,`, `;` or `)`"));
            }
        }
    }
    let arity = |msg: &str| Error::Arity(format!("{name}{msg} (at line {}, column {})", at.0, at.1));
    let exprs: Vec<(usize, (usize, usize))> =
        sections[0].iter().filter_map(|a| if let Arg::Expr(i, p) = a { Some((*i, *p)) } else { None }).collect();
    let nums: Vec<f64> = sections[0].iter().filter_map(|a| if let Arg::Num(v) = a { Some(*v) } else { None }).collect();
    let leading_exprs = sections[0].iter().take_while(|a| matches!(a, Arg::Expr(..))).count();
    if leading_exprs != exprs.len() {
        return Err(arity(" takes circuit arguments before numeric ones"));
    }
    for &(i, (l, c)) in &exprs {
        if e.is_scalar(i) {
            return Err(Error::Arity(format!(
                "`{}` is scalar and cannot be an argument of {name} (at line {l}, column {c})",
                e.text(i)
            )));
        }
    }
    let want = |ne: usize, nn: &[usize], nv: usize| -> Result<()> {
        if exprs.len() != ne || !nn.contains(&nums.len()) || var_sections.len() != nv {
            let n = if nn == [0] { String::new() } else { format!(" and {:?} numbers", nn) };
            let v = if nv == 0 { String::new() } else { format!(" and {nv} variable list(s)") };
            return Err(arity(&format!(" expects {ne} circuit argument(s){n}{v}")));
        }
        Ok(())
    };
    let args: Vec<usize> = exprs.iter().map(|a| a.0).collect();
    let op = match name.as_str() {
        "add" => {
            want(2, &[0, 2], 0)?;
            if nums.is_empty() {
                Op::Add(1.0, 1.0)
            } else {
                Op::Add(nums[0], nums[1])
            }
        }
        "mul" => {
            want(2, &[0], 0)?;
            Op::Mul
        }
        "div" => {
            want(2, &[0], 0)?;
            Op::Div
        }
        "pow" => {
            want(1, &[1], 0)?;
            Op::Pow(nums[0])
        }
        "log" | "exp" | "supp" | "integ" | "entropy" => {
            want(1, &[0], 0)?;
            match name.as_str() {
                "log" => Op::Log,
                "exp" => Op::Exp,
                "supp" => Op::Supp,
                "integ" => Op::Integ,
                _ => Op::Query(QueryKind::Entropy),
            }
        }
        "marg" => {
            want(1, &[0], 1)?;
            Op::Marg(var_sections[0].clone())
        }
        "xent" | "kld" | "is" | "cs" | "sl" | "expect" => {
            want(2, &[0], 0)?;
            Op::Query(match name.as_str() {
                "xent" => QueryKind::CrossEntropy,
                "kld" => QueryKind::Kld,
                "is" => QueryKind::ItakuraSaito,
                "cs" => QueryKind::CauchySchwarz,
                "sl" => QueryKind::SquaredLoss,
                _ => QueryKind::Expectation,
            })
        }
        "renyi" => {
            want(1, &[1], 0)?;
            Op::Query(QueryKind::Renyi(nums[0]))
        }
        "alpha" => {
            want(2, &[1], 0)?;
            Op::Query(QueryKind::Alpha(nums[0]))
        }
        _ => {
            want(1, &[0], 2)?;
            Op::Query(QueryKind::MutualInformation { x: var_sections[0].clone(), y: var_sections[1].clone() })
        }
    };
    Ok(e.node(op, args))
}
