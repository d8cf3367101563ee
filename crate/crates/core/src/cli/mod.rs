//! Command-line front end. Exit codes: 0 success, 1 usage or I/O failure,
//! 2 when a property precondition or the analyzer refuses.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analyzer::{analyze, execute, parse_pipeline, Verdict};
use crate::circuit::{
    check_property, enumeration_budget, evaluate, integrate, load, marginalize, save, smooth_transform,
    support_circuit, to_text, Circuit, FlagState, PropertyCheck, PropertyFlags, VarId, Which,
};
use crate::compile::{
    cnf_to_gadgets, forest_to_circuit, random_circuit, random_compatible_pair, random_mdet, regression_to_circuit, Cnf,
    Forest, RegressionCircuit,
};
use crate::error::{Error, Result};
use crate::ops::{
    exp_additive, log_circuit, multiply, multiply_with, natural_power, quotient, restricted_power, sum_circuits,
    uniform_circuit, MultiplyOptions, OpResult,
};
use crate::oracle::{dense_table, oracle_query, OracleQuery};
use crate::queries::{self, QueryReport};

#[derive(Parser, Debug)]
#[command(name = "pcq", version, about = "Tractable operations and queries over probabilistic circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report structural flags; --verify re-checks every claim by enumeration.
    Check {
        file: PathBuf,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply one circuit operation and write the result.
    Apply {
        op: ApplyOp,
        files: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Exponent for pow (natural when integral and >= 1).
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Natural exponent for pow.
        #[arg(long, conflicts_with = "alpha")]
        n: Option<u32>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        theta1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        theta2: f64,
        /// Variables to sum out for marg, e.g. 1,3.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<VarId>,
        /// Re-check every flag the result claims.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run an information-theoretic or expectation query.
    Query {
        kind: QueryCmd,
        files: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        x: Vec<VarId>,
        #[arg(long, value_delimiter = ',')]
        y: Vec<VarId>,
        /// Monomial degrees for moment, e.g. 1=2,3=1.
        #[arg(long, value_delimiter = ',')]
        k: Vec<String>,
        /// Divide the moment by the partition function.
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        bits: bool,
        #[arg(long)]
        json: bool,
    },
    /// Analyze a pipeline; with --bind name=file it is also executed.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        bind: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Translate a tree-ensemble JSON file into a circuit.
    CompileForest {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the two gadget circuits of a 3-CNF; --count prints the model count of their product.
    CompileCnf {
        file: PathBuf,
        /// Output prefix: writes PREFIX.beta.pc and PREFIX.gamma.pc.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        count: bool,
    },
    /// Translate a regression circuit into a circuit.
    CompileRgc {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded random circuit over binary variables 1..=vars.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Any of sd, det.
        #[arg(long, value_delimiter = ',')]
        flags: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write a second circuit compatible with the first.
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Generate a circuit whose marginals over X and over these variables stay deterministic.
        #[arg(long, value_delimiter = ',')]
        mdet: Vec<VarId>,
    },
    /// Brute-force reference computations.
    Oracle {
        #[command(subcommand)]
        command: OracleCmd,
    },
    /// Evaluate at a state, or integrate with optional evidence.
    Eval {
        file: PathBuf,
        /// Complete state by variable order, e.g. 0,1,1.
        #[arg(long, value_delimiter = ',')]
        state: Vec<usize>,
        /// Partial evidence, e.g. 1=0,3=1; the rest is integrated out.
        #[arg(long, value_delimiter = ',')]
        evidence: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCmd {
    /// Print the dense table.
    Eval {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Direct-summation value of a query.
    Query {
        kind: QueryCmd,
        files: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        x: Vec<VarId>,
        #[arg(long, value_delimiter = ',')]
        y: Vec<VarId>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<String>,
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        bits: bool,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ApplyOp {
    #[value(alias = "add")]
    Sum,
    Mul,
    Pow,
    Div,
    Log,
    Exp,
    #[value(alias = "support")]
    Supp,
    /// Constant --c over the variables of the input circuit.
    Uniform,
    Marg,
    Smooth,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum QueryCmd {
    Entropy,
    Renyi,
    Xent,
    Kld,
    Alpha,
    Is,
    Cs,
    #[value(alias = "sl")]
    Sql,
    Mi,
    Moment,
    Prob,
    Expred,
}

impl QueryCmd {
    fn arity(self) -> usize {
        match self {
            QueryCmd::Entropy | QueryCmd::Renyi | QueryCmd::Mi | QueryCmd::Moment => 1,
            _ => 2,
        }
    }

    fn logarithmic(self) -> bool {
        matches!(
            self,
            QueryCmd::Entropy
                | QueryCmd::Renyi
                | QueryCmd::Xent
                | QueryCmd::Kld
                | QueryCmd::Alpha
                | QueryCmd::Cs
                | QueryCmd::Mi
        )
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: i32,
    error: Option<Error>,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_refusal() { 2 } else { 1 }, message: e.to_string(), error: Some(e) }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, error: None, message: message.into() }
}

type Out<'a> = &'a mut dyn Write;

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let json = matches!(
        cli.command,
        Command::Check { json: true, .. }
            | Command::Apply { json: true, .. }
            | Command::Query { json: true, .. }
            | Command::Analyze { json: true, .. }
    );
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            if json {
                let mut v =
                    json!({ "error": f.error.as_ref().map(|e| e.kind()).unwrap_or("Refused"), "message": f.message });
                if let Some(c) = f.error.as_ref().and_then(|e| e.citation()) {
                    v["citation"] = json!(c);
                }
                let _ = writeln!(err, "{v}");
            } else {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::from(Error::Io(e))
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => forest_to_circuit(&Forest::load(path)?),
        Some("rgc") => regression_to_circuit(&RegressionCircuit::load(path)?),
        _ => load(path),
    }
}

fn emit(c: &Circuit, path: Option<&Path>, out: Out) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => save(c, p).map_err(Failure::from),
        None => out.write_all(to_text(c).as_bytes()).map_err(io),
    }
}

fn pairs(items: &[String], what: &str) -> Result<Vec<(VarId, usize)>> {
    items
        .iter()
        .map(|s| {
            let (a, b) =
                s.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("{what} `{s}` is not var=value")))?;
            let v = a.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad variable id in `{s}`")))?;
            let x = b.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad value in `{s}`")))?;
            Ok((v, x))
        })
        .collect()
}

fn want_files(files: &[PathBuf], n: usize, what: &str) -> std::result::Result<(), Failure> {
    if files.len() != n {
        return Err(fail(1, format!("{what} takes {n} file(s), got {}", files.len())));
    }
    Ok(())
}

fn verify_flags(r: &OpResult) -> std::result::Result<(), Failure> {
    for w in Which::ALL {
        if !r.flags.get(w).holds() {
            continue;
        }
        if let PropertyCheck::False { witness } = check_property(&r.circuit, w)? {
            let detail = format!("claimed {} fails: {witness}", w.property().name());
            return Err(Error::violation(w.property(), None, detail).into());
        }
    }
    Ok(())
}

fn flag_json(f: &PropertyFlags) -> serde_json::Value {
    serde_json::to_value(f).unwrap_or_default()
}

fn dispatch(cmd: Command, out: Out) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Check { file, verify, json } => check(&file, verify, json, out),
        Command::Apply { op, files, out: path, alpha, n, c, theta1, theta2, vars, verify, json } => {
            let need = if matches!(op, ApplyOp::Sum | ApplyOp::Mul | ApplyOp::Div) { 2 } else { 1 };
            want_files(&files, need, "this operation")?;
            let cs: Vec<Circuit> = files.iter().map(|f| read_circuit(f)).collect::<Result<_>>()?;
            let r: OpResult = match op {
                ApplyOp::Sum => sum_circuits(&cs[0], &cs[1], theta1, theta2)?,
                ApplyOp::Mul => multiply(&cs[0], &cs[1])?,
                ApplyOp::Div => quotient(&cs[0], &cs[1])?,
                ApplyOp::Pow => {
                    let a = alpha.or(n.map(f64::from)).ok_or_else(|| fail(1, "pow needs --alpha or --n"))?;
                    if a.fract() == 0.0 && a >= 1.0 {
                        natural_power(&cs[0], a as u32)?
                    } else {
                        restricted_power(&cs[0], a)?
                    }
                }
                ApplyOp::Log => log_circuit(&cs[0])?,
                ApplyOp::Exp => exp_additive(&cs[0])?,
                ApplyOp::Supp => OpResult::new(support_circuit(&cs[0])?, 0),
                ApplyOp::Marg => OpResult::new(marginalize(&cs[0], &vars)?, 0),
                ApplyOp::Smooth => OpResult::new(smooth_transform(&cs[0])?, 0),
                ApplyOp::Uniform => OpResult::new(uniform_circuit(cs[0].vars(), c)?, 0),
            };
            if verify {
                verify_flags(&r)?;
            }
            if json {
                let v = json!({ "flags": flag_json(&r.flags), "stats": r.stats, "circuit": to_text(&r.circuit) });
                if let Some(p) = &path {
                    save(&r.circuit, p)?;
                }
                writeln!(out, "{v}").map_err(io)
            } else {
                emit(&r.circuit, path.as_deref(), out)
            }
        }
        Command::Query { kind, files, alpha, x, y, k, normalized, bits, json } => {
            want_files(&files, kind.arity(), "this query")?;
            let cs: Vec<Circuit> = files.iter().map(|f| read_circuit(f)).collect::<Result<_>>()?;
            let r = run_query(kind, &cs, alpha, &x, &y, &k, normalized)?;
            let scale = if bits && kind.logarithmic() { 1.0 / std::f64::consts::LN_2 } else { 1.0 };
            if json {
                let mut v = serde_json::to_value(&r).map_err(|e| fail(1, e.to_string()))?;
                v["value"] = json!(r.value * scale);
                v["unit"] = json!(if !kind.logarithmic() {
                    "none"
                } else if bits {
                    "bits"
                } else {
                    "nats"
                });
                writeln!(out, "{v}").map_err(io)
            } else {
                writeln!(out, "{}", r.value * scale).map_err(io)
            }
        }
        Command::Analyze { file, bind, json } => {
            let text = std::fs::read_to_string(&file).map_err(io)?;
            let (e, env) = parse_pipeline(&text)?;
            let v = analyze(&e, &env);
            if let Verdict::Hard(h) = &v {
                if json {
                    writeln!(out, "{}", serde_json::to_string(&v).unwrap_or_default()).map_err(io)?;
                }
                return Err(fail(
                    2,
                    format!("hard: {} at `{}` lacks {} [{}]", h.operation, h.expr, h.missing, h.citation),
                ));
            }
            let Verdict::Plan(plan) = &v else { unreachable!() };
            let mut value = None;
            if !bind.is_empty() {
                let mut b = HashMap::new();
                for s in &bind {
                    let (name, path) =
                        s.split_once('=').ok_or_else(|| fail(1, format!("--bind `{s}` is not name=file")))?;
                    b.insert(name.to_string(), read_circuit(Path::new(path))?);
                }
                value = Some(execute(&e, &b)?);
            }
            if json {
                let mut j = serde_json::to_value(&v).map_err(|e| fail(1, e.to_string()))?;
                if let Some(x) = &value {
                    match &x.value {
                        crate::analyzer::Value::Scalar(s) => j["value"] = json!(s),
                        crate::analyzer::Value::Circuit(c) => j["circuit"] = json!(to_text(c)),
                    }
                    j["steps"] = serde_json::to_value(&x.steps).unwrap_or_default();
                }
                writeln!(out, "{j}").map_err(io)
            } else {
                writeln!(out, "plan {}", plan.cost).map_err(io)?;
                for n in &plan.nodes {
                    writeln!(out, "  {:<40} size {:<16} step {}", n.expr, n.size.to_string(), n.step_cost)
                        .map_err(io)?;
                }
                match value.map(|x| x.value) {
                    Some(crate::analyzer::Value::Scalar(s)) => writeln!(out, "value {s}").map_err(io),
                    Some(crate::analyzer::Value::Circuit(c)) => out.write_all(to_text(&c).as_bytes()).map_err(io),
                    None => Ok(()),
                }
            }
        }
        Command::CompileForest { file, out: path } => {
            let c = forest_to_circuit(&Forest::load(&file)?)?;
            emit(&c, path.as_deref(), out)
        }
        Command::CompileRgc { file, out: path } => {
            let c = regression_to_circuit(&RegressionCircuit::load(&file)?)?;
            emit(&c, path.as_deref(), out)
        }
        Command::CompileCnf { file, out: path, count } => {
            let f = Cnf::load(&file)?;
            let (pb, pg) = cnf_to_gadgets(&f)?;
            match &path {
                Some(prefix) => {
                    let s = prefix.to_string_lossy();
                    save(&pb, format!("{s}.beta.pc"))?;
                    save(&pg, format!("{s}.gamma.pc"))?;
                }
                None if !count => {
                    emit(&pb, None, out)?;
                    emit(&pg, None, out)?;
                }
                None => {}
            }
            if count {
                let m = multiply_with(&pb, &pg, &MultiplyOptions { enumerate_fallback: Some(enumeration_budget()) })?;
                let n = integrate(&m.circuit, &vec![None; m.circuit.vars().len()])?;
                writeln!(out, "{n}").map_err(io)?;
            }
            Ok(())
        }
        Command::Gen { vars, seed, flags, out: path, pair, mdet } => {
            let mut want = PropertyFlags::default();
            for f in &flags {
                match Which::parse(f) {
                    Some(Which::Structured) => want.structured = FlagState::Verified,
                    Some(Which::Deterministic) => want.deterministic = FlagState::Verified,
                    Some(_) => {}
                    None => return Err(fail(1, format!("unknown flag `{f}` (use sd, det)"))),
                }
            }
            if !mdet.is_empty() {
                let x: Vec<VarId> = (1..=vars as VarId).filter(|v| !mdet.contains(v)).collect();
                let c = random_mdet(seed, &x, &mdet)?;
                return emit(&c, path.as_deref(), out);
            }
            match pair {
                Some(second) => {
                    let (p, q) = random_compatible_pair(seed, vars, &want)?;
                    save(&q, &second)?;
                    emit(&p, path.as_deref(), out)
                }
                None => emit(&random_circuit(seed, vars, &want)?, path.as_deref(), out),
            }
        }
        Command::Oracle { command } => match command {
            OracleCmd::Eval { file, budget } => {
                let c = read_circuit(&file)?;
                let t = dense_table(&c, budget.unwrap_or_else(enumeration_budget))?;
                for i in 0..t.len() {
                    let s: Vec<String> = t.state(i).iter().map(|x| x.to_string()).collect();
                    writeln!(out, "{} {}", s.join(","), t.values[i]).map_err(io)?;
                }
                Ok(())
            }
            OracleCmd::Query { kind, files, alpha, x, y, k, normalized, budget, bits } => {
                want_files(&files, kind.arity(), "this query")?;
                let cs: Vec<Circuit> = files.iter().map(|f| read_circuit(f)).collect::<Result<_>>()?;
                let b = budget.unwrap_or_else(enumeration_budget);
                let q = match kind {
                    QueryCmd::Entropy => OracleQuery::Entropy,
                    QueryCmd::Renyi => OracleQuery::Renyi(alpha.ok_or_else(|| fail(1, "renyi needs --alpha"))?),
                    QueryCmd::Xent => OracleQuery::CrossEntropy,
                    QueryCmd::Kld => OracleQuery::Kld,
                    QueryCmd::Alpha => OracleQuery::Alpha(alpha.ok_or_else(|| fail(1, "alpha needs --alpha"))?),
                    QueryCmd::Is => OracleQuery::ItakuraSaito,
                    QueryCmd::Cs => OracleQuery::CauchySchwarz,
                    QueryCmd::Sql => OracleQuery::SquaredLoss,
                    QueryCmd::Mi => OracleQuery::MutualInformation { x, y },
                    QueryCmd::Moment => OracleQuery::Moment { k: degrees(&k)?, normalized },
                    QueryCmd::Prob | QueryCmd::Expred => OracleQuery::Expectation,
                };
                let v = if cs.len() == 2 {
                    let vars = Circuit::merge_vars(cs[0].vars(), cs[1].vars())?;
                    let tp = dense_table(&cs[0], b)?.extend(&vars)?;
                    let tq = dense_table(&cs[1], b)?.extend(&vars)?;
                    oracle_query(&q, &[&tp, &tq])?
                } else {
                    oracle_query(&q, &[&dense_table(&cs[0], b)?])?
                };
                let scale = if bits && kind.logarithmic() { 1.0 / std::f64::consts::LN_2 } else { 1.0 };
                writeln!(out, "{}", v * scale).map_err(io)
            }
        },
        Command::Eval { file, state, evidence } => {
            let c = read_circuit(&file)?;
            let v = if !state.is_empty() {
                evaluate(&c, &state)?
            } else {
                let mut ev = vec![None; c.vars().len()];
                for (var, x) in pairs(&evidence, "evidence")? {
                    let i = c
                        .var_index(var)
                        .ok_or_else(|| Error::InvalidAssignment(format!("X{var} is not a variable of the circuit")))?;
                    ev[i] = Some(x);
                }
                integrate(&c, &ev)?
            };
            writeln!(out, "{v}").map_err(io)
        }
    }
}

fn degrees(k: &[String]) -> Result<Vec<(VarId, u32)>> {
    pairs(k, "degree").map(|v| v.into_iter().map(|(a, d)| (a, d as u32)).collect())
}

fn run_query(
    kind: QueryCmd,
    cs: &[Circuit],
    alpha: Option<f64>,
    x: &[VarId],
    y: &[VarId],
    k: &[String],
    normalized: bool,
) -> std::result::Result<QueryReport, Failure> {
    let need_alpha = || alpha.ok_or_else(|| fail(1, "this query needs --alpha"));
    Ok(match kind {
        QueryCmd::Entropy => queries::shannon_entropy(&cs[0])?,
        QueryCmd::Renyi => queries::renyi_entropy(&cs[0], need_alpha()?)?,
        QueryCmd::Xent => queries::cross_entropy(&cs[0], &cs[1])?,
        QueryCmd::Kld => queries::kld(&cs[0], &cs[1])?,
        QueryCmd::Alpha => queries::alpha_divergence(&cs[0], &cs[1], need_alpha()?)?,
        QueryCmd::Is => queries::itakura_saito(&cs[0], &cs[1])?,
        QueryCmd::Cs => queries::cauchy_schwarz(&cs[0], &cs[1])?,
        QueryCmd::Sql => queries::squared_loss(&cs[0], &cs[1])?,
        QueryCmd::Mi => queries::mutual_information(&cs[0], x, y)?,
        QueryCmd::Moment => queries::moment(&cs[0], &degrees(k)?, normalized)?,
        QueryCmd::Prob => queries::formula_probability(&cs[0], &cs[1])?,
        QueryCmd::Expred => queries::expected_prediction(&cs[0], &cs[1])?,
    })
}

fn check(file: &Path, verify: bool, json: bool, out: Out) -> std::result::Result<(), Failure> {
    let c = read_circuit(file)?;
    let f = *c.flags();
    let mut rows = Vec::new();
    let mut failed: Option<(Which, String)> = None;
    for w in Which::ALL {
        let claim = f.get(w);
        let status = if verify || claim == FlagState::Unknown {
            match check_property(&c, w) {
                Ok(PropertyCheck::False { witness }) => {
                    if claim.holds() && failed.is_none() {
                        failed = Some((w, witness.to_string()));
                    }
                    json!({ "claim": claim, "check": "false", "witness": witness })
                }
                Ok(PropertyCheck::Verified) => json!({ "claim": claim, "check": "verified" }),
                Ok(PropertyCheck::Certified) => json!({ "claim": claim, "check": "certified" }),
                Err(Error::BudgetExceeded { .. }) => json!({ "claim": claim, "check": "over budget" }),
                Err(e) => return Err(e.into()),
            }
        } else {
            json!({ "claim": claim })
        };
        rows.push((w, status));
    }
    if json {
        let mut v = json!({ "units": c.num_units(), "edges": c.num_edges(), "mode": c.mode(), "omni": f.omni });
        for (w, s) in &rows {
            v[w.property().name()] = s.clone();
        }
        writeln!(out, "{v}").map_err(io)?;
    } else {
        writeln!(out, "units {} edges {} mode {:?}", c.num_units(), c.num_edges(), c.mode()).map_err(io)?;
        for (w, s) in &rows {
            let claim = s["claim"].as_str().unwrap_or("");
            let check = s.get("check").and_then(|x| x.as_str()).map(|x| format!(" ({x})")).unwrap_or_default();
            writeln!(out, "{:<24} {claim}{check}", w.property().name()).map_err(io)?;
        }
    }
    if let Some((w, witness)) = failed {
        let e = Error::violation(w.property(), None, format!("declared {} fails: {witness}", w.property().name()));
        return Err(e.into());
    }
    Ok(())
}
