//! Static tractability analysis of query pipelines, and their execution.

mod cost;
mod exec;
mod expr;
mod rules;

pub use cost::{Cost, Monomial};
pub use exec::{execute, Execution, StepCost, Value};
pub use expr::{parse_pipeline, ExprNode, Op, PipelineExpr, PropertyEnv, SymbolFlags};
pub use rules::{analyze, Hard, NodeReport, Plan, Row, Verdict, OPERATION_ROWS, QUERY_ROWS};
