//! The rule engine: parser, local stratification, and fixpoint evaluation.

mod ast;
mod eval;
mod parse;
mod stratify;

pub use ast::{CmpOp, Constraint, Expr, Program, Rule};
pub use eval::{
    evaluate, EvalError, EvalOptions, Justification, Model, QueryError, Strategy,
};
pub use parse::{parse_goal, parse_program, ParseError};
pub use stratify::{stratify, StrataPlan, StratifyError, Stratum};
