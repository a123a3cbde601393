//! The surface-definition language: lexer, parser, printer and jet evaluator.

mod ast;
mod eval;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{BinOp, Expr, SurfaceAst, UnaryFn, Var};
pub use eval::{eval_expr, eval_surface, EvalError};
pub use parser::{parse_expr, parse_surface, parse_surface_file};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("`{name}` at line {line}, column {column} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },
}
