//! TIR: a minimal textual three-address IR.
//!
//! A program is a set of classes holding methods; every statement carries a
//! label and one instruction. The grammar (whitespace-insensitive, `#` starts
//! a line comment):
//!
//! ```text
//! program  := class+
//! class    := "class" IDENT "{" method* "}"
//! method   := ["entry"] IDENT "(" [IDENT ("," IDENT)*] ")" "{" stmt+ "}"
//! stmt     := LABEL ":" instr
//! instr    := IDENT "=" rhs
//!           | "if" IDENT RELOP operand "goto" LABEL
//!           | "goto" LABEL
//!           | "return" [IDENT]
//!           | "call" callexpr
//!           | "setfield" IDENT "." IDENT "=" IDENT
//! rhs      := callexpr | IDENT | INT | STRING
//!           | "field" IDENT "." IDENT
//!           | IDENT BINOP operand
//! callexpr := IDENT "." IDENT "(" [IDENT ("," IDENT)*] ")"
//! operand  := IDENT | INT | STRING
//! ```
//!
//! `if` falls through to the next statement when false; the explicit goto
//! target is the true branch. [`parse_program`] validates structural
//! invariants (unique class names, unique `(class, method, arity)` triples,
//! goto targets defined, every method ends in `return` or `goto`, at least
//! one `entry` method) and [`emit_program`] prints a canonical form such
//! that `parse(emit(p)) == p` and re-emission is byte-identical.

mod ast;
mod emit;
mod lexer;
mod parser;

pub use ast::{
    BinOp, CallExpr, Class, Const, Instr, Method, MethodSig, Operand, Program, RelOp, Rhs, Stmt,
};
pub use emit::emit_program;
pub use parser::{parse_program, validate};

use thiserror::Error;

/// Parse or validation failure. Syntax errors carry the 1-based source
/// position of the offending token; validation errors name the offending
/// label or signature.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
}
