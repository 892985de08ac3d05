//! Expression language and system-definition documents.

pub mod ast;
pub mod document;
pub mod lexer;
pub mod parser;

pub use ast::{BinOp, Expression, UnaryFn};
pub use document::{parse_system_definition, SystemDefinition, DEFAULT_DELTA, GAP_FLOOR};
pub use parser::{parse_expression, VarSpec};
