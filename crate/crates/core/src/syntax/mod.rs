//! Lexing, layout, parsing and multi-file loading of LambdaM sources.

pub mod ast;
pub mod layout;
pub mod lexer;
pub mod loader;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use lexer::{lex, Tok, Token};
pub use loader::{default_search_paths, load_program, load_source, LoadError};
pub use parser::{parse_expr, parse_module, parse_type};
pub use pretty::{print_module, print_term, print_type_expr};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{span}: lexical error: unexpected `{found}`")]
    Lex { span: Span, found: String },
    #[error("{span}: parse error: expected {}, found {found}", expected.join(" or "))]
    Parse {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
}

impl SyntaxError {
    pub fn span(&self) -> &Span {
        match self {
            SyntaxError::Lex { span, .. } | SyntaxError::Parse { span, .. } => span,
        }
    }
}

/// Lexes and parses one module.
pub fn parse_source(module: &str, file: &str, source: &str) -> Result<SurfaceModule, SyntaxError> {
    parse_module(module, lex(file, source)?)
}
