//! Lexing, parsing and type checking of specification sources.

pub mod lexer;
pub mod parser;
pub mod surface;
pub mod typecheck;

use thiserror::Error;

pub use lexer::{tokenize, LexError, Spanned, Token};
pub use parser::{parse, parse_expr, ParseError};
pub use surface::{print_program, BinOp, SBinder, SExpr, SExprKind, SType, SurfaceDecl};
pub use typecheck::{typecheck, TypeError, TypedDecl, TypedProgram};

use crate::diagnostics::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Lex(e) => e.span,
            FrontendError::Parse(e) => e.span,
            FrontendError::Type(e) => e.span(),
        }
    }

    pub fn diagnostic(&self) -> Diagnostic {
        let text = self.to_string();
        // drop the leading "line:col: " that the individual errors carry
        let message = text.split_once(": ").map(|(_, m)| m.to_string()).unwrap_or(text);
        Diagnostic::error(Some(self.span()), message)
    }
}

/// Parses source text into surface declarations.
pub fn parse_source(source: &str) -> Result<Vec<SurfaceDecl>, FrontendError> {
    Ok(parse(&tokenize(source)?)?)
}

/// Runs the whole frontend.
pub fn load_program(source: &str) -> Result<TypedProgram, FrontendError> {
    Ok(typecheck(&parse_source(source)?)?)
}
