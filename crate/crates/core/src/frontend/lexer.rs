//! Tokeniser for specification source text.

use std::fmt;

use thiserror::Error;

use crate::diagnostics::Span;
use crate::scalar::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    KwNetwork,
    KwType,
    KwForall,
    KwExists,
    KwIf,
    KwThen,
    KwElse,
    KwAnd,
    KwOr,
    KwNot,
    KwLet,
    KwIn,
    KwTrue,
    KwFalse,
    Ident(String),
    Nat(u64),
    Decimal(Rational),
    Plus,
    Minus,
    Star,
    Slash,
    OpLe,
    OpGe,
    OpLt,
    OpGt,
    OpEq,
    Bang,
    Arrow,
    Implies,
    Colon,
    Equals,
    Dot,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Token::KwNetwork => "network",
            Token::KwType => "type",
            Token::KwForall => "forall",
            Token::KwExists => "exists",
            Token::KwIf => "if",
            Token::KwThen => "then",
            Token::KwElse => "else",
            Token::KwAnd => "and",
            Token::KwOr => "or",
            Token::KwNot => "not",
            Token::KwLet => "let",
            Token::KwIn => "in",
            Token::KwTrue => "True",
            Token::KwFalse => "False",
            Token::Ident(name) => return write!(f, "identifier `{name}`"),
            Token::Nat(n) => return write!(f, "number {n}"),
            Token::Decimal(q) => return write!(f, "number {q}"),
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::Slash => "/",
            Token::OpLe => "<=",
            Token::OpGe => ">=",
            Token::OpLt => "<",
            Token::OpGt => ">",
            Token::OpEq => "==",
            Token::Bang => "!",
            Token::Arrow => "->",
            Token::Implies => "=>",
            Token::Colon => ":",
            Token::Equals => "=",
            Token::Dot => ".",
            Token::Comma => ",",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::LParen => "(",
            Token::RParen => ")",
        };
        write!(f, "`{text}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn keyword(word: &str) -> Option<Token> {
    Some(match word {
        "network" => Token::KwNetwork,
        "type" => Token::KwType,
        "forall" => Token::KwForall,
        "exists" => Token::KwExists,
        "if" => Token::KwIf,
        "then" => Token::KwThen,
        "else" => Token::KwElse,
        "and" => Token::KwAnd,
        "or" => Token::KwOr,
        "not" => Token::KwNot,
        "let" => Token::KwLet,
        "in" => Token::KwIn,
        "True" => Token::KwTrue,
        "False" => Token::KwFalse,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Spanned>, LexError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek2() == Some('-') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '{' && cur.peek2() == Some('-') {
            cur.bump();
            cur.bump();
            let mut depth = 1;
            loop {
                match cur.bump() {
                    None => {
                        return Err(LexError { span, message: "unterminated block comment".into() })
                    }
                    Some('-') if cur.peek() == Some('}') => {
                        cur.bump();
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    Some('{') if cur.peek() == Some('-') => {
                        cur.bump();
                        depth += 1;
                    }
                    Some(_) => {}
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let token = keyword(&word).unwrap_or(Token::Ident(word));
            out.push(Spanned { token, span });
            continue;
        }
        if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let is_decimal = cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit());
            let token = if is_decimal {
                text.push('.');
                cur.bump();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                Token::Decimal(parse_rational(&text).expect("digits form a decimal"))
            } else {
                let value = text.parse::<u64>().map_err(|_| LexError {
                    span,
                    message: format!("numeric literal `{text}` is too large"),
                })?;
                Token::Nat(value)
            };
            out.push(Spanned { token, span });
            continue;
        }
        cur.bump();
        let next = cur.peek();
        let two = |cur: &mut Cursor, t: Token| {
            cur.bump();
            t
        };
        let token = match (c, next) {
            ('<', Some('=')) => two(&mut cur, Token::OpLe),
            ('>', Some('=')) => two(&mut cur, Token::OpGe),
            ('=', Some('=')) => two(&mut cur, Token::OpEq),
            ('=', Some('>')) => two(&mut cur, Token::Implies),
            ('-', Some('>')) => two(&mut cur, Token::Arrow),
            ('<', _) => Token::OpLt,
            ('>', _) => Token::OpGt,
            ('=', _) => Token::Equals,
            ('+', _) => Token::Plus,
            ('-', _) => Token::Minus,
            ('*', _) => Token::Star,
            ('/', _) => Token::Slash,
            ('!', _) => Token::Bang,
            (':', _) => Token::Colon,
            ('.', _) => Token::Dot,
            (',', _) => Token::Comma,
            ('[', _) => Token::LBracket,
            (']', _) => Token::RBracket,
            ('(', _) => Token::LParen,
            (')', _) => Token::RParen,
            (other, _) => {
                return Err(LexError { span, message: format!("unrecognised character `{other}`") })
            }
        };
        out.push(Spanned { token, span });
    }
    Ok(out)
}
