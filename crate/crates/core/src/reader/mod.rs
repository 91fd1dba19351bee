//! Prolog text reader and term writer.

mod lexer;
mod ops;
mod parser;
mod writer;

use std::fmt;

pub use lexer::{is_alnum, is_symbol_char};
pub use ops::{OpClass, OpDef, OpError, OpTable, OpType};
pub use writer::{fmt_atom, format_float, quote_atom, write_canonical, write_opts, write_prio, write_term, WriteOpts};

use crate::term::{Term, VarGen};
use lexer::{Lexer, Tok, Token};
use parser::Parser;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: syntax error: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug)]
pub struct ReadTerm {
    pub term: Term,
    pub var_names: Vec<(String, Term)>,
    /// Line of the first token of the clause.
    pub line: usize,
}

/// Reads successive clauses from a source text. The operator table is
/// passed per call so directives may change it between clauses.
pub struct TermReader {
    lexer: Lexer,
    gen: VarGen,
}

impl TermReader {
    pub fn new(src: &str) -> Self {
        TermReader { lexer: Lexer::new(src), gen: VarGen::new() }
    }

    pub fn with_vars(src: &str, gen: VarGen) -> Self {
        TermReader { lexer: Lexer::new(src), gen }
    }

    pub fn var_gen(&self) -> &VarGen {
        &self.gen
    }

    /// Tokens up to and including the next end token. On a lexical error
    /// the rest of the clause is skipped.
    fn clause_tokens(&mut self) -> Option<Result<Vec<Token>, SyntaxError>> {
        let mut toks = Vec::new();
        loop {
            match self.lexer.next_token() {
                Ok(None) => {
                    if toks.is_empty() {
                        return None;
                    }
                    let line = self.lexer.line();
                    return Some(Err(SyntaxError { line, col: 0, msg: "missing end of clause".into() }));
                }
                Ok(Some(t)) => {
                    let end = t.tok == Tok::End;
                    toks.push(t);
                    if end {
                        return Some(Ok(toks));
                    }
                }
                Err(e) => {
                    loop {
                        match self.lexer.next_token() {
                            Ok(None) => break,
                            Ok(Some(t)) if t.tok == Tok::End => break,
                            _ => {}
                        }
                    }
                    return Some(Err(e));
                }
            }
        }
    }

    pub fn next(&mut self, ops: &OpTable) -> Option<Result<ReadTerm, SyntaxError>> {
        let toks = match self.clause_tokens()? {
            Ok(t) => t,
            Err(e) => return Some(Err(e)),
        };
        let line = toks[0].line;
        let mut p = Parser::new(&toks, ops, &mut self.gen);
        let res = p.parse_clause();
        let var_names = std::mem::take(&mut p.var_names);
        Some(res.map(|term| ReadTerm { term, var_names, line }))
    }
}

/// Read every clause of a text with a fixed operator table.
pub fn read_all(src: &str, ops: &OpTable) -> Vec<Result<ReadTerm, SyntaxError>> {
    let mut r = TermReader::new(src);
    std::iter::from_fn(|| r.next(ops)).collect()
}

/// Parse a single term; the final end token is optional.
pub fn parse_term(src: &str, ops: &OpTable) -> Result<ReadTerm, SyntaxError> {
    let trimmed = src.trim_end();
    let text = if trimmed.ends_with('.') && !trimmed.ends_with("..") { format!("{trimmed}\n") } else { format!("{trimmed} .\n") };
    let mut r = TermReader::new(&text);
    let first = r.next(ops).unwrap_or_else(|| Err(SyntaxError { line: 1, col: 1, msg: "empty input".into() }))?;
    if r.next(ops).is_some() {
        return Err(SyntaxError { line: 1, col: 1, msg: "more than one term".into() });
    }
    Ok(first)
}
