use super::lexer::{Tok, Token};
use super::{OpTable, SyntaxError};
use crate::term::{Term, VarGen};

pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    ops: &'a OpTable,
    gen: &'a mut VarGen,
    pub var_names: Vec<(String, Term)>,
}

fn is_term_end(t: Option<&Tok>) -> bool {
    matches!(t, None | Some(Tok::Close | Tok::CloseList | Tok::CloseCurly | Tok::Comma | Tok::Bar | Tok::End))
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token], ops: &'a OpTable, gen: &'a mut VarGen) -> Self {
        Parser { toks, pos: 0, ops, gen, var_names: Vec::new() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_tok(&self, k: usize) -> Option<&Token> {
        self.toks.get(self.pos + k)
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (0, 0),
        };
        SyntaxError { line, col, msg: msg.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    /// Parse a full clause term up to and including the end token.
    pub fn parse_clause(&mut self) -> Result<Term, SyntaxError> {
        let t = self.parse(1200)?;
        match self.peek() {
            Some(Tok::End) => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.err("operator expected")),
        }
    }

    pub fn parse(&mut self, max: u16) -> Result<Term, SyntaxError> {
        let (t, _) = self.parse_prec(max)?;
        Ok(t)
    }

    fn infix_name(&self) -> Option<String> {
        match self.peek()? {
            Tok::Name(n) | Tok::QName(n) => Some(n.clone()),
            Tok::Comma => Some(",".into()),
            Tok::Bar => Some("|".into()),
            _ => None,
        }
    }

    fn parse_prec(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let (mut left, mut left_pri) = self.primary(max)?;
        while let Some(name) = self.infix_name() {
            let infix = if name == "," { Some(OpTable::comma()) } else { self.ops.infix(&name) };
            if let Some(def) = infix {
                let (lp, rp) = def.arg_priorities();
                if def.priority <= max && left_pri <= lp {
                    let save = self.pos;
                    self.pos += 1;
                    match self.parse_prec(rp) {
                        Ok((right, _)) => {
                            let f = if name == "|" { ";".to_string() } else { name };
                            left = Term::Compound(f, vec![left, right]);
                            left_pri = def.priority;
                            continue;
                        }
                        Err(e) => {
                            if self.ops.postfix(&name).is_none() {
                                return Err(e);
                            }
                            self.pos = save;
                        }
                    }
                }
            }
            if let Some(def) = self.ops.postfix(&name) {
                let (lp, _) = def.arg_priorities();
                if def.priority <= max && left_pri <= lp {
                    self.pos += 1;
                    left = Term::Compound(name, vec![left]);
                    left_pri = def.priority;
                    continue;
                }
            }
            break;
        }
        Ok((left, left_pri))
    }

    fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            return self.gen.fresh("_");
        }
        if let Some((_, t)) = self.var_names.iter().find(|(n, _)| n == name) {
            return t.clone();
        }
        let t = self.gen.fresh(name);
        self.var_names.push((name.to_string(), t.clone()));
        t
    }

    fn arglist(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.parse(999)?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.parse(999)?);
        }
        self.expect(Tok::Close, "')'")?;
        Ok(args)
    }

    fn primary(&mut self, max: u16) -> Result<(Term, u16), SyntaxError> {
        let Some(tok) = self.peek().cloned() else { return Err(self.err("unexpected end of clause")) };
        self.pos += 1;
        match tok {
            Tok::Int(n) => Ok((Term::Int(n), 0)),
            Tok::Float(x) => Ok((Term::Float(x), 0)),
            Tok::Var(v) => Ok((self.var(&v), 0)),
            Tok::Str(s) => Ok((Term::list(s.chars().map(|c| Term::Int(c as i64)).collect()), 0)),
            Tok::Open(_) => {
                let t = self.parse(1200)?;
                self.expect(Tok::Close, "')'")?;
                Ok((t, 0))
            }
            Tok::OpenList => {
                if self.peek() == Some(&Tok::CloseList) {
                    self.pos += 1;
                    return self.after_name("[]".into(), max, false);
                }
                let mut items = vec![self.parse(999)?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek() == Some(&Tok::Bar) {
                    self.pos += 1;
                    self.parse(999)?
                } else {
                    Term::nil()
                };
                self.expect(Tok::CloseList, "']'")?;
                Ok((Term::list_from(items, tail), 0))
            }
            Tok::OpenCurly => {
                if self.peek() == Some(&Tok::CloseCurly) {
                    self.pos += 1;
                    return self.after_name("{}".into(), max, false);
                }
                let t = self.parse(1200)?;
                self.expect(Tok::CloseCurly, "'}'")?;
                Ok((Term::Compound("{}".into(), vec![t]), 0))
            }
            Tok::Name(n) => {
                if n == "-" {
                    if let Some(next) = self.peek_tok(0) {
                        if !next.layout_before {
                            match next.tok {
                                Tok::Int(v) => {
                                    self.pos += 1;
                                    return Ok((Term::Int(-v), 0));
                                }
                                Tok::Float(v) => {
                                    self.pos += 1;
                                    return Ok((Term::Float(-v), 0));
                                }
                                _ => {}
                            }
                        }
                    }
                }
                self.after_name(n, max, true)
            }
            Tok::QName(n) => self.after_name(n, max, true),
            Tok::Bar => self.after_name("|".into(), max, false),
            Tok::Comma => Err(self.err("unexpected ','")),
            Tok::End => Err(self.err("unexpected end of clause")),
            Tok::Close | Tok::CloseList | Tok::CloseCurly => Err(self.err("unexpected closing bracket")),
        }
    }

    fn after_name(&mut self, name: String, max: u16, may_be_op: bool) -> Result<(Term, u16), SyntaxError> {
        if self.peek() == Some(&Tok::Open(true)) {
            self.pos += 1;
            let args = self.arglist()?;
            return Ok((Term::Compound(name, args), 0));
        }
        let atom_pri = |ops: &OpTable| {
            let p = [ops.prefix(&name), ops.infix(&name), ops.postfix(&name)]
                .into_iter()
                .flatten()
                .map(|d| d.priority)
                .max()
                .unwrap_or(0);
            if p > max { 0 } else { p }
        };
        if !may_be_op {
            return Ok((Term::Atom(name), 0));
        }
        let Some(def) = self.ops.prefix(&name) else {
            return Ok((Term::Atom(name.clone()), atom_pri(self.ops)));
        };
        let next = self.peek();
        let next_is_infix = match next {
            Some(Tok::Name(n)) | Some(Tok::QName(n)) => {
                (self.ops.infix(n).is_some() || self.ops.postfix(n).is_some())
                    && self.ops.prefix(n).is_none()
                    && self.peek_tok(1).map(|t| &t.tok) != Some(&Tok::Open(true))
            }
            _ => false,
        };
        if is_term_end(next) || next_is_infix {
            return Ok((Term::Atom(name.clone()), atom_pri(self.ops)));
        }
        let (mut pri, mut arg_max) = (def.priority, def.arg_priorities().1);
        if pri > max {
            pri = 999;
            arg_max = arg_max.min(999);
        }
        let save = self.pos;
        let save_vars = self.var_names.len();
        match self.parse_prec(arg_max) {
            Ok((arg, _)) => Ok((Term::Compound(name, vec![arg]), pri)),
            Err(e) => {
                self.pos = save;
                self.var_names.truncate(save_vars);
                if is_term_end(self.peek()) {
                    Ok((Term::Atom(name), 0))
                } else {
                    Err(e)
                }
            }
        }
    }
}
