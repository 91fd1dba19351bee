//! Queries from the host and the interactive top-level.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::machine::*;
use super::word::Word;
use crate::reader::{parse_term, ReadTerm};
use crate::term::Term;

/// An open query: its barrier and the heap cells of its named variables.
#[derive(Debug)]
pub struct Query {
    barrier: usize,
    vars: Vec<(String, usize)>,
    started: bool,
    done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryError {
    Syntax(String),
    /// Uncaught exception, printed with `writeq/1`.
    Uncaught(String),
    Halt(i32),
    Fatal(String),
}

impl std::fmt::Display for QueryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QueryError::Syntax(s) => write!(f, "syntax error: {s}"),
            QueryError::Uncaught(s) => write!(f, "uncaught exception: {s}"),
            QueryError::Halt(n) => write!(f, "halt({n})"),
            QueryError::Fatal(s) => write!(f, "fatal error: {s}"),
        }
    }
}

impl Machine {
    fn query_error(&self, e: PlError) -> QueryError {
        match e {
            PlError::Throw(t) => QueryError::Uncaught(self.format_sterm(&t, true)),
            PlError::Halt(n) => QueryError::Halt(n),
            PlError::Fatal(s) => QueryError::Fatal(s),
        }
    }

    /// Put a read goal on the heap and prepare to run it.
    pub fn start_query(&mut self, rt: &ReadTerm) -> Query {
        let mut map = HashMap::new();
        let g = self.put_term(&rt.term, &mut map);
        let mut vars = Vec::new();
        for (name, t) in &rt.var_names {
            if let Term::Var(v) = t {
                if let Some(Word::Ref(a)) = map.get(&v.id) {
                    vars.push((name.clone(), *a));
                }
            }
        }
        self.x[0] = g;
        Query { barrier: self.local_top(), vars, started: false, done: false }
    }

    /// Next solution of `q`; `false` once exhausted.
    pub fn next(&mut self, q: &mut Query) -> Result<bool, QueryError> {
        if q.done {
            return Ok(false);
        }
        let r = if q.started {
            self.next_solution()
        } else {
            q.started = true;
            self.var_names = q.vars.clone();
            let entry = self.call1.expect("call/1 linked");
            self.open_query(entry)
        };
        match r {
            Ok(true) => Ok(true),
            Ok(false) => {
                q.done = true;
                Ok(false)
            }
            Err(e) => {
                q.done = true;
                Err(self.query_error(e))
            }
        }
    }

    /// Whether the last solution of `q` left alternatives.
    pub fn has_alternatives(&self, q: &Query) -> bool {
        !q.done && self.b > q.barrier
    }

    /// Bindings of the named variables as `writeq/1` text, skipping
    /// unbound variables and names starting with `_`.
    pub fn bindings(&self, q: &Query) -> Vec<(String, String)> {
        let names: HashMap<usize, String> = q.vars.iter().map(|(n, a)| (*a, n.clone())).collect();
        let mut out = Vec::new();
        for (name, a) in &q.vars {
            if name.starts_with('_') {
                continue;
            }
            let w = self.deref(Word::Ref(*a));
            if w == Word::Ref(*a) {
                continue;
            }
            let t = self.to_term(w, &names);
            let opts = crate::reader::WriteOpts { quoted: true, ignore_ops: false, numbervars: true };
            out.push((name.clone(), crate::reader::write_prio(&t, &self.ops, opts, 699)));
        }
        out
    }

    /// Discard the query's choice points, bindings and heap.
    pub fn close(&mut self, q: Query) {
        if q.started && !q.done {
            let b = q.barrier;
            self.restore_cp(b);
            self.b = self.prev_b(b);
        }
        self.var_names.clear();
    }

    /// All solutions of a goal text, each as its variable bindings.
    pub fn solve_all(&mut self, goal: &str, max: usize) -> Result<Vec<Vec<(String, String)>>, QueryError> {
        let rt = parse_term(goal, &self.ops).map_err(|e| QueryError::Syntax(e.to_string()))?;
        let mut q = self.start_query(&rt);
        let mut out = Vec::new();
        while out.len() < max {
            match self.next(&mut q) {
                Ok(true) => out.push(self.bindings(&q)),
                Ok(false) => break,
                Err(e) => {
                    self.close(q);
                    return Err(e);
                }
            }
        }
        self.close(q);
        Ok(out)
    }

    /// Whether a goal text has a solution.
    pub fn succeeds(&mut self, goal: &str) -> Result<bool, QueryError> {
        Ok(!self.solve_all(goal, 1)?.is_empty())
    }

    /// The interactive loop. Returns the exit code.
    pub fn repl(&mut self) -> i32 {
        loop {
            let _ = write!(self.out, "| ?- ");
            let _ = self.out.flush();
            let rt = match self.read_clause() {
                Ok(Some(rt)) => rt,
                Ok(None) => {
                    let _ = writeln!(self.out);
                    return 0;
                }
                Err(e) => {
                    let _ = writeln!(self.err, "{e}");
                    continue;
                }
            };
            if let Some(code) = self.repl_query(rt) {
                return code;
            }
        }
    }

    fn repl_query(&mut self, mut rt: ReadTerm) -> Option<i32> {
        // [file1, file2] consults.
        if let Some(items) = rt.term.list_items().filter(|i| !i.is_empty()) {
            let files: Vec<Term> = items.into_iter().cloned().collect();
            rt.term = Term::compound("consult", vec![Term::list(files)]);
        }
        let mut q = self.start_query(&rt);
        loop {
            match self.next(&mut q) {
                Ok(true) => {
                    let b = self.bindings(&q);
                    let more = self.has_alternatives(&q);
                    let _ = self.out.flush();
                    if b.is_empty() && !more {
                        let _ = writeln!(self.out, "\nyes");
                        break;
                    }
                    let text: Vec<String> = b.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                    let _ = write!(self.out, "\n{}", text.join("\n"));
                    if !more {
                        let _ = writeln!(self.out, "\n\nyes");
                        break;
                    }
                    let _ = write!(self.out, " ? ");
                    let _ = self.out.flush();
                    let mut line = String::new();
                    let _ = self.input.read_line(&mut line);
                    if line.trim() != ";" {
                        let _ = writeln!(self.out, "\nyes");
                        break;
                    }
                }
                Ok(false) => {
                    let _ = writeln!(self.out, "\nno");
                    break;
                }
                Err(QueryError::Halt(n)) => return Some(n),
                Err(e) => {
                    let _ = self.out.flush();
                    let _ = writeln!(self.err, "{e}");
                    break;
                }
            }
        }
        self.close(q);
        let _ = self.out.flush();
        None
    }
}
