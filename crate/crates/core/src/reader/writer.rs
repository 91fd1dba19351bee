use super::lexer::{is_alnum, is_symbol_char};
use super::OpTable;
use crate::term::Term;

#[derive(Clone, Copy, Debug, Default)]
pub struct WriteOpts {
    pub quoted: bool,
    pub ignore_ops: bool,
    /// Print `'$VAR'(N)` as a variable name.
    pub numbervars: bool,
}

pub fn write_term(t: &Term, ops: &OpTable, quoted: bool) -> String {
    write_opts(t, ops, WriteOpts { quoted, ignore_ops: false, numbervars: true })
}

pub fn write_canonical(t: &Term) -> String {
    write_opts(t, &OpTable::empty(), WriteOpts { quoted: true, ignore_ops: true, numbervars: false })
}

pub fn write_opts(t: &Term, ops: &OpTable, opts: WriteOpts) -> String {
    write_prio(t, ops, opts, 1200)
}

/// Write as an operand of maximum priority `max`.
pub fn write_prio(t: &Term, ops: &OpTable, opts: WriteOpts, max: u16) -> String {
    let mut w = Writer { ops, opts, out: String::new() };
    w.term(t, max);
    w.out
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    if s.contains('.') {
        return s;
    }
    match s.find('e') {
        Some(i) => format!("{}.0{}", &s[..i], &s[i..]),
        None => format!("{s}.0"),
    }
}

fn atom_needs_quote(a: &str) -> bool {
    let mut cs = a.chars();
    match cs.next() {
        None => true,
        Some(c) if c.is_ascii_lowercase() => !a.chars().all(is_alnum),
        Some(_) if matches!(a, "[]" | "!" | ";" | "{}") => false,
        Some(_) => a == "." || !a.chars().all(is_symbol_char),
    }
}

pub fn quote_atom(a: &str) -> String {
    let mut s = String::from("'");
    for c in a.chars() {
        match c {
            '\'' => s.push_str("\\'"),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\t' => s.push_str("\\t"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => s.push_str(&format!("\\x{:x}\\", c as u32)),
            c => s.push(c),
        }
    }
    s.push('\'');
    s
}

pub fn fmt_atom(a: &str, quoted: bool) -> String {
    if quoted && atom_needs_quote(a) {
        quote_atom(a)
    } else {
        a.to_string()
    }
}

struct Writer<'a> {
    ops: &'a OpTable,
    opts: WriteOpts,
    out: String,
}

impl Writer<'_> {
    /// Append text, inserting a space where two tokens would otherwise fuse.
    fn emit(&mut self, s: &str) {
        if let (Some(a), Some(b)) = (self.out.chars().last(), s.chars().next()) {
            let glue = (is_symbol_char(a) && is_symbol_char(b)) || (is_alnum(a) && is_alnum(b));
            if glue {
                self.out.push(' ');
            }
        }
        self.out.push_str(s);
    }

    fn atom(&mut self, a: &str) {
        let s = fmt_atom(a, self.opts.quoted);
        self.emit(&s);
    }

    fn is_op_atom(&self, a: &str) -> bool {
        !self.opts.ignore_ops && (self.ops.is_op(a) || a == ",")
    }

    fn term(&mut self, t: &Term, max: u16) {
        match t {
            Term::Var(v) => {
                let s = if v.name.is_empty() || v.name == "_" { format!("_{}", v.id) } else { v.name.clone() };
                self.emit(&s);
            }
            Term::Int(n) => self.emit(&n.to_string()),
            Term::Float(x) => self.emit(&format_float(*x)),
            Term::Atom(a) => {
                if max < 1200 && self.is_op_atom(a) {
                    let pri = [self.ops.prefix(a), self.ops.infix(a), self.ops.postfix(a)]
                        .into_iter()
                        .flatten()
                        .map(|d| d.priority)
                        .max()
                        .unwrap_or(1000);
                    if pri > max {
                        self.emit("(");
                        self.atom(a);
                        self.out.push(')');
                        return;
                    }
                }
                self.atom(a)
            }
            Term::Compound(f, args) => self.compound(f, args, max),
        }
    }

    /// A prefix operator atom before an infix or postfix operator is bracketed.
    fn left_operand(&mut self, t: &Term, max: u16) {
        match t {
            Term::Atom(a) if self.is_op_atom(a) && self.ops.prefix(a).is_some() => {
                self.emit("(");
                self.atom(a);
                self.out.push(')');
            }
            _ => self.term(t, max),
        }
    }

    fn compound(&mut self, f: &str, args: &[Term], max: u16) {
        if f == "$VAR" && self.opts.numbervars {
            if let [Term::Int(n)] = args {
                if *n >= 0 {
                    let letter = (b'A' + (n % 26) as u8) as char;
                    let s = if *n >= 26 { format!("{letter}{}", n / 26) } else { letter.to_string() };
                    return self.emit(&s);
                }
            }
        }
        if f == "." && args.len() == 2 && !self.opts.ignore_ops {
            return self.list(args);
        }
        if f == "{}" && args.len() == 1 && !self.opts.ignore_ops {
            self.emit("{");
            self.term(&args[0], 1200);
            self.out.push('}');
            return;
        }
        if !self.opts.ignore_ops {
            if args.len() == 2 {
                let def = if f == "," { Some(OpTable::comma()) } else { self.ops.infix(f) };
                if let Some(def) = def {
                    let (lp, rp) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.left_operand(&args[0], lp);
                    if f == "," {
                        self.out.push(',');
                    } else if f.chars().all(is_alnum) || f == "->" || f == ":-" || f == "-->" {
                        self.out.push(' ');
                        self.atom(f);
                        self.out.push(' ');
                    } else {
                        self.atom(f);
                    }
                    self.term(&args[1], rp);
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
            }
            let op_arg = matches!(args.first(), Some(Term::Atom(a)) if self.is_op_atom(a));
            if args.len() == 1 && !op_arg {
                if let Some(def) = self.ops.prefix(f) {
                    let (_, rp) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.atom(f);
                    let arg = &args[0];
                    let numeric = matches!(arg, Term::Int(_) | Term::Float(_));
                    if (numeric && (f == "-" || f == "+")) || f.chars().all(is_alnum) {
                        self.out.push(' ');
                    }
                    let mark = self.out.len();
                    self.term(arg, rp);
                    if self.out[mark..].starts_with('(') && !self.out[..mark].ends_with(' ') {
                        self.out.insert(mark, ' ');
                    }
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
                if let Some(def) = self.ops.postfix(f) {
                    let (lp, _) = def.arg_priorities();
                    let paren = def.priority > max;
                    if paren {
                        self.emit("(");
                    }
                    self.left_operand(&args[0], lp);
                    self.atom(f);
                    if paren {
                        self.out.push(')');
                    }
                    return;
                }
            }
        }
        self.atom(f);
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.term(a, 999);
        }
        self.out.push(')');
    }

    fn list(&mut self, args: &[Term]) {
        self.emit("[");
        self.term(&args[0], 999);
        let mut tail = &args[1];
        loop {
            match tail {
                Term::Compound(f, a) if f == "." && a.len() == 2 => {
                    self.out.push(',');
                    self.term(&a[0], 999);
                    tail = &a[1];
                }
                Term::Atom(n) if n == "[]" => break,
                t => {
                    self.out.push('|');
                    self.term(t, 999);
                    break;
                }
            }
        }
        self.out.push(']');
    }
}
