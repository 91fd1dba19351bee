//! Term output, `format/2`, reading, operators, flags and listing.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::builtins::ok;
use super::machine::*;
use super::word::{atoms, STerm, Word};
use crate::reader::{format_float, read_all, write_canonical, write_opts, OpType, ReadTerm, SyntaxError, WriteOpts};
use crate::term::Term;
use crate::wam2ma::mask;

macro_rules! natives {
    ($( $name:literal / $arity:literal => $f:expr ),* $(,)?) => {
        vec![$( NativeDef { name: $name, arity: $arity, f: $f } ),*]
    };
}

pub fn natives() -> Vec<NativeDef> {
    natives![
        "write"/1 => |m| { let s = m.format_word(m.x[0], false); m.put(false, &s) },
        "print"/1 => |m| { let s = m.format_word(m.x[0], false); m.put(false, &s) },
        "writeq"/1 => |m| { let s = m.format_word(m.x[0], true); m.put(false, &s) },
        "write_canonical"/1 => |m| { let s = write_canonical(&m.to_term(m.x[0], &HashMap::new())); m.put(false, &s) },
        "write"/2 => |m| { let e = m.stream_arg(m.x[0])?; let s = m.format_word(m.x[1], false); m.put(e, &s) },
        "writeq"/2 => |m| { let e = m.stream_arg(m.x[0])?; let s = m.format_word(m.x[1], true); m.put(e, &s) },
        "write_term"/2 => |m| write_term(m, false, 0),
        "write_term"/3 => |m| { let e = m.stream_arg(m.x[0])?; write_term(m, e, 1) },
        "nl"/0 => |m| m.put(false, "\n"),
        "nl"/1 => |m| { let e = m.stream_arg(m.x[0])?; m.put(e, "\n") },
        "tab"/1 => |m| { let n = m.eval(m.x[0])?; let n = match n { super::arith::Num::I(n) => n.max(0) as usize, _ => 0 }; m.put(false, &" ".repeat(n)) },
        "put_char"/1 => |m| { let a = m.atom_arg(m.x[0])?; let s = m.atoms.name(a).to_string(); m.put(false, &s) },
        "flush_output"/0 => |m| { let _ = m.out.flush(); Ok(Ctl::True) },
        "format"/1 => |m| { let s = m.format_text(m.x[0], Word::Atm(atoms::NIL))?; m.put(false, &s) },
        "format"/2 => |m| { let s = m.format_text(m.x[0], m.x[1])?; m.put(false, &s) },
        "format"/3 => format3,
        "portray_clause"/1 => |m| { let t = m.to_sterm(m.x[0]); let s = m.clause_text(&t); m.put(false, &s) },
        "read"/1 => |m| read_term(m, None),
        "read_term"/2 => |m| read_term(m, Some(m.x[1])),
        "op"/3 => op3,
        "$ops"/1 => ops_list,
        "set_prolog_flag"/2 => set_flag,
        "$flags"/1 => flags_list,
        "$consult"/1 => consult,
        "$listing"/0 => |m| listing(m, None),
        "$listing"/1 => |m| listing(m, Some(m.x[0])),
        "$preds"/1 => preds_list,
        "statistics"/2 => statistics,
        "garbage_collect"/0 => |_| Ok(Ctl::True),
        "$tracing"/0 => |m| ok(m.flags.trace),
        "$trace_port"/2 => |m| {
            let port = m.atom_arg(m.x[0])?;
            let s = format!("      {}: {}\n", m.atoms.name(port), m.format_word(m.x[1], true));
            m.put(true, &s)
        },
    ]
}

impl Machine {
    /// Text of a heap term as `write/1` or `writeq/1` would print it.
    pub fn format_word(&self, w: Word, quoted: bool) -> String {
        let names: HashMap<usize, String> = self.var_names.iter().map(|(n, a)| (*a, n.clone())).collect();
        let t = self.to_term(w, &names);
        crate::reader::write_term(&t, &self.ops, quoted)
    }

    fn put(&mut self, err: bool, s: &str) -> Res<Ctl> {
        let sink = if err { &mut self.err } else { &mut self.out };
        let _ = sink.write_all(s.as_bytes());
        Ok(Ctl::True)
    }

    /// `true` for the error stream.
    fn stream_arg(&mut self, w: Word) -> Res<bool> {
        match self.deref(w) {
            Word::Ref(_) => Err(self.inst_error()),
            Word::Atm(a) => match self.atoms.name(a) {
                "user_output" => Ok(false),
                "user_error" => Ok(true),
                _ => Err(self.domain_error("stream_or_alias", w)),
            },
            _ => Err(self.domain_error("stream_or_alias", w)),
        }
    }

    fn format_error(&mut self, msg: &str) -> PlError {
        let f = self.atoms.intern("format");
        let m = STerm::Atm(self.atoms.intern(msg));
        self.error_term(STerm::Str(f, vec![m].into()))
    }

    /// Expand a `format/2` control text against its arguments.
    pub fn format_text(&mut self, fmt: Word, args: Word) -> Res<String> {
        let fmt = self.text_arg(fmt)?;
        let mut args: std::collections::VecDeque<Word> = match self.list_items(args) {
            Some(v) => v.into(),
            None => vec![args].into(),
        };
        let mut out = String::new();
        let mut chars = fmt.chars().peekable();
        while let Some(c) = chars.next() {
            if c != '~' {
                out.push(c);
                continue;
            }
            let mut num = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit() || **d == '*') {
                if *d == '*' {
                    let a = args.pop_front().ok_or_else(|| self.format_error("not enough arguments"))?;
                    num = self.int_arg(a)?.to_string();
                } else {
                    num.push(*d);
                }
                chars.next();
            }
            let n: Option<usize> = num.parse().ok();
            let Some(d) = chars.next() else {
                return Err(self.format_error("truncated directive"));
            };
            let mut next = |m: &mut Machine| args.pop_front().ok_or_else(|| m.format_error("not enough arguments"));
            match d {
                '~' => out.push('~'),
                'n' => out.push_str(&"\n".repeat(n.unwrap_or(1))),
                'w' | 'p' => {
                    let a = next(self)?;
                    out.push_str(&self.format_word(a, false));
                }
                'q' => {
                    let a = next(self)?;
                    out.push_str(&self.format_word(a, true));
                }
                'a' => {
                    let a = next(self)?;
                    match self.atomic_text(a) {
                        Some(s) => out.push_str(&s),
                        None => return Err(self.type_error("atomic", a)),
                    }
                }
                'd' | 'D' => {
                    let a = next(self)?;
                    let v = self.int_arg(a)?;
                    let mut s = v.abs().to_string();
                    if d == 'D' {
                        let b = s.as_bytes();
                        let mut g = String::new();
                        for (i, ch) in b.iter().enumerate() {
                            if i > 0 && (b.len() - i) % 3 == 0 {
                                g.push(',');
                            }
                            g.push(*ch as char);
                        }
                        s = g;
                    }
                    if let Some(k) = n.filter(|k| *k > 0) {
                        while s.len() <= k {
                            s.insert(0, '0');
                        }
                        s.insert(s.len() - k, '.');
                    }
                    if v < 0 {
                        out.push('-');
                    }
                    out.push_str(&s);
                }
                'r' => {
                    let a = next(self)?;
                    let v = self.int_arg(a)?;
                    let radix = n.unwrap_or(8).clamp(2, 36) as u32;
                    let mut digits = Vec::new();
                    let mut u = v.unsigned_abs();
                    loop {
                        digits.push(std::char::from_digit((u % radix as u64) as u32, radix).unwrap());
                        u /= radix as u64;
                        if u == 0 {
                            break;
                        }
                    }
                    if v < 0 {
                        out.push('-');
                    }
                    out.extend(digits.iter().rev());
                }
                's' => {
                    let a = next(self)?;
                    match self.list_text(a).or_else(|| self.atomic_text(a)) {
                        Some(s) => out.push_str(&s),
                        None => return Err(self.type_error("list", a)),
                    }
                }
                'c' => {
                    let a = next(self)?;
                    let code = self.int_arg(a)?;
                    let ch = char::from_u32(code as u32).ok_or_else(|| self.representation_error("character_code"))?;
                    out.extend(std::iter::repeat_n(ch, n.unwrap_or(1)));
                }
                'e' | 'f' | 'g' => {
                    let a = next(self)?;
                    let x = match self.eval(a)? {
                        super::arith::Num::I(i) => i as f64,
                        super::arith::Num::F(f) => f,
                    };
                    let p = n.unwrap_or(6);
                    out.push_str(&match d {
                        'e' => format_exp(x, p),
                        'f' => format!("{x:.p$}"),
                        _ => format_float(x),
                    });
                }
                'i' => {
                    next(self)?;
                }
                't' | '|' | '+' => {}
                _ => return Err(self.format_error("unknown directive")),
            }
        }
        if !args.is_empty() {
            return Err(self.format_error("too many arguments"));
        }
        Ok(out)
    }

    /// A clause as `portray_clause/1` prints it.
    pub fn clause_text(&self, t: &STerm) -> String {
        let term = number_vars(&self.sterm_to_term(t));
        let opts = WriteOpts { quoted: true, ignore_ops: false, numbervars: true };
        let (head, body) = match &term {
            Term::Compound(f, a) if f == ":-" && a.len() == 2 => (&a[0], Some(&a[1])),
            _ => (&term, None),
        };
        let mut s = write_opts(head, &self.ops, opts);
        match body {
            None => {}
            Some(Term::Atom(a)) if a == "true" => {}
            Some(b) => {
                s.push_str(" :-");
                let mut goals = Vec::new();
                let mut cur = b;
                while let Term::Compound(f, a) = cur {
                    if f != "," || a.len() != 2 {
                        break;
                    }
                    goals.push(&a[0]);
                    cur = &a[1];
                }
                goals.push(cur);
                for (i, g) in goals.iter().enumerate() {
                    s.push_str("\n    ");
                    s.push_str(&crate::reader::write_opts(g, &self.ops, opts));
                    if i + 1 < goals.len() {
                        s.push(',');
                    }
                }
            }
        }
        s.push_str(".\n");
        s
    }
}

fn format_exp(x: f64, p: usize) -> String {
    let s = format!("{x:.p$e}");
    // Rust prints 1.5e2; C prints 1.5e+02.
    match s.split_once('e') {
        Some((m, e)) => {
            let (sign, digits) = match e.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', e),
            };
            format!("{m}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

/// Replace variables by `'$VAR'(N)` in order of first occurrence.
fn number_vars(t: &Term) -> Term {
    let mut map = HashMap::new();
    for v in t.vars() {
        let n = map.len() as i64;
        map.entry(v.id).or_insert_with(|| Term::compound("$VAR", vec![Term::Int(n)]));
    }
    t.substitute(&map)
}

fn write_term(m: &mut Machine, err: bool, k: usize) -> Res<Ctl> {
    let opts_w = m.x[k + 1];
    let mut opts = WriteOpts::default();
    for o in m.list_arg(opts_w)? {
        let Some((f, 1)) = m.functor_of(o) else { return Err(m.domain_error("write_option", o)) };
        let v = m.deref(m.arg_of(o, 0));
        let on = matches!(v, Word::Atm(a) if a == atoms::TRUE);
        match m.atoms.name(f) {
            "quoted" => opts.quoted = on,
            "ignore_ops" => opts.ignore_ops = on,
            "numbervars" => opts.numbervars = on,
            _ => {}
        }
    }
    let names: HashMap<usize, String> = m.var_names.iter().map(|(n, a)| (*a, n.clone())).collect();
    let t = m.to_term(m.x[k], &names);
    let s = write_opts(&t, &m.ops, opts);
    m.put(err, &s)
}

fn format3(m: &mut Machine) -> Res<Ctl> {
    let s = m.format_text(m.x[1], m.x[2])?;
    let dst = m.deref(m.x[0]);
    if let Some((f, 1)) = m.functor_of(dst) {
        let name = m.atoms.name(f).to_string();
        let r = match name.as_str() {
            "atom" => m.atom(&s),
            "codes" => m.text_list(&s, false),
            "chars" => m.text_list(&s, true),
            _ => return Err(m.domain_error("output_sink", dst)),
        };
        let a = m.arg_of(dst, 0);
        return ok(m.unify(a, r));
    }
    let e = m.stream_arg(dst)?;
    m.put(e, &s)
}

impl Machine {
    /// Next clause from the input stream; `None` at end of file.
    pub fn read_clause(&mut self) -> Result<Option<ReadTerm>, SyntaxError> {
        if let Some(t) = self.pending.pop_front() {
            return Ok(Some(t));
        }
        let mut buf = String::new();
        loop {
            let mut line = String::new();
            let n = self.input.read_line(&mut line).unwrap_or(0);
            if n == 0 && buf.trim().is_empty() {
                return Ok(None);
            }
            buf.push_str(&line);
            if n > 0 && !buf.trim_end().ends_with('.') {
                continue;
            }
            let results = read_all(&buf, &self.ops);
            if results.is_empty() {
                if n == 0 {
                    return Ok(None);
                }
                buf.clear();
                continue;
            }
            let mut first = None;
            for r in results {
                let t = r?;
                if first.is_none() {
                    first = Some(t);
                } else {
                    self.pending.push_back(t);
                }
            }
            return Ok(first);
        }
    }

    pub fn syntax_error(&mut self, e: &SyntaxError) -> PlError {
        let f = self.atoms.intern("syntax_error");
        let msg = STerm::Atm(self.atoms.intern(&e.msg));
        self.error_term(STerm::Str(f, vec![msg].into()))
    }
}

fn read_term(m: &mut Machine, opts: Option<Word>) -> Res<Ctl> {
    let rt = match m.read_clause() {
        Ok(Some(rt)) => rt,
        Ok(None) => {
            let eof = m.atom("end_of_file");
            return ok(m.unify(m.x[0], eof));
        }
        Err(e) => return Err(m.syntax_error(&e)),
    };
    let mut vars = HashMap::new();
    let t = m.put_term(&rt.term, &mut vars);
    if !m.unify(m.x[0], t) {
        return Ok(Ctl::Fail);
    }
    let Some(opts) = opts else { return Ok(Ctl::True) };
    for o in m.list_arg(opts)? {
        let Some((f, 1)) = m.functor_of(o) else { continue };
        if m.atoms.name(f) != "variable_names" {
            continue;
        }
        let mut items = Vec::new();
        for (name, v) in &rt.var_names {
            let Term::Var(v) = v else { continue };
            let w = match vars.get(&v.id) {
                Some(w) => *w,
                None => continue,
            };
            let n = m.atom(name);
            items.push(m.new_struct(atoms::EQ, &[n, w]));
        }
        let l = m.make_list(&items, Word::Atm(atoms::NIL));
        let a = m.arg_of(o, 0);
        if !m.unify(a, l) {
            return Ok(Ctl::Fail);
        }
    }
    Ok(Ctl::True)
}

fn op3(m: &mut Machine) -> Res<Ctl> {
    let p = m.int_arg(m.x[0])?;
    if !(0..=1200).contains(&p) {
        return Err(m.domain_error("operator_priority", Word::Int(p)));
    }
    let ta = m.atom_arg(m.x[1])?;
    let Some(kind) = OpType::parse(m.atoms.name(ta)) else {
        return Err(m.domain_error("operator_specifier", Word::Atm(ta)));
    };
    let names = match m.deref(m.x[2]) {
        Word::Atm(a) if a != atoms::NIL => vec![Word::Atm(a)],
        w => m.list_arg(w)?,
    };
    for n in names {
        let a = m.atom_arg(n)?;
        let name = m.atoms.name(a).to_string();
        if name == "," {
            return Err(m.permission_error("modify", "operator", STerm::Atm(a)));
        }
        if m.ops.update(&name, p, kind).is_err() {
            return Err(m.permission_error("create", "operator", STerm::Atm(a)));
        }
    }
    Ok(Ctl::True)
}

fn ops_list(m: &mut Machine) -> Res<Ctl> {
    let op = m.atoms.intern("op");
    let mut items = Vec::new();
    for (p, t, n) in m.ops.definitions() {
        let tw = m.atom(t.name());
        let nw = m.atom(&n);
        items.push(m.new_struct(op, &[Word::Int(p as i64), tw, nw]));
    }
    let l = m.make_list(&items, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[0], l))
}

fn set_flag(m: &mut Machine) -> Res<Ctl> {
    let f = m.atom_arg(m.x[0])?;
    let v = m.atom_arg(m.x[1])?;
    let (fname, vname) = (m.atoms.name(f).to_string(), m.atoms.name(v).to_string());
    match (fname.as_str(), vname.as_str()) {
        ("unknown", "error") => m.flags.unknown_error = true,
        ("unknown", "fail" | "warning") => m.flags.unknown_error = false,
        ("double_quotes", "codes") => m.flags.double_quotes_codes = true,
        ("double_quotes", "atom" | "chars") => m.flags.double_quotes_codes = false,
        ("debug", "on" | "true") => m.flags.trace = true,
        ("debug", "off" | "false") => m.flags.trace = false,
        ("unknown" | "double_quotes" | "debug", _) => {
            let w = m.x[1];
            return Err(m.domain_error("flag_value", w));
        }
        _ => return Err(m.domain_error("prolog_flag", Word::Atm(f))),
    }
    Ok(Ctl::True)
}

fn flags_list(m: &mut Machine) -> Res<Ctl> {
    let pairs: Vec<(&str, Word)> = vec![
        ("bounded", Word::Atm(atoms::TRUE)),
        ("max_integer", Word::Int(i64::MAX)),
        ("min_integer", Word::Int(i64::MIN)),
        ("unknown", Word::Atm(m.atoms.intern(if m.flags.unknown_error { "error" } else { "fail" }))),
        ("double_quotes", Word::Atm(m.atoms.intern(if m.flags.double_quotes_codes { "codes" } else { "atom" }))),
        ("debug", Word::Atm(m.atoms.intern(if m.flags.trace { "on" } else { "off" }))),
    ];
    let mut items = Vec::new();
    for (k, v) in pairs {
        let k = m.atom(k);
        items.push(m.new_struct(atoms::MINUS, &[k, v]));
    }
    let l = m.make_list(&items, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[0], l))
}

fn consult(m: &mut Machine) -> Res<Ctl> {
    let files = match m.deref(m.x[0]) {
        w @ Word::Lst(_) => m.list_arg(w)?,
        w => vec![w],
    };
    for f in files {
        let name = m.text_arg(f)?;
        let path = if std::path::Path::new(&name).exists() { name.clone() } else { format!("{name}.pl") };
        if !std::path::Path::new(&path).exists() {
            let ss = m.atoms.intern("source_sink");
            let culprit = STerm::Atm(m.atoms.intern(&name));
            let e = m.atoms.intern("existence_error");
            return Err(m.error_term(STerm::Str(e, vec![STerm::Atm(ss), culprit].into())));
        }
        match m.consult_file(&path) {
            Ok(()) => {}
            Err(super::runtime::ConsultError::Halt(n)) => return Err(PlError::Halt(n)),
            Err(e) => {
                let _ = writeln!(m.err, "error: {e}");
                return Ok(Ctl::Fail);
            }
        }
    }
    Ok(Ctl::True)
}

fn listing(m: &mut Machine, spec: Option<Word>) -> Res<Ctl> {
    let filter = match spec {
        None => None,
        Some(w) => {
            let w = m.deref(w);
            match m.functor_of(w) {
                Some((atoms::SLASH, 2)) => {
                    let n = m.atom_arg(m.arg_of(w, 0))?;
                    let a = m.int_arg(m.arg_of(w, 1))?;
                    Some((n, Some(a as usize)))
                }
                _ => Some((m.atom_arg(w)?, None)),
            }
        }
    };
    let mut keys: Vec<_> = m
        .db
        .keys()
        .filter(|(n, a)| filter.is_none_or(|(fname, fa)| *n == fname && fa.is_none_or(|x| x == *a)))
        .copied()
        .collect();
    keys.sort_by(|x, y| m.atoms.name(x.0).cmp(m.atoms.name(y.0)).then(x.1.cmp(&y.1)));
    let mut s = String::new();
    for k in keys {
        let name = m.atoms.name(k.0).to_string();
        if name.starts_with('$') {
            continue;
        }
        let t = Term::compound("/", vec![Term::atom(&name), Term::Int(k.1 as i64)]);
        s.push_str(&format!(":- dynamic({}).\n\n", crate::reader::write_term(&t, &m.ops, true)));
        for c in &m.db[&k].clauses {
            let t = STerm::Str(atoms::NECK, vec![c.head.clone(), c.body.clone()].into());
            s.push_str(&m.clause_text(&t));
        }
        s.push('\n');
    }
    let mut statics: Vec<_> = m
        .preds
        .iter()
        .filter(|(k, e)| {
            matches!(e.kind, PredKind::Static(_))
                && e.mask & (mask::BUILT_IN | mask::BUILT_IN_FD) == 0
                && !m.atoms.name(k.0).starts_with('$')
                && filter.is_none_or(|(fname, fa)| k.0 == fname && fa.is_none_or(|x| x == k.1))
        })
        .map(|(k, _)| (m.atoms.name(k.0).to_string(), k.1))
        .collect();
    statics.sort();
    for (n, a) in statics {
        let t = Term::compound("/", vec![Term::atom(&n), Term::Int(a as i64)]);
        s.push_str(&format!("% {} (compiled)\n", crate::reader::write_term(&t, &m.ops, true)));
    }
    m.put(false, &s)
}

fn preds_list(m: &mut Machine) -> Res<Ctl> {
    let mut keys: Vec<_> = m
        .preds
        .iter()
        .filter(|(k, e)| e.mask & (mask::BUILT_IN | mask::BUILT_IN_FD) == 0 && !m.atoms.name(k.0).starts_with('$'))
        .map(|(k, _)| *k)
        .collect();
    keys.sort();
    let mut items = Vec::new();
    for (n, a) in keys {
        items.push(m.new_struct(atoms::SLASH, &[Word::Atm(n), Word::Int(a as i64)]));
    }
    let l = m.make_list(&items, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[0], l))
}

fn statistics(m: &mut Machine) -> Res<Ctl> {
    let k = m.atom_arg(m.x[0])?;
    let ms = (super::arith::cpu_seconds() * 1000.0) as i64;
    let v = match m.atoms.name(k) {
        "runtime" | "cputime" | "process_cputime" | "walltime" | "real_time" => {
            
            m.make_list(&[Word::Int(ms), Word::Int(0)], Word::Atm(atoms::NIL))
        }
        "heap" | "global_stack" => {
            let h = m.heap.len() as i64;
            m.make_list(&[Word::Int(h), Word::Int(m.limits.heap as i64 - h)], Word::Atm(atoms::NIL))
        }
        "trail" => {
            let t = m.trail.len() as i64;
            m.make_list(&[Word::Int(t), Word::Int(m.limits.trail as i64 - t)], Word::Atm(atoms::NIL))
        }
        _ => return Err(m.domain_error("statistics_key", Word::Atm(k))),
    };
    ok(m.unify(m.x[1], v))
}
