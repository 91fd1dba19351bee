//! Native predicates over terms, atoms and lists.

use std::cmp::Ordering;

use super::builtins::ok;
use super::machine::*;
use super::word::{atoms, Word};
use crate::reader::{format_float, parse_term};
use crate::term::Term;

macro_rules! natives {
    ($( $name:literal / $arity:literal => $f:expr ),* $(,)?) => {
        vec![$( NativeDef { name: $name, arity: $arity, f: $f } ),*]
    };
}

pub fn natives() -> Vec<NativeDef> {
    natives![
        "var"/1 => |m| ok(m.is_var(m.x[0])),
        "nonvar"/1 => |m| ok(!m.is_var(m.x[0])),
        "atom"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Atm(_))),
        "integer"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Int(_))),
        "float"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Flt(_))),
        "number"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Int(_) | Word::Flt(_))),
        "atomic"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Atm(_) | Word::Int(_) | Word::Flt(_))),
        "compound"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Lst(_) | Word::Stc(_))),
        "callable"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Atm(_) | Word::Lst(_) | Word::Stc(_))),
        "is_list"/1 => |m| ok(m.list_items(m.x[0]).is_some()),
        "ground"/1 => |m| { let mut v = Vec::new(); m.term_vars(m.x[0], &mut v); ok(v.is_empty()) },
        "=="/2 => |m| ok(m.compare(m.x[0], m.x[1]) == Ordering::Equal),
        "\\=="/2 => |m| ok(m.compare(m.x[0], m.x[1]) != Ordering::Equal),
        "@<"/2 => |m| ok(m.compare(m.x[0], m.x[1]) == Ordering::Less),
        "@>"/2 => |m| ok(m.compare(m.x[0], m.x[1]) == Ordering::Greater),
        "@=<"/2 => |m| ok(m.compare(m.x[0], m.x[1]) != Ordering::Greater),
        "@>="/2 => |m| ok(m.compare(m.x[0], m.x[1]) != Ordering::Less),
        "compare"/3 => compare3,
        "functor"/3 => functor3,
        "arg"/3 => arg3,
        "=.."/2 => univ,
        "copy_term"/2 => |m| { let c = m.copy_term(m.x[0]); ok(m.unify(m.x[1], c)) },
        "sort"/2 => |m| sort_gen(m, true, false),
        "msort"/2 => |m| sort_gen(m, false, false),
        "keysort"/2 => |m| sort_gen(m, false, true),
        "sort"/4 => sort4,
        "$skip_list"/3 => skip_list,
        "term_variables"/2 => term_variables,
        "atom_codes"/2 => |m| text_conv(m, Text::Atom, Rep::Codes),
        "atom_chars"/2 => |m| text_conv(m, Text::Atom, Rep::Chars),
        "number_codes"/2 => |m| text_conv(m, Text::Number, Rep::Codes),
        "number_chars"/2 => |m| text_conv(m, Text::Number, Rep::Chars),
        "char_code"/2 => char_code,
        "atom_length"/2 => atom_length,
        "$atom_concat"/3 => atom_concat,
        "$atom_splits"/2 => atom_splits,
        "$sub_atoms"/6 => sub_atoms,
        "atom_number"/2 => atom_number,
        "name"/2 => name2,
        "upcase_atom"/2 => |m| case_atom(m, true),
        "downcase_atom"/2 => |m| case_atom(m, false),
        "atomic_list_concat"/2 => |m| { let s = m.concat_list(m.x[0], "")?; let a = m.atom(&s); ok(m.unify(m.x[1], a)) },
        "atomic_list_concat"/3 => atomic_list_concat3,
        "term_to_atom"/2 => term_to_atom,
        "numbervars"/3 => numbervars,
        "nb_setval"/2 => |m| { let k = m.atom_arg(m.x[0])?; let v = m.to_sterm(m.x[1]); m.globals.insert(k, v); Ok(Ctl::True) },
        "b_setval"/2 => |m| { let k = m.atom_arg(m.x[0])?; let v = m.to_sterm(m.x[1]); m.globals.insert(k, v); Ok(Ctl::True) },
        "nb_getval"/2 => nb_getval,
        "b_getval"/2 => nb_getval,
    ]
}

fn compare3(m: &mut Machine) -> Res<Ctl> {
    let o = match m.compare(m.x[1], m.x[2]) {
        Ordering::Less => "<",
        Ordering::Equal => "=",
        Ordering::Greater => ">",
    };
    let a = m.atom(o);
    ok(m.unify(m.x[0], a))
}

fn functor3(m: &mut Machine) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    match t {
        Word::Ref(_) | Word::Fdv(_) => {
            let name = m.deref(m.x[1]);
            let n = m.deref(m.x[2]);
            if m.is_var(name) || m.is_var(n) {
                return Err(m.inst_error());
            }
            let Word::Int(n) = n else { return Err(m.type_error("integer", n)) };
            if n < 0 {
                return Err(m.domain_error("not_less_than_zero", Word::Int(n)));
            }
            if n == 0 {
                if matches!(name, Word::Lst(_) | Word::Stc(_)) {
                    return Err(m.type_error("atomic", name));
                }
                return ok(m.unify(t, name));
            }
            let Word::Atm(f) = name else {
                return Err(if matches!(name, Word::Lst(_) | Word::Stc(_)) { m.type_error("atomic", name) } else { m.type_error("atom", name) });
            };
            let args: Vec<Word> = (0..n).map(|_| m.new_var()).collect();
            let s = if f == atoms::DOT && n == 2 { m.cons(args[0], args[1]) } else { m.new_struct(f, &args) };
            ok(m.unify(t, s))
        }
        Word::Atm(_) | Word::Int(_) | Word::Flt(_) => ok(m.unify(m.x[1], t) && m.unify(m.x[2], Word::Int(0))),
        _ => {
            let (f, n) = m.functor_of(t).unwrap();
            ok(m.unify(m.x[1], Word::Atm(f)) && m.unify(m.x[2], Word::Int(n as i64)))
        }
    }
}

fn arg3(m: &mut Machine) -> Res<Ctl> {
    let n = m.int_arg(m.x[0])?;
    let t = m.deref(m.x[1]);
    if m.is_var(t) {
        return Err(m.inst_error());
    }
    let Some((_, k)) = m.functor_of(t).filter(|_| matches!(t, Word::Lst(_) | Word::Stc(_))) else {
        return Err(m.type_error("compound", t));
    };
    if n < 1 || n as usize > k {
        return Ok(Ctl::Fail);
    }
    let a = m.arg_of(t, n as usize - 1);
    ok(m.unify(m.x[2], a))
}

fn univ(m: &mut Machine) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    match t {
        Word::Ref(_) | Word::Fdv(_) => {
            let items = m.list_arg(m.x[1])?;
            let Some(&h) = items.first() else { return Err(m.domain_error("non_empty_list", Word::Atm(atoms::NIL))) };
            let h = m.deref(h);
            if items.len() == 1 {
                return ok(m.unify(t, h));
            }
            let f = m.atom_arg(h)?;
            let args = &items[1..];
            let s = if f == atoms::DOT && args.len() == 2 { m.cons(args[0], args[1]) } else { m.new_struct(f, args) };
            ok(m.unify(t, s))
        }
        Word::Lst(_) | Word::Stc(_) => {
            let (f, n) = m.functor_of(t).unwrap();
            let mut items = vec![Word::Atm(f)];
            items.extend((0..n).map(|i| m.arg_of(t, i)));
            let l = m.make_list(&items, Word::Atm(atoms::NIL));
            ok(m.unify(m.x[1], l))
        }
        _ => {
            let l = m.make_list(&[t], Word::Atm(atoms::NIL));
            ok(m.unify(m.x[1], l))
        }
    }
}

fn sort_gen(m: &mut Machine, dedup: bool, by_key: bool) -> Res<Ctl> {
    let mut items = m.list_arg(m.x[0])?;
    if by_key {
        for &w in &items {
            if m.is_var(w) {
                return Err(m.inst_error());
            }
            if m.functor_of(w) != Some((atoms::MINUS, 2)) {
                return Err(m.type_error("pair", w));
            }
        }
        items.sort_by(|a, b| m.compare(m.arg_of(*a, 0), m.arg_of(*b, 0)));
    } else {
        items.sort_by(|a, b| m.compare(*a, *b));
    }
    if dedup {
        items.dedup_by(|a, b| m.compare(*a, *b) == Ordering::Equal);
    }
    let l = m.make_list(&items, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

fn sort4(m: &mut Machine) -> Res<Ctl> {
    let key = m.int_arg(m.x[0])? as usize;
    let ord = m.atom_arg(m.x[1])?;
    let ord = m.atoms.name(ord).to_string();
    let mut items = m.list_arg(m.x[2])?;
    let k = |m: &Machine, w: Word| if key == 0 { w } else { m.arg_of(w, key - 1) };
    items.sort_by(|a, b| {
        let o = m.compare(k(m, *a), k(m, *b));
        if ord.starts_with("@>") {
            o.reverse()
        } else {
            o
        }
    });
    if ord == "@<" || ord == "@>" {
        items.dedup_by(|a, b| m.compare(k(m, *a), k(m, *b)) == Ordering::Equal);
    }
    let l = m.make_list(&items, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[3], l))
}

fn skip_list(m: &mut Machine) -> Res<Ctl> {
    let mut n = 0i64;
    let mut cur = m.deref(m.x[0]);
    while let Word::Lst(a) = cur {
        n += 1;
        cur = m.deref(m.cell(a + 1));
    }
    ok(m.unify(m.x[1], Word::Int(n)) && m.unify(m.x[2], cur))
}

fn term_variables(m: &mut Machine) -> Res<Ctl> {
    let mut v = Vec::new();
    m.term_vars(m.x[0], &mut v);
    let ws: Vec<Word> = v.into_iter().map(|a| m.cell(a)).collect();
    let l = m.make_list(&ws, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

// ---- text ----

#[derive(Clone, Copy, PartialEq)]
enum Text {
    Atom,
    Number,
}

#[derive(Clone, Copy, PartialEq)]
enum Rep {
    Codes,
    Chars,
}

impl Machine {
    /// Text of an atomic term.
    pub fn atomic_text(&self, w: Word) -> Option<String> {
        match self.deref(w) {
            Word::Atm(a) => Some(self.atoms.name(a).to_string()),
            Word::Int(n) => Some(n.to_string()),
            Word::Flt(f) => Some(format_float(f)),
            _ => None,
        }
    }

    /// Text of a code or character list.
    pub fn list_text(&self, w: Word) -> Option<String> {
        let items = self.list_items(w)?;
        let mut s = String::new();
        for i in items {
            match self.deref(i) {
                Word::Int(c) => s.push(char::from_u32(c as u32)?),
                Word::Atm(a) => {
                    let n = self.atoms.name(a);
                    let mut cs = n.chars();
                    let c = cs.next()?;
                    if cs.next().is_some() {
                        return None;
                    }
                    s.push(c);
                }
                _ => return None,
            }
        }
        Some(s)
    }

    pub fn text_arg(&mut self, w: Word) -> Res<String> {
        if self.is_var(w) {
            return Err(self.inst_error());
        }
        match self.atomic_text(w).or_else(|| self.list_text(w)) {
            Some(s) => Ok(s),
            None => Err(self.type_error("atomic", w)),
        }
    }

    pub fn text_list(&mut self, s: &str, chars: bool) -> Word {
        let items: Vec<Word> = s
            .chars()
            .map(|c| if chars { Word::Atm(self.atoms.intern(&c.to_string())) } else { Word::Int(c as i64) })
            .collect();
        self.make_list(&items, Word::Atm(atoms::NIL))
    }

    /// Parse number text as Prolog would read it.
    pub fn parse_number(&self, s: &str) -> Option<Word> {
        let t = s.trim_start();
        if t.is_empty() {
            return None;
        }
        match parse_term(t, &crate::reader::OpTable::empty()) {
            Ok(rt) => match rt.term {
                Term::Int(n) => Some(Word::Int(n)),
                Term::Float(f) => Some(Word::Flt(f)),
                Term::Compound(f, a) if f == "-" && a.len() == 1 => match a[0] {
                    Term::Int(n) => Some(Word::Int(-n)),
                    Term::Float(f) => Some(Word::Flt(-f)),
                    _ => None,
                },
                _ => None,
            },
            Err(_) => None,
        }
    }

    fn concat_list(&mut self, l: Word, sep: &str) -> Res<String> {
        let items = self.list_arg(l)?;
        let mut parts = Vec::new();
        for i in items {
            if self.is_var(i) {
                return Err(self.inst_error());
            }
            match self.atomic_text(i) {
                Some(s) => parts.push(s),
                None => return Err(self.type_error("atomic", i)),
            }
        }
        Ok(parts.join(sep))
    }
}

fn text_conv(m: &mut Machine, kind: Text, rep: Rep) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    if !m.is_var(t) {
        let s = match (kind, t) {
            (Text::Atom, Word::Atm(_)) | (Text::Number, Word::Int(_) | Word::Flt(_)) => m.atomic_text(t).unwrap(),
            (Text::Atom, _) => return Err(m.type_error("atom", t)),
            _ => return Err(m.type_error("number", t)),
        };
        let l = m.text_list(&s, rep == Rep::Chars);
        return ok(m.unify(m.x[1], l));
    }
    let l = m.x[1];
    let Some(s) = m.list_text(l) else {
        let _ = m.list_arg(l)?;
        return Err(m.inst_error());
    };
    let w = match kind {
        Text::Atom => m.atom(&s),
        Text::Number => match m.parse_number(&s) {
            Some(w) => w,
            None => {
                let f = super::word::STerm::Atm(m.atoms.intern("illegal_number"));
                let e = super::word::STerm::Str(m.atoms.intern("syntax_error"), vec![f].into());
                return Err(m.error_term(e));
            }
        },
    };
    ok(m.unify(t, w))
}

fn char_code(m: &mut Machine) -> Res<Ctl> {
    match m.deref(m.x[0]) {
        Word::Atm(a) => {
            let c = m.atoms.name(a).chars().next().unwrap_or('\0') as i64;
            ok(m.unify(m.x[1], Word::Int(c)))
        }
        _ => {
            let c = m.int_arg(m.x[1])?;
            let Some(ch) = char::from_u32(c as u32) else { return Err(m.representation_error("character_code")) };
            let a = m.atom(&ch.to_string());
            ok(m.unify(m.x[0], a))
        }
    }
}

fn atom_length(m: &mut Machine) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    if m.is_var(t) {
        return Err(m.inst_error());
    }
    let Some(s) = m.atomic_text(t) else { return Err(m.type_error("atom", t)) };
    ok(m.unify(m.x[1], Word::Int(s.chars().count() as i64)))
}

fn atom_concat(m: &mut Machine) -> Res<Ctl> {
    let a = m.text_arg(m.x[0])?;
    let b = m.text_arg(m.x[1])?;
    let c = m.atom(&(a + &b));
    ok(m.unify(m.x[2], c))
}

fn atom_splits(m: &mut Machine) -> Res<Ctl> {
    let s = m.text_arg(m.x[0])?;
    let idx: Vec<usize> = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len())).collect();
    let mut out = Vec::new();
    for i in idx {
        let (a, b) = (m.atom(&s[..i]), m.atom(&s[i..]));
        out.push(m.new_struct(atoms::MINUS, &[a, b]));
    }
    let l = m.make_list(&out, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

/// All `s(Before, Length, After, Sub)` for sub_atom/5, narrowed by any
/// bound arguments.
fn sub_atoms(m: &mut Machine) -> Res<Ctl> {
    let s: Vec<char> = m.text_arg(m.x[0])?.chars().collect();
    let n = s.len() as i64;
    let get = |m: &Machine, i: usize| match m.deref(m.x[i]) {
        Word::Int(k) => Some(k),
        _ => None,
    };
    let (bb, lb, ab) = (get(m, 1), get(m, 2), get(m, 3));
    let sub = match m.deref(m.x[4]) {
        Word::Atm(a) => Some(m.atoms.name(a).chars().collect::<Vec<char>>()),
        _ => None,
    };
    let f = m.atoms.intern("s");
    let mut out = Vec::new();
    for b in 0..=n {
        if bb.is_some_and(|x| x != b) {
            continue;
        }
        for l in 0..=(n - b) {
            let a = n - b - l;
            if lb.is_some_and(|x| x != l) || ab.is_some_and(|x| x != a) {
                continue;
            }
            let part = &s[b as usize..(b + l) as usize];
            if sub.as_ref().is_some_and(|x| x.as_slice() != part) {
                continue;
            }
            let text: String = part.iter().collect();
            let at = m.atom(&text);
            out.push(m.new_struct(f, &[Word::Int(b), Word::Int(l), Word::Int(a), at]));
        }
    }
    let l = m.make_list(&out, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[5], l))
}

fn atom_number(m: &mut Machine) -> Res<Ctl> {
    let a = m.deref(m.x[0]);
    if m.is_var(a) {
        let n = m.deref(m.x[1]);
        let Some(s) = m.atomic_text(n).filter(|_| matches!(n, Word::Int(_) | Word::Flt(_))) else {
            return Err(m.inst_error());
        };
        let w = m.atom(&s);
        return ok(m.unify(a, w));
    }
    let s = m.text_arg(a)?;
    match m.parse_number(&s) {
        Some(w) => ok(m.unify(m.x[1], w)),
        None => Ok(Ctl::Fail),
    }
}

fn name2(m: &mut Machine) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    if !m.is_var(t) {
        let s = m.text_arg(t)?;
        let l = m.text_list(&s, false);
        return ok(m.unify(m.x[1], l));
    }
    let Some(s) = m.list_text(m.x[1]) else { return Err(m.inst_error()) };
    let w = m.parse_number(&s).unwrap_or_else(|| m.atom(&s));
    ok(m.unify(t, w))
}

fn case_atom(m: &mut Machine, up: bool) -> Res<Ctl> {
    let s = m.text_arg(m.x[0])?;
    let r = if up { s.to_uppercase() } else { s.to_lowercase() };
    let a = m.atom(&r);
    ok(m.unify(m.x[1], a))
}

fn atomic_list_concat3(m: &mut Machine) -> Res<Ctl> {
    let sep = m.text_arg(m.x[1])?;
    if m.list_items(m.x[0]).is_some_and(|l| l.iter().all(|&w| !m.is_var(w))) {
        let s = m.concat_list(m.x[0], &sep)?;
        let a = m.atom(&s);
        return ok(m.unify(m.x[2], a));
    }
    if sep.is_empty() {
        return Err(m.inst_error());
    }
    let full = m.text_arg(m.x[2])?;
    let parts: Vec<Word> = full.split(sep.as_str()).map(|p| m.atom(p)).collect::<Vec<_>>();
    let l = m.make_list(&parts, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[0], l))
}

fn term_to_atom(m: &mut Machine) -> Res<Ctl> {
    let t = m.deref(m.x[0]);
    if m.is_var(t) {
        let s = m.text_arg(m.x[1])?;
        let ops = m.ops.clone();
        match parse_term(&s, &ops) {
            Ok(rt) => {
                let w = m.put_term(&rt.term, &mut Default::default());
                ok(m.unify(t, w))
            }
            Err(e) => {
                let msg = super::word::STerm::Atm(m.atoms.intern(&e.msg));
                let f = super::word::STerm::Str(m.atoms.intern("syntax_error"), vec![msg].into());
                Err(m.error_term(f))
            }
        }
    } else {
        let s = m.format_word(t, true);
        let a = m.atom(&s);
        ok(m.unify(m.x[1], a))
    }
}

fn numbervars(m: &mut Machine) -> Res<Ctl> {
    let start = m.int_arg(m.x[1])?;
    let mut vars = Vec::new();
    m.term_vars(m.x[0], &mut vars);
    let f = m.atoms.intern("$VAR");
    let mut n = start;
    for a in vars {
        let s = m.new_struct(f, &[Word::Int(n)]);
        if !m.unify(Word::Ref(a), s) {
            return Ok(Ctl::Fail);
        }
        n += 1;
    }
    ok(m.unify(m.x[2], Word::Int(n)))
}

fn nb_getval(m: &mut Machine) -> Res<Ctl> {
    let k = m.atom_arg(m.x[0])?;
    let Some(v) = m.globals.get(&k).cloned() else {
        let key = super::word::STerm::Atm(k);
        let ty = super::word::STerm::Atm(m.atoms.intern("variable"));
        let f = super::word::STerm::Str(m.atoms.intern("existence_error"), vec![ty, key].into());
        return Err(m.error_term(f));
    };
    let w = m.put_sterm(&v, &mut Vec::new());
    ok(m.unify(m.x[1], w))
}
