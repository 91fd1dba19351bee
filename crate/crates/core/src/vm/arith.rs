//! Arithmetic evaluation and comparison.

use std::cmp::Ordering;

use super::builtins::ok;
use super::machine::*;
use super::word::{STerm, Word};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Num {
    I(i64),
    F(f64),
}

impl Num {
    pub fn word(self) -> Word {
        match self {
            Num::I(n) => Word::Int(n),
            Num::F(f) => Word::Flt(f),
        }
    }

    fn f(self) -> f64 {
        match self {
            Num::I(n) => n as f64,
            Num::F(f) => f,
        }
    }
}

pub fn natives() -> Vec<NativeDef> {
    vec![
        NativeDef { name: "is", arity: 2, f: is },
        NativeDef { name: "=:=", arity: 2, f: |m| cmp(m, |o| o == Ordering::Equal) },
        NativeDef { name: "=\\=", arity: 2, f: |m| cmp(m, |o| o != Ordering::Equal) },
        NativeDef { name: "<", arity: 2, f: |m| cmp(m, |o| o == Ordering::Less) },
        NativeDef { name: ">", arity: 2, f: |m| cmp(m, |o| o == Ordering::Greater) },
        NativeDef { name: "=<", arity: 2, f: |m| cmp(m, |o| o != Ordering::Greater) },
        NativeDef { name: ">=", arity: 2, f: |m| cmp(m, |o| o != Ordering::Less) },
        NativeDef { name: "succ", arity: 2, f: succ },
        NativeDef { name: "plus", arity: 3, f: plus },
    ]
}

fn is(m: &mut Machine) -> Res<Ctl> {
    let v = m.eval(m.x[1])?;
    ok(m.unify(m.x[0], v.word()))
}

fn cmp(m: &mut Machine, f: fn(Ordering) -> bool) -> Res<Ctl> {
    let a = m.eval(m.x[0])?;
    let b = m.eval(m.x[1])?;
    let o = match (a, b) {
        (Num::I(x), Num::I(y)) => x.cmp(&y),
        _ => a.f().partial_cmp(&b.f()).unwrap_or(Ordering::Less),
    };
    ok(f(o))
}

fn succ(m: &mut Machine) -> Res<Ctl> {
    match m.deref(m.x[0]) {
        Word::Int(n) if n >= 0 => ok(m.unify(m.x[1], Word::Int(n + 1))),
        Word::Int(n) => Err(m.type_error("not_less_than_zero", Word::Int(n))),
        Word::Ref(_) => {
            let n = m.int_arg(m.x[1])?;
            if n <= 0 {
                return if n < 0 { Err(m.type_error("not_less_than_zero", Word::Int(n))) } else { Ok(Ctl::Fail) };
            }
            ok(m.unify(m.x[0], Word::Int(n - 1)))
        }
        w => Err(m.type_error("integer", w)),
    }
}

fn plus(m: &mut Machine) -> Res<Ctl> {
    let (a, b, c) = (m.deref(m.x[0]), m.deref(m.x[1]), m.deref(m.x[2]));
    match (a, b, c) {
        (Word::Int(x), Word::Int(y), _) => ok(m.unify(c, Word::Int(x + y))),
        (Word::Int(x), _, Word::Int(z)) => ok(m.unify(b, Word::Int(z - x))),
        (_, Word::Int(y), Word::Int(z)) => ok(m.unify(a, Word::Int(z - y))),
        _ => Err(m.inst_error()),
    }
}

impl Machine {
    fn int_overflow(&mut self) -> PlError {
        self.evaluation_error("int_overflow")
    }

    fn need_int(&mut self, n: Num) -> Res<i64> {
        match n {
            Num::I(i) => Ok(i),
            Num::F(f) => Err(self.type_error("integer", Word::Flt(f))),
        }
    }

    pub fn eval(&mut self, w: Word) -> Res<Num> {
        let w = self.deref(w);
        match w {
            Word::Int(n) => Ok(Num::I(n)),
            Word::Flt(f) => Ok(Num::F(f)),
            Word::Ref(_) | Word::Fdv(_) => Err(self.inst_error()),
            Word::Atm(a) => {
                let name = self.atoms.name(a).to_string();
                match name.as_str() {
                    "pi" => Ok(Num::F(std::f64::consts::PI)),
                    "e" => Ok(Num::F(std::f64::consts::E)),
                    "inf" | "infinite" => Ok(Num::F(f64::INFINITY)),
                    "nan" => Ok(Num::F(f64::NAN)),
                    "max_integer" => Ok(Num::I(i64::MAX)),
                    "min_integer" => Ok(Num::I(i64::MIN)),
                    "random" => Ok(Num::F(rand_f64(self))),
                    "cputime" => Ok(Num::F(cpu_seconds())),
                    "realtime" => Ok(Num::I(
                        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0),
                    )),
                    "[]" => Err(self.type_error("evaluable", w)),
                    _ => Err(self.not_evaluable(a, 0)),
                }
            }
            Word::Lst(_) => {
                // "a" style single-element code lists evaluate to the code.
                match self.list_items(w).as_deref() {
                    Some([c]) => self.eval(*c),
                    _ => Err(self.type_error("evaluable", w)),
                }
            }
            Word::Stc(_) => {
                let (f, n) = self.functor_of(w).unwrap();
                let name = self.atoms.name(f).to_string();
                if n == 1 {
                    let x = self.eval(self.arg_of(w, 0))?;
                    self.eval1(&name, x).unwrap_or_else(|| Err(self.not_evaluable(f, 1)))
                } else if n == 2 {
                    let x = self.eval(self.arg_of(w, 0))?;
                    let y = self.eval(self.arg_of(w, 1))?;
                    self.eval2(&name, x, y).unwrap_or_else(|| Err(self.not_evaluable(f, 2)))
                } else {
                    Err(self.not_evaluable(f, n))
                }
            }
            _ => Err(self.type_error("evaluable", w)),
        }
    }

    fn not_evaluable(&mut self, f: super::word::Atom, n: usize) -> PlError {
        let pi = self.pred_indicator(f, n);
        let ty = STerm::Atm(self.atoms.intern("evaluable"));
        let e = STerm::Str(self.atoms.intern("type_error"), vec![ty, pi].into());
        self.error_term(e)
    }

    fn eval1(&mut self, op: &str, x: Num) -> Option<Res<Num>> {
        use Num::*;
        let fl = |f: f64| Some(Ok(F(f)));
        Some(Ok(match (op, x) {
            ("-", I(a)) => match a.checked_neg() {
                Some(v) => I(v),
                None => return Some(Err(self.int_overflow())),
            },
            ("-", F(a)) => F(-a),
            ("+", v) => v,
            ("abs", I(a)) => I(a.abs()),
            ("abs", F(a)) => F(a.abs()),
            ("sign", I(a)) => I(a.signum()),
            ("sign", F(a)) => F(if a == 0.0 { 0.0 } else { a.signum() }),
            ("min", _) | ("max", _) => return None,
            ("sqrt", v) => return fl(v.f().sqrt()),
            ("sin", v) => return fl(v.f().sin()),
            ("cos", v) => return fl(v.f().cos()),
            ("tan", v) => return fl(v.f().tan()),
            ("asin", v) => return fl(v.f().asin()),
            ("acos", v) => return fl(v.f().acos()),
            ("atan", v) => return fl(v.f().atan()),
            ("exp", v) => return fl(v.f().exp()),
            ("log", v) => {
                if v.f() <= 0.0 {
                    return Some(Err(self.evaluation_error("undefined")));
                }
                return fl(v.f().ln());
            }
            ("log2", v) => return fl(v.f().log2()),
            ("float", v) => F(v.f()),
            ("integer", I(a)) => I(a),
            ("integer", F(a)) => I(a.round() as i64),
            ("float_integer_part", v) => F(v.f().trunc()),
            ("float_fractional_part", v) => F(v.f().fract()),
            ("truncate", v) => I(v.f().trunc() as i64),
            ("round", v) => I(v.f().round() as i64),
            ("ceiling", v) => I(v.f().ceil() as i64),
            ("floor", v) => I(v.f().floor() as i64),
            ("\\", v) => match self.need_int(v) {
                Ok(a) => I(!a),
                Err(e) => return Some(Err(e)),
            },
            ("msb", v) => match self.need_int(v) {
                Ok(a) if a > 0 => I(63 - a.leading_zeros() as i64),
                Ok(a) => return Some(Err(self.type_error("not_less_than_one", Word::Int(a)))),
                Err(e) => return Some(Err(e)),
            },
            ("random", v) => match self.need_int(v) {
                Ok(a) if a > 0 => I((rand_f64(self) * a as f64) as i64),
                Ok(_) => return Some(Err(self.evaluation_error("undefined"))),
                Err(e) => return Some(Err(e)),
            },
            _ => return None,
        }))
    }

    fn eval2(&mut self, op: &str, x: Num, y: Num) -> Option<Res<Num>> {
        use Num::*;
        let ints = matches!((x, y), (I(_), I(_)));
        let (a, b) = match (x, y) {
            (I(a), I(b)) => (a, b),
            _ => (0, 0),
        };
        let over = |me: &mut Machine, r: Option<i64>| match r {
            Some(v) => Ok(I(v)),
            None => Err(me.int_overflow()),
        };
        let int_only = |me: &mut Machine| -> Option<Res<Num>> {
            if ints {
                None
            } else {
                let bad = if matches!(x, F(_)) { x } else { y };
                Some(Err(me.type_error("integer", bad.word())))
            }
        };
        Some(match op {
            "+" if ints => over(self, a.checked_add(b)),
            "-" if ints => over(self, a.checked_sub(b)),
            "*" if ints => over(self, a.checked_mul(b)),
            "+" => Ok(F(x.f() + y.f())),
            "-" => Ok(F(x.f() - y.f())),
            "*" => Ok(F(x.f() * y.f())),
            "/" => {
                if y.f() == 0.0 && (ints || matches!(y, I(_))) {
                    return Some(Err(self.evaluation_error("zero_divisor")));
                }
                if ints && a % b == 0 {
                    Ok(I(a / b))
                } else {
                    Ok(F(x.f() / y.f()))
                }
            }
            "//" | "mod" | "rem" | "div" | ">>" | "<<" | "/\\" | "\\/" | "xor" | "gcd" => {
                if let Some(e) = int_only(self) {
                    return Some(e);
                }
                if matches!(op, "//" | "mod" | "rem" | "div") && b == 0 {
                    return Some(Err(self.evaluation_error("zero_divisor")));
                }
                match op {
                    "//" => over(self, a.checked_div(b)),
                    "rem" => over(self, a.checked_rem(b)),
                    "mod" => over(self, a.checked_rem(b).map(|r| if r != 0 && (r < 0) != (b < 0) { r + b } else { r })),
                    "div" => over(self, a.checked_div(b).map(|q| if (a % b != 0) && ((a < 0) != (b < 0)) { q - 1 } else { q })),
                    ">>" => Ok(I(a >> b.clamp(0, 63))),
                    "<<" => over(self, if (0..63).contains(&b) { a.checked_mul(1i64 << b) } else { None }),
                    "/\\" => Ok(I(a & b)),
                    "\\/" => Ok(I(a | b)),
                    "xor" => Ok(I(a ^ b)),
                    _ => {
                        let (mut p, mut q) = (a.abs(), b.abs());
                        while q != 0 {
                            (p, q) = (q, p % q);
                        }
                        Ok(I(p))
                    }
                }
            }
            "min" => Ok(if cmp_num(x, y) == Ordering::Greater { y } else { x }),
            "max" => Ok(if cmp_num(x, y) == Ordering::Less { y } else { x }),
            "**" => {
                if ints && b >= 0 {
                    over(self, u32::try_from(b).ok().and_then(|e| a.checked_pow(e)))
                } else {
                    Ok(F(x.f().powf(y.f())))
                }
            }
            "^" => {
                if ints {
                    if b < 0 {
                        if a == 1 {
                            Ok(I(1))
                        } else if a == -1 {
                            Ok(I(if b % 2 == 0 { 1 } else { -1 }))
                        } else if a == 0 {
                            Err(self.evaluation_error("zero_divisor"))
                        } else {
                            Err(self.type_error("float", Word::Int(a)))
                        }
                    } else {
                        over(self, u32::try_from(b).ok().and_then(|e| a.checked_pow(e)))
                    }
                } else {
                    Ok(F(x.f().powf(y.f())))
                }
            }
            "atan2" | "atan" => Ok(F(x.f().atan2(y.f()))),
            "copysign" => Ok(F(x.f().copysign(y.f()))),
            "truncate" => return None,
            _ => return None,
        })
    }
}

fn cmp_num(x: Num, y: Num) -> Ordering {
    match (x, y) {
        (Num::I(a), Num::I(b)) => a.cmp(&b),
        _ => x.f().partial_cmp(&y.f()).unwrap_or(Ordering::Equal),
    }
}

fn rand_f64(m: &mut Machine) -> f64 {
    // xorshift on a per-machine seed kept in the globals table.
    let key = m.atoms.intern("$random_seed");
    let mut s = match m.globals.get(&key) {
        Some(STerm::Int(n)) => *n as u64,
        _ => 0x2545_F491_4F6C_DD1D,
    };
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    m.globals.insert(key, STerm::Int(s as i64));
    (s >> 11) as f64 / (1u64 << 53) as f64
}

pub fn cpu_seconds() -> f64 {
    thread_local! {
        static START: std::time::Instant = std::time::Instant::now();
    }
    START.with(|s| s.elapsed().as_secs_f64())
}
