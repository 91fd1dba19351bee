//! Runtime primitives invoked by `call_c`.

use super::code::{Opnd, Prim};
use super::machine::*;
use super::word::{atoms, Word};

const TRUE: Word = Word::Int(1);
const FALSE: Word = Word::Int(0);

fn b(v: bool) -> Word {
    if v {
        TRUE
    } else {
        FALSE
    }
}

impl Machine {
    fn arg(&self, args: &[Opnd], i: usize) -> Word {
        self.opnd(&args[i])
    }

    fn opnd_int(&self, args: &[Opnd], i: usize) -> i64 {
        match args[i] {
            Opnd::Int(n) => n,
            _ => match self.opnd(&args[i]) {
                Word::Int(n) => n,
                _ => 0,
            },
        }
    }

    fn code_arg(&self, args: &[Opnd], i: usize) -> usize {
        match args[i] {
            Opnd::Code(a) => a,
            _ => ADDR_FAIL,
        }
    }

    fn str_arg<'a>(&self, args: &'a [Opnd], i: usize) -> &'a str {
        match &args[i] {
            Opnd::Str(s) => s,
            _ => "",
        }
    }

    /// Heap push in write mode or a cell read in read mode.
    fn next_sub(&mut self) -> Option<Word> {
        if self.write_mode {
            None
        } else {
            let w = self.cell(self.s);
            self.s += 1;
            Some(w)
        }
    }

    fn unify_const(&mut self, c: Word) -> Word {
        match self.next_sub() {
            None => {
                self.heap.push(c);
                TRUE
            }
            Some(w) => b(self.unify(w, c)),
        }
    }

    fn get_const(&mut self, c: Word, x: Word) -> Word {
        match self.deref(x) {
            Word::Ref(a) => {
                self.bind(a, c);
                TRUE
            }
            Word::Fdv(v) => match c {
                Word::Int(n) => b(self.fd_set_value(v, n)),
                _ => FALSE,
            },
            w => b(match (w, c) {
                (Word::Flt(p), Word::Flt(q)) => p == q,
                _ => w == c,
            }),
        }
    }

    pub(crate) fn exec_prim(&mut self, prim: Prim, args: &[Opnd]) -> Res<Word> {
        use Prim::*;
        Ok(match prim {
            GetAtom | GetInteger | GetFloat => {
                let c = self.arg(args, 0);
                let x = self.arg(args, 1);
                self.get_const(c, x)
            }
            GetNil => {
                let x = self.arg(args, 0);
                self.get_const(Word::Atm(atoms::NIL), x)
            }
            GetValue => {
                let (p, q) = (self.arg(args, 0), self.arg(args, 1));
                b(self.unify(p, q))
            }
            GetList => match self.deref(self.arg(args, 0)) {
                Word::Ref(a) => {
                    let h = self.heap.len();
                    self.bind(a, Word::Lst(h));
                    self.write_mode = true;
                    TRUE
                }
                Word::Lst(a) => {
                    self.s = a;
                    self.write_mode = false;
                    TRUE
                }
                _ => FALSE,
            },
            GetStructure => {
                let f = self.arg(args, 0);
                match self.deref(self.arg(args, 1)) {
                    Word::Ref(a) => {
                        let h = self.heap.len();
                        self.heap.push(f);
                        self.bind(a, Word::Stc(h));
                        self.write_mode = true;
                        TRUE
                    }
                    Word::Stc(a) if self.heap[a] == f => {
                        self.s = a + 1;
                        self.write_mode = false;
                        TRUE
                    }
                    _ => FALSE,
                }
            }
            PutVariable => self.new_var(),
            PutAtom | PutInteger | PutFloat => self.arg(args, 0),
            PutNil => Word::Atm(atoms::NIL),
            PutList => {
                self.write_mode = true;
                Word::Lst(self.heap.len())
            }
            PutStructure => {
                let f = self.arg(args, 0);
                let h = self.heap.len();
                self.heap.push(f);
                self.write_mode = true;
                Word::Stc(h)
            }
            UnifyVariable => match self.next_sub() {
                None => self.new_var(),
                Some(w) => w,
            },
            UnifyValue => {
                let v = self.arg(args, 0);
                match self.next_sub() {
                    None => {
                        let v = self.storable(self.deref(v));
                        self.heap.push(v);
                        TRUE
                    }
                    Some(w) => b(self.unify(w, v)),
                }
            }
            UnifyAtom | UnifyInteger | UnifyFloat => {
                let c = self.arg(args, 0);
                self.unify_const(c)
            }
            UnifyNil => self.unify_const(Word::Atm(atoms::NIL)),
            UnifyVoid => {
                let n = self.opnd_int(args, 0) as usize;
                if self.write_mode {
                    for _ in 0..n {
                        self.new_var();
                    }
                } else {
                    self.s += n;
                }
                TRUE
            }
            Allocate => {
                let n = self.opnd_int(args, 0) as usize;
                self.allocate(n)?;
                TRUE
            }
            Deallocate => {
                self.deallocate();
                TRUE
            }
            CreateCp(k) => {
                let alt = self.code_arg(args, 0);
                let k = match k {
                    Some(k) => k as usize,
                    None => self.opnd_int(args, 1) as usize,
                };
                self.push_cp(alt, k)?;
                TRUE
            }
            UpdateCp(_) => {
                let alt = self.code_arg(args, 0);
                self.update_cp(alt);
                TRUE
            }
            DeleteCp(_) => {
                self.delete_cp();
                TRUE
            }
            SwitchOnTerm(mask) => {
                let bucket = match self.deref(self.x[0]) {
                    Word::Ref(_) | Word::Fdv(_) => 0,
                    Word::Atm(_) => 1,
                    Word::Int(_) => 2,
                    Word::Lst(_) => 3,
                    Word::Stc(_) => 4,
                    _ => 5,
                };
                if bucket < 5 && mask & (1 << bucket) != 0 {
                    let k = (0..bucket).filter(|i| mask & (1 << i) != 0).count();
                    Word::Code(self.code_arg(args, k))
                } else {
                    Word::Code(ADDR_FAIL)
                }
            }
            SwitchOnAtom | SwitchOnInteger | SwitchOnStructure => {
                let Word::Tbl(t) = self.arg(args, 0) else { return Ok(Word::Code(ADDR_FAIL)) };
                let key = match self.deref(self.x[0]) {
                    Word::Atm(a) => SwKey::Atm(a),
                    Word::Int(n) => SwKey::Int(n),
                    Word::Stc(a) => match self.heap[a] {
                        Word::Fun(f, n) => SwKey::Fun(f, n),
                        _ => return Ok(Word::Code(ADDR_FAIL)),
                    },
                    _ => return Ok(Word::Code(ADDR_FAIL)),
                };
                Word::Code(self.tables[t as usize].get(&key).copied().unwrap_or(ADDR_FAIL))
            }
            LoadCutLevel => {
                if let Opnd::XAddr(i) = args[0] {
                    self.x[i] = Word::Int(self.b as i64);
                }
                TRUE
            }
            Cut => {
                if let Word::Int(l) = self.deref(self.arg(args, 0)) {
                    self.cut_to(l as usize);
                }
                TRUE
            }
            BltVar => b(matches!(self.deref(self.arg(args, 0)), Word::Ref(_) | Word::Fdv(_))),
            BltNonVar => b(!matches!(self.deref(self.arg(args, 0)), Word::Ref(_) | Word::Fdv(_))),
            BltAtom => b(matches!(self.deref(self.arg(args, 0)), Word::Atm(_))),
            BltInteger => b(matches!(self.deref(self.arg(args, 0)), Word::Int(_))),
            CreateAtom | CreateAtomTagged => {
                let s = self.str_arg(args, 0).to_string();
                Word::Atm(self.atoms.intern(&s))
            }
            CreateFunctor => {
                let s = self.str_arg(args, 0).to_string();
                let n = self.opnd_int(args, 1) as u32;
                Word::Fun(self.atoms.intern(&s), n)
            }
            CreateSwtTable => {
                self.tables.push(Default::default());
                Word::Tbl(self.tables.len() as u32 - 1)
            }
            CreateSwtAtm | CreateSwtInt | CreateSwtStc => {
                let Word::Tbl(t) = self.arg(args, 0) else { return Err(Machine::fatal("bad switch table")) };
                let key = match (prim, self.arg(args, 2)) {
                    (CreateSwtAtm, Word::Atm(a)) => SwKey::Atm(a),
                    (CreateSwtInt, Word::Int(n)) => SwKey::Int(n),
                    (CreateSwtStc, Word::Atm(a)) => SwKey::Fun(a, self.opnd_int(args, 3) as u32),
                    _ => return Err(Machine::fatal("bad switch table key")),
                };
                let target = self.code_arg(args, args.len() - 1);
                self.tables[t as usize].insert(key, target);
                TRUE
            }
            CreatePred => {
                let (Word::Atm(name), Word::Atm(file)) = (self.arg(args, 0), self.arg(args, 2)) else {
                    return Err(Machine::fatal("bad predicate descriptor"));
                };
                let arity = self.opnd_int(args, 1) as usize;
                let line = self.opnd_int(args, 3) as usize;
                let mask = self.opnd_int(args, 4);
                let addr = self.code_arg(args, 5);
                self.create_pred(name, arity, file, line, mask, addr);
                TRUE
            }
            NewObject => {
                let name = self.loading.clone().unwrap_or_default();
                self.objects.push(ObjectEntry {
                    name,
                    init: self.code_arg(args, 0),
                    sys: self.code_arg(args, 1),
                    user: self.code_arg(args, 2),
                });
                TRUE
            }
            ExecuteDirective => {
                let file = self.arg(args, 0);
                let line = self.opnd_int(args, 1);
                let user = self.opnd_int(args, 2) != 0;
                let entry = self.code_arg(args, 3);
                self.execute_directive(file, line, user, entry)?;
                TRUE
            }
            EnsureLinked => TRUE,
            DynamicGoal => {
                let Word::Atm(name) = self.arg(args, 0) else { return Err(Machine::fatal("bad dynamic goal")) };
                let n = self.opnd_int(args, 1) as usize;
                self.goal_from_regs(name, n)
            }
        })
    }

    /// Build `name(X0, ..., Xn-1)` on the heap.
    pub fn goal_from_regs(&mut self, name: super::word::Atom, n: usize) -> Word {
        if n == 0 {
            return Word::Atm(name);
        }
        let h = self.heap.len();
        self.heap.push(Word::Fun(name, n as u32));
        for i in 0..n {
            let w = self.storable(self.deref(self.x[i]));
            self.heap.push(w);
        }
        Word::Stc(h)
    }
}
