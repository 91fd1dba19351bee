//! Linker, start protocol and reproducibility checks.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::io::Write;
use std::rc::Rc;

use gpl_core::ma::emit_ma;
use gpl_core::pl2wam::{compile_source, emit_wam, CompileOpts};
use gpl_core::reader::OpTable;
use gpl_core::vm::{compile_to_ma, link, runtime_symbols, Library, LinkedImage, LoadError};
use gpl_core::wam2ma::translate;

/// A writer whose contents stay readable after it is handed to a machine.
#[derive(Clone, Default)]
pub struct Capture(Rc<RefCell<Vec<u8>>>);

impl Capture {
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.0.borrow()).into_owned()
    }
}

impl Write for Capture {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.borrow_mut().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn object(src: &str, name: &str) -> Result<(String, gpl_core::ma::MaObject), String> {
    let (obj, _) = compile_to_ma(src, name, &mut OpTable::default(), &CompileOpts::default()).map_err(|e| e.to_string())?;
    Ok((name.to_string(), obj))
}

/// Ten members, each defining `libN/1`.
pub fn ten_member_library() -> Result<Library, String> {
    let mut members = Vec::new();
    for i in 0..10 {
        members.push(object(&format!("lib{i}(X) :- X = v{i}.\n"), &format!("lib{i}"))?);
    }
    Ok(Library { name: "ten".into(), members })
}

fn linked_names(img: &LinkedImage) -> BTreeSet<String> {
    img.objects.iter().map(|(n, _)| n.clone()).collect()
}

/// Only referenced members, plus `ensure_linked` ones, enter the image;
/// undefined predicates are reported by name and arity.
pub fn criterion_10() -> Result<(), String> {
    let lib = ten_member_library()?;
    let main = object("main :- lib1(A), lib4(B), lib7(C), write(A-B-C), nl.\n:- ensure_linked(lib9/1).\n", "main")?;
    let img = link(vec![main], std::slice::from_ref(&lib), runtime_symbols()).map_err(|e| e.to_string())?;
    let want: BTreeSet<String> = ["main", "lib1", "lib4", "lib7", "lib9"].iter().map(|s| s.to_string()).collect();
    if linked_names(&img) != want {
        return Err(format!("linked {:?}", linked_names(&img)));
    }
    let bare = object("main :- lib2(_), lib3(_), lib2(_).\n", "main")?;
    let img = link(vec![bare], std::slice::from_ref(&lib), runtime_symbols()).map_err(|e| e.to_string())?;
    if img.objects.len() != 3 {
        return Err(format!("linked {:?}", linked_names(&img)));
    }
    let bad = object("main :- lib2(_), 'no such'(1, 2), helper.\n", "main")?;
    match link(vec![bad], &[lib], runtime_symbols()) {
        Err(LoadError::Undefined(names)) => {
            let want = ["'no such'/2".to_string(), "helper/0".to_string()];
            if names != want {
                return Err(format!("undefined names {names:?}"));
            }
            let msg = LoadError::Undefined(names).to_string();
            if msg.contains("X6E") || msg.contains("X68") {
                return Err(format!("hex symbol in {msg}"));
            }
            Ok(())
        }
        other => Err(format!("expected undefined predicates, got {other:?}")),
    }
}

fn start(img: &LinkedImage) -> Result<(Option<i32>, String, String), String> {
    let mut m = gpl_core::vm::Machine::new(gpl_core::vm::Limits::default());
    let (out, err) = (Capture::default(), Capture::default());
    m.out = Box::new(out.clone());
    m.err = Box::new(err.clone());
    let code = m.start_image(img).map_err(|e| e.to_string())?;
    let _ = m.out.flush();
    Ok((code, out.text(), err.text()))
}

/// Without a top-level or user directive the image exits 1 with a warning;
/// initialization goals of linked files run in reverse link order.
pub fn criterion_11() -> Result<(), String> {
    let quiet = object("p(1).\n", "quiet")?;
    let mut img = link(vec![quiet], &[], runtime_symbols()).map_err(|e| e.to_string())?;
    img.top_level = false;
    match start(&img)? {
        (Some(1), _, err) if err.contains("warning") => {}
        other => return Err(format!("no initial goal: {other:?}")),
    }
    let first = object(":- initialization(write(first)).\n:- initialization(write('+')).\n", "first")?;
    let second = object(":- initialization(write(second)).\n", "second")?;
    let mut img = link(vec![first, second], &[], runtime_symbols()).map_err(|e| e.to_string())?;
    img.top_level = false;
    match start(&img)? {
        (Some(0), out, _) if out == "secondfirst+" => Ok(()),
        other => Err(format!("two files: {other:?}")),
    }
}

/// `.wam` and `.ma` text of every corpus program.
pub fn artifacts() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for p in super::corpus::CORPUS {
        let c = compile_source(p.src, p.name, &mut OpTable::default(), &CompileOpts::default());
        out.push((emit_wam(&c.file), emit_ma(&translate(&c.file))));
    }
    for src in [super::golden::CONC_PL, super::golden::BOOL_PL, super::fdcheck::FD_BENCH] {
        let c = compile_source(src, "x", &mut OpTable::default(), &CompileOpts::default());
        out.push((emit_wam(&c.file), emit_ma(&translate(&c.file))));
    }
    out
}

/// Compiling the corpus twice gives byte-identical artifacts.
pub fn criterion_12() -> Result<(), String> {
    let (a, b) = (artifacts(), artifacts());
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        if x != y {
            return Err(format!("artifact {k} differs between runs"));
        }
    }
    Ok(())
}
