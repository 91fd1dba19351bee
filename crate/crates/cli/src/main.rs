//! `gplc`: compile and link Prolog, WAM and MA files, or run the top-level.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gpl_core::ma::{emit_ma, parse_ma, MaObject};
use gpl_core::pl2wam::{compile_source, emit_wam, parse_wam, CompileOpts};
use gpl_core::reader::OpTable;
use gpl_core::vm::{link, runtime_symbols, Library, LinkedImage, Limits, Machine};
use gpl_core::wam2ma::translate;

#[derive(Parser, Debug)]
#[command(name = "gplc", about = "Prolog to WAM to mini-assembly compiler, linker and top-level")]
struct Args {
    /// Input files: .pl, .wam, .ma or .mlib library manifests.
    files: Vec<PathBuf>,
    /// Stop after producing .wam files.
    #[arg(long)]
    wam: bool,
    /// Stop after producing .ma files.
    #[arg(long)]
    ma: bool,
    #[arg(long)]
    no_reg_opt: bool,
    #[arg(long)]
    no_reorder: bool,
    #[arg(long)]
    no_inline: bool,
    /// Disable last call and last subterm optimizations.
    #[arg(long)]
    no_lco: bool,
    /// Disable all optimizations.
    #[arg(long)]
    no_opt: bool,
    /// Do not include the top-level in the image.
    #[arg(long)]
    no_top_level: bool,
    /// Output file: the image, or the single .wam/.ma file.
    #[arg(short = 'o')]
    output: Option<PathBuf>,
    /// Extra FD constraint definitions (.fd source).
    #[arg(long = "fd-lib")]
    fd_lib: Vec<PathBuf>,
    /// Run a linked image file.
    #[arg(long)]
    run: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Kind {
    Pl,
    Wam,
    Ma,
    Lib,
}

fn kind_of(p: &Path) -> Result<Kind, String> {
    match p.extension().and_then(|e| e.to_str()) {
        Some("pl") | Some("pro") => Ok(Kind::Pl),
        Some("wam") => Ok(Kind::Wam),
        Some("ma") => Ok(Kind::Ma),
        Some("mlib") => Ok(Kind::Lib),
        _ => Err(format!("{}: unknown file type (expected .pl, .wam, .ma or .mlib)", p.display())),
    }
}

fn read(p: &Path) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn write(p: &Path, text: &str) -> Result<(), String> {
    std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))
}

struct Driver {
    args: Args,
    opts: CompileOpts,
}

impl Driver {
    fn compile_pl(&self, p: &Path) -> Result<gpl_core::pl2wam::WamFile, String> {
        let src = read(p)?;
        let name = p.display().to_string();
        let out = compile_source(&src, &name, &mut OpTable::default(), &self.opts);
        for w in &out.warnings {
            eprintln!("{name}:{}: warning: {}", w.line, w.msg);
        }
        if !out.errors.is_empty() {
            let msgs: Vec<String> = out.errors.iter().map(|e| format!("{name}:{}: {}", e.line, e.msg)).collect();
            return Err(msgs.join("\n"));
        }
        Ok(out.file)
    }

    /// Advance one file to an MA object, writing intermediate files when a
    /// stop-after flag asks for them. `None` when stopped early.
    fn to_ma(&self, p: &Path, out_name: Option<&Path>) -> Result<Option<MaObject>, String> {
        let kind = kind_of(p)?;
        let wam = match kind {
            Kind::Pl => {
                let w = self.compile_pl(p)?;
                if self.args.wam {
                    let dst = out_name.map(Path::to_path_buf).unwrap_or_else(|| p.with_extension("wam"));
                    write(&dst, &emit_wam(&w))?;
                    return Ok(None);
                }
                Some(w)
            }
            Kind::Wam => {
                if self.args.wam {
                    return Ok(None);
                }
                Some(parse_wam(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?)
            }
            Kind::Ma => None,
            Kind::Lib => return Err(format!("{}: a library cannot be compiled", p.display())),
        };
        let obj = match wam {
            Some(w) => {
                let obj = translate(&w);
                if self.args.ma {
                    let dst = out_name.map(Path::to_path_buf).unwrap_or_else(|| p.with_extension("ma"));
                    write(&dst, &emit_ma(&obj))?;
                    return Ok(None);
                }
                obj
            }
            None => {
                if self.args.wam || self.args.ma {
                    return Ok(None);
                }
                parse_ma(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?
            }
        };
        Ok(Some(obj))
    }

    /// A manifest lists member files, one per line, relative to itself.
    fn library(&self, p: &Path) -> Result<Library, String> {
        let dir = p.parent().unwrap_or(Path::new("."));
        let mut lib = Library { name: p.display().to_string(), members: Vec::new() };
        for line in read(p)?.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let m = dir.join(line);
            if kind_of(&m)? == Kind::Lib {
                return Err(format!("{}: nested library {line}", p.display()));
            }
            let obj = self.to_ma(&m, None)?.expect("no stop-after flag");
            lib.members.push((m.display().to_string(), obj));
        }
        Ok(lib)
    }

    fn run(self) -> Result<i32, String> {
        let a = &self.args;
        if let Some(img) = &a.run {
            let img = LinkedImage::deserialize(&read(img)?).map_err(|e| e.to_string())?;
            return run_image(&img);
        }
        let single_out = if a.files.len() == 1 && (a.wam || a.ma) { a.output.as_deref() } else { None };
        let mut objects = Vec::new();
        let mut libs = Vec::new();
        for f in &a.files {
            if kind_of(f)? == Kind::Lib {
                if !(a.wam || a.ma) {
                    libs.push(self.library(f)?);
                }
                continue;
            }
            if let Some(obj) = self.to_ma(f, single_out)? {
                objects.push((f.display().to_string(), obj));
            }
        }
        if a.wam || a.ma {
            return Ok(0);
        }
        let mut img = link(objects, &libs, runtime_symbols()).map_err(|e| e.to_string())?;
        img.top_level = !a.no_top_level;
        for f in &a.fd_lib {
            img.fd_sources.push(read(f)?);
        }
        match &a.output {
            Some(o) => {
                write(o, &img.serialize())?;
                Ok(0)
            }
            None => run_image(&img),
        }
    }
}

fn run_image(img: &LinkedImage) -> Result<i32, String> {
    let mut m = Machine::new(Limits::default());
    match m.start_image(img).map_err(|e| e.to_string())? {
        Some(code) => Ok(code),
        None => {
            let code = m.repl();
            let _ = std::io::Write::flush(&mut m.out);
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut opts = CompileOpts::default();
    if args.no_opt {
        opts = CompileOpts::unoptimized();
    }
    opts.reg_opt &= !args.no_reg_opt;
    opts.reorder &= !args.no_reorder;
    opts.inline &= !args.no_inline;
    opts.lco &= !args.no_lco;
    match (Driver { args, opts }).run() {
        Ok(code) => ExitCode::from(code.clamp(0, 255) as u8),
        Err(e) => {
            eprintln!("gplc: {e}");
            ExitCode::from(1)
        }
    }
}
