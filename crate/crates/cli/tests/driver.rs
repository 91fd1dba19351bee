use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const APP: &str = "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n";

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn gplc(dir: &Path, args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gplc"))
        .current_dir(dir)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn stop_after_wam_and_ma() {
    let d = scratch("stop_after");
    std::fs::write(d.join("app.pl"), APP).unwrap();
    assert!(gplc(&d, &["--wam", "app.pl"], "").status.success());
    let wam = std::fs::read_to_string(d.join("app.wam")).unwrap();
    assert!(wam.contains("predicate(app/3"), "{wam}");
    assert!(gplc(&d, &["--ma", "app.wam"], "").status.success());
    let ma = std::fs::read_to_string(d.join("app.ma")).unwrap();
    assert!(ma.contains("pl_code global X6170705F617070_3") || ma.contains("X617070_3"), "{ma}");
    let from_pl = scratch("stop_after_pl");
    std::fs::write(from_pl.join("app.pl"), APP).unwrap();
    assert!(gplc(&from_pl, &["--ma", "app.pl"], "").status.success());
    assert_eq!(std::fs::read_to_string(from_pl.join("app.ma")).unwrap(), ma);
}

#[test]
fn wam_output_is_identical_across_processes() {
    let d = scratch("repro");
    std::fs::write(d.join("app.pl"), APP).unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let o = format!("run{k}.ma");
        assert!(gplc(&d, &["--ma", "app.pl", "-o", &o], "").status.success());
        outs.push(std::fs::read(d.join(o)).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn top_level_answers_queries() {
    let d = scratch("repl");
    std::fs::write(d.join("app.pl"), APP).unwrap();
    let out = gplc(&d, &["app.pl"], "app(X, Y, [1]).\n;\n;\nhalt.\n");
    assert!(out.status.success());
    let s = text(&out.stdout);
    assert!(s.contains("X = []\nY = [1] ? "), "{s}");
    assert!(s.contains("X = [1]\nY = []"), "{s}");
    assert!(s.contains("\nno\n"), "{s}");
}

#[test]
fn halt_sets_exit_code() {
    let d = scratch("halt");
    std::fs::write(d.join("h.pl"), ":- initialization((write(bye), nl, halt(3))).\n").unwrap();
    let out = gplc(&d, &["h.pl"], "");
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(text(&out.stdout), "bye\n");
}

#[test]
fn image_without_initial_goal_warns() {
    let d = scratch("no_goal");
    std::fs::write(d.join("p.pl"), "p(1).\n").unwrap();
    let out = gplc(&d, &["--no-top-level", "p.pl"], "");
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("warning"), "{}", text(&out.stderr));
}

#[test]
fn initialization_runs_in_reverse_link_order() {
    let d = scratch("init_order");
    std::fs::write(d.join("a.pl"), ":- initialization(write(a)).\n").unwrap();
    std::fs::write(d.join("b.pl"), ":- initialization(write(b)).\n").unwrap();
    let out = gplc(&d, &["--no-top-level", "a.pl", "b.pl"], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "ba");
}

#[test]
fn saved_image_runs() {
    let d = scratch("image");
    std::fs::write(d.join("m.pl"), "main :- app(X, [c], [a,b,c]), write(X), nl.\n:- initialization(main).\n").unwrap();
    std::fs::write(d.join("app.pl"), APP).unwrap();
    assert!(gplc(&d, &["--no-top-level", "m.pl", "app.pl", "-o", "m.img"], "").status.success());
    let out = gplc(&d, &["--run", "m.img"], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "[a,b]\n");
}

#[test]
fn library_members_are_pulled_on_demand() {
    let d = scratch("mlib");
    let mut manifest = String::from("# ten members\n");
    for i in 0..10 {
        std::fs::write(d.join(format!("l{i}.pl")), format!("l{i}(v{i}).\n")).unwrap();
        manifest.push_str(&format!("l{i}.pl\n"));
    }
    std::fs::write(d.join("ten.mlib"), manifest).unwrap();
    std::fs::write(d.join("m.pl"), "main :- l2(A), l5(B), write(A+B), nl.\n:- initialization(main).\n").unwrap();
    assert!(gplc(&d, &["--no-top-level", "m.pl", "ten.mlib", "-o", "m.img"], "").status.success());
    let img = std::fs::read_to_string(d.join("m.img")).unwrap();
    let objects: Vec<&str> = img.lines().filter(|l| l.starts_with("%% object")).collect();
    assert_eq!(objects.len(), 3, "{objects:?}");
    let out = gplc(&d, &["--run", "m.img"], "");
    assert_eq!(text(&out.stdout), "v2+v5\n");

    std::fs::write(d.join("bad.pl"), "main :- l2(_), 'not here'(x).\n").unwrap();
    let out = gplc(&d, &["bad.pl", "ten.mlib"], "");
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("'not here'/1"), "{err}");
}

#[test]
fn extra_fd_definitions() {
    let d = scratch("fdlib");
    std::fs::write(d.join("twice.fd"), "x_twice_y(fdv X, fdv Y) {\n  start X in 2*min(Y)..2*max(Y)\n}\n").unwrap();
    std::fs::write(d.join("t.pl"), "main :- fd_domain(X, 0, 20), fd_domain(Y, 3, 4), fd_tell(x_twice_y(X, Y)), fd_dom(X, D), write(D), nl.\n:- initialization(main).\n").unwrap();
    let out = gplc(&d, &["--no-top-level", "--fd-lib", "twice.fd", "t.pl"], "");
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout), "[6,7,8]\n");
}

#[test]
fn unknown_suffix_is_an_error() {
    let d = scratch("suffix");
    std::fs::write(d.join("x.txt"), "").unwrap();
    let out = gplc(&d, &["x.txt"], "");
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).starts_with("gplc: "));
}
