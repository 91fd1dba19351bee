fn main() {
    let path = std::env::args().nth(1).unwrap();
    let src = std::fs::read_to_string(&path).unwrap();
    let mut ops = gpl_core::reader::OpTable::default();
    let out = gpl_core::pl2wam::compile_source(&src, &path, &mut ops, &Default::default());
    eprintln!("{:?} {:?}", out.warnings, out.errors);
    print!("{}", gpl_core::pl2wam::emit_wam(&out.file));
}
