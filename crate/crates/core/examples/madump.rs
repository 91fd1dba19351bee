fn main() {
    let path = std::env::args().nth(1).unwrap();
    let src = std::fs::read_to_string(&path).unwrap();
    let mut ops = gpl_core::reader::OpTable::default();
    let out = gpl_core::pl2wam::compile_source(&src, &path, &mut ops, &Default::default());
    let ma = gpl_core::wam2ma::translate(&out.file);
    let text = gpl_core::ma::emit_ma(&ma);
    assert_eq!(gpl_core::ma::parse_ma(&text).unwrap(), ma);
    print!("{text}");
}
