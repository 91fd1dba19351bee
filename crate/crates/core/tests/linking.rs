mod common;

use common::linkcheck;

#[test]
fn library_members_linked_on_demand() {
    linkcheck::criterion_10().unwrap();
}

#[test]
fn start_protocol() {
    linkcheck::criterion_11().unwrap();
}

#[test]
fn compilation_is_reproducible() {
    linkcheck::criterion_12().unwrap();
}
