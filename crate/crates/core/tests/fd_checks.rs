mod common;

use common::fdcheck;

#[test]
fn lte_installs_two_primitives() {
    fdcheck::criterion_6().unwrap();
}

#[test]
fn random_csps_match_oracle() {
    fdcheck::criterion_7().unwrap();
}

#[test]
fn benchmarks_match_exhaustive_search() {
    fdcheck::criterion_8().unwrap();
}

#[test]
fn store_invariants_hold() {
    fdcheck::criterion_9().unwrap();
}

#[test]
fn oracles_agree_on_known_counts() {
    assert_eq!(fdcheck::queens_oracle(4).len(), 2);
    assert_eq!(fdcheck::queens_oracle(6).len(), 4);
    assert_eq!(fdcheck::send_oracle().len(), 1);
}

#[test]
fn bit_vector_domains_propagate_alike() {
    let dense = fdcheck::random_csps(150, 7, false).unwrap();
    let sparse = fdcheck::random_csps(150, 7, true).unwrap();
    assert_eq!(dense, sparse);
}
