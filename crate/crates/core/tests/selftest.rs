//! The acceptance runner detects corrupted tables and honours filters.

use myfd::acceptance;
use myfd::{Catalog, Generator};

#[test]
fn corrupted_conjugate_table_fails_the_suite() {
    let mut catalog = Catalog::standard();
    catalog.perturb(Generator::Kl);
    let report = acceptance::run(&catalog, Some("categorical")).unwrap();
    assert!(!report.pass);
}

#[test]
fn filter_selects_a_single_criterion() {
    let report = acceptance::run(&Catalog::standard(), Some("lambert")).unwrap();
    assert_eq!(report.criteria.len(), 1);
    assert_eq!(report.criteria[0].id, 10);
    assert!(report.pass);
    let by_id = acceptance::run(&Catalog::standard(), Some("2")).unwrap();
    assert_eq!(by_id.criteria[0].key, "gamma");
}

#[test]
fn unknown_filter_is_an_input_error() {
    let err = acceptance::run(&Catalog::standard(), Some("nonexistent")).unwrap_err();
    assert!(err.is_input_error());
}
