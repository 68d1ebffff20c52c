//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion.

use myfd::acceptance;
use myfd::Catalog;

#[test]
fn acceptance_criteria() {
    let report = acceptance::run(&Catalog::standard(), None).unwrap();
    println!();
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed: Vec<_> = report.criteria.iter().filter(|c| !c.pass).map(|c| c.key).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
