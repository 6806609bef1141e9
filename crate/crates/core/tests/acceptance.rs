//! Full reproduction checklist; prints one line per criterion.

use spinladder_core::acceptance::{Suite, ALL_CRITERIA};

#[test]
fn acceptance() {
    let results = Suite::new().with_reporter(|r| println!("{r}")).run_all(&ALL_CRITERIA);
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
