//! Regenerates `fixtures/olid_fixture.tsv`.
fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/olid_fixture.tsv");
    std::fs::write(path, olid_core::fixture::fixture_tsv()).expect("write fixture");
}
