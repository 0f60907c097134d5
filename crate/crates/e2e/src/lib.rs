//! Acceptance checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p electorate-e2e --test acceptance`.
