//! Acceptance suite for `gnnseed`. Run with `cargo test -p gnnseed-validation`.
