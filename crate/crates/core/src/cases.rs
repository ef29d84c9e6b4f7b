//! Bundled test cases.

use crate::network::{load_network, Network};

/// Raw text of the bundled IEEE 30-bus case file.
pub const IEEE30_CASE: &str = include_str!("../data/ieee30.case");

pub fn ieee30() -> Network {
    load_network(IEEE30_CASE.as_bytes()).expect("bundled IEEE 30-bus case is valid")
}
