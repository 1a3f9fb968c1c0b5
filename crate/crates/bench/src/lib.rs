//! Shared fixtures for the benchmark targets.

pub use swapmc_core::bundled::{shrink_htlc, ESCROW_SOURCE, HTLC_SOURCE};
pub use swapmc_core::compile::{compile, CompiledModel};
pub use swapmc_core::parser::parse_model;

pub fn compiled(src: &str) -> CompiledModel {
    compile(&parse_model(src).expect("fixture parses")).expect("fixture validates")
}
