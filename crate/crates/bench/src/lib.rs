//! Benchmarks for `bmquad`; see `benches/core.rs`.

pub use bmquad;
