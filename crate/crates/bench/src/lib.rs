//! Benchmarks only; see `benches/bounds.rs`.
