//! Criterion benchmarks for `bures-core`; see `benches/kernels.rs`.
