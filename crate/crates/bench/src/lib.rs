//! Criterion benchmarks for the fibering crate live in `benches/`.
