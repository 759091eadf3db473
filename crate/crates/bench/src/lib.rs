//! Criterion benchmarks for the solver and program builders; see `benches/`.
