//! Criterion benchmarks for `shortage-core`; see `benches/`.
