//! Criterion benchmarks for the hot paths of `scatter-core`; see `benches/`.
