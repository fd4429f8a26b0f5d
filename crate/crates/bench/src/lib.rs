//! Criterion benchmarks for the hot paths of `mfw-core`; see `benches/`.
