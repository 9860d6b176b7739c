//! Criterion benchmarks for the hot paths of `ftqlab`; see `benches/`.
