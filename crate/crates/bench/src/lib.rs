//! Criterion benchmarks for `qosketch`; see `benches/`.
