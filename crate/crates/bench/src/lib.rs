//! Criterion benchmarks for `palinsum`; see `benches/`.
