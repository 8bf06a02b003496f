//! Criterion benchmarks for `fglab-core`; see `benches/`.
