//! Criterion benchmarks for `qmagic`; see `benches/`.
