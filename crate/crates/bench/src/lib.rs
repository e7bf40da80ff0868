//! Criterion benchmarks for `dpgraph`; see `benches/`.
