//! Criterion benchmarks for the solvers and simulator; see `benches/`.
