//! Criterion benchmarks for the analytic model and the Monte Carlo engine;
//! see `benches/`.
