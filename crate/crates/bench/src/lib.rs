//! Benchmarks for the HEOL simulator live in `benches/`.
