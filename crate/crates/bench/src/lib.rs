//! Criterion benchmarks for photonchain; see `benches/`.
