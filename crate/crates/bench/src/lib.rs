//! Criterion benchmarks for the harmonic-gasket library; see `benches/`.
