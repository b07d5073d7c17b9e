//! Criterion benchmarks for the hot paths of `mh-phone-core`; see `benches/`.
