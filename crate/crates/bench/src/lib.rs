//! Criterion benchmarks for the grid, renewal and Wiener kernels; see `benches/`.
