//! Criterion benchmarks for `taxoeval-core`. Run with `cargo bench -p taxoeval-bench`.
