//! Benchmark-only crate; see `benches/hot_loop.rs`.
