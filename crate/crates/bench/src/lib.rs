//! Benchmark-only package; the targets live in benches/samplers.rs.
