// SPDX-License-Identifier: MIT OR Apache-2.0

//! Benchmarks for `qexp-core` live in `benches/`; this crate has no API.
