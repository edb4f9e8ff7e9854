//! The guide under `book/`, one module per chapter. Building the docs of
//! this crate runs every Rust block in the guide as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/optimizer.md")]
pub mod optimizer {}

#[doc = include_str!("../../../book/src/controller.md")]
pub mod controller {}

#[doc = include_str!("../../../book/src/benchmarks.md")]
pub mod benchmarks {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/twin.md")]
pub mod twin {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
