//! Runs every code listing of the guide in `book/` as a doc-test.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}
#[doc = include_str!("../../../book/src/populations.md")]
pub mod populations {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/montecarlo.md")]
pub mod montecarlo {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
