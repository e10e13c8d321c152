//! The book chapters, compiled as doc-tests.
//!
//! Each module's documentation is one chapter of the guide in `book/`;
//! `cargo test --doc` runs every code block, which keeps the book and
//! the library in sync.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/randomness.md")]
pub mod randomness {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
