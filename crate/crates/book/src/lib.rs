//! The guide's chapters, compiled so that every Rust snippet in them runs as
//! a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/representation.md")]
pub mod representation {}

#[doc = include_str!("../../../book/src/separators.md")]
pub mod separators {}

#[doc = include_str!("../../../book/src/filtering.md")]
pub mod filtering {}

#[doc = include_str!("../../../book/src/partial-cover.md")]
pub mod partial_cover {}

#[doc = include_str!("../../../book/src/out-trees.md")]
pub mod out_trees {}

#[doc = include_str!("../../../book/src/paths.md")]
pub mod paths {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/file-formats.md")]
pub mod file_formats {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
