//! The chapters of the guide in `book/src`, included so that
//! `cargo test --doc` runs every listing.

#[doc = include_str!("../../../book/src/ch01_overview.md")]
pub mod ch01_overview {}

#[doc = include_str!("../../../book/src/ch02_syntax.md")]
pub mod ch02_syntax {}

#[doc = include_str!("../../../book/src/ch03_reduction.md")]
pub mod ch03_reduction {}

#[doc = include_str!("../../../book/src/ch04_typing.md")]
pub mod ch04_typing {}

#[doc = include_str!("../../../book/src/ch05_bridge.md")]
pub mod ch05_bridge {}

#[doc = include_str!("../../../book/src/ch06_sn.md")]
pub mod ch06_sn {}

#[doc = include_str!("../../../book/src/ch07_cli.md")]
pub mod ch07_cli {}

#[doc = include_str!("../../../book/src/ch08_gaps.md")]
pub mod ch08_gaps {}
