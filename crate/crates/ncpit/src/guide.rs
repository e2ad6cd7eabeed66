//! The user guide in `book/`, compiled here so its examples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/polynomials.md")]
pub mod polynomials {}
#[doc = include_str!("../../../book/src/circuits.md")]
pub mod circuits {}
#[doc = include_str!("../../../book/src/depth_reduction.md")]
pub mod depth_reduction {}
#[doc = include_str!("../../../book/src/hitting_sets.md")]
pub mod hitting_sets {}
#[doc = include_str!("../../../book/src/fewpt.md")]
pub mod fewpt {}
#[doc = include_str!("../../../book/src/hard_polynomials.md")]
pub mod hard_polynomials {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
