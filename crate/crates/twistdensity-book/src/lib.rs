//! The guide in `book/` as doc modules, one per chapter, so that
//! `cargo test` runs every code block against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
#[doc = include_str!("../../../book/src/arithmetic.md")]
pub mod arithmetic {}
#[doc = include_str!("../../../book/src/test-functions.md")]
pub mod test_functions {}
#[doc = include_str!("../../../book/src/family-density.md")]
pub mod family_density {}
#[doc = include_str!("../../../book/src/predictions.md")]
pub mod predictions {}
#[doc = include_str!("../../../book/src/zeros.md")]
pub mod zeros {}
#[doc = include_str!("../../../book/src/outputs.md")]
pub mod outputs {}
