//! The guide in `book/`, compiled as doc-tests.
//!
//! mdBook cannot run listings against a workspace crate, so each chapter is
//! included as the documentation of an empty module and `cargo test --doc`
//! runs its code blocks. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/simplex.md")]
pub mod simplex {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}
#[doc = include_str!("../../../book/src/channels.md")]
pub mod channels {}
#[doc = include_str!("../../../book/src/conversion.md")]
pub mod conversion {}
#[doc = include_str!("../../../book/src/multicopy.md")]
pub mod multicopy {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
