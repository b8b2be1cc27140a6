//! The guide's chapters compiled as doc-tests, so every snippet in the book
//! is checked by `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/free-resolvent.md")]
pub mod free_resolvent {}
#[doc = include_str!("../../../book/src/potentials.md")]
pub mod potentials {}
#[doc = include_str!("../../../book/src/characteristic-functions.md")]
pub mod characteristic_functions {}
#[doc = include_str!("../../../book/src/eigensearch.md")]
pub mod eigensearch {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod configuration {}
