//! Chart-local checks for differential bundles.
//!
//! [`expr`] parses and compares maps, [`jet`] implements the tangent functor
//! on jets, [`bundle`] holds bundles and their laws, and [`universal`]
//! tests the pullback conditions on the lift. [`runner`] ties the suites
//! together for the `tanbun` binary.

pub mod bundle;
pub mod bundle_file;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod jet;
pub mod numeric;
pub mod report;
pub mod runner;
pub mod splitting;
pub mod submersion;
pub mod universal;
pub mod vb;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/bundles.md")]
    mod bundles {}
    #[doc = include_str!("../../../book/src/universality.md")]
    mod universality {}
    #[doc = include_str!("../../../book/src/submersions.md")]
    mod submersions {}
    #[doc = include_str!("../../../book/src/splitting.md")]
    mod splitting {}
    #[doc = include_str!("../../../book/src/vector_bundles.md")]
    mod vector_bundles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
}
