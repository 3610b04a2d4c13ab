//! Discrete time and band limiting on `Z/2nZ`.
//!
//! The guide in `book/` walks through the modules in order; its code
//! listings are compiled as doc-tests of this crate.

pub mod bethe;
pub mod core_model;
pub mod error;
pub mod operators;
pub mod polymap;
pub mod recon;
pub mod spectral;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/polymap.md")]
    mod polymap {}
    #[doc = include_str!("../../../book/src/bethe.md")]
    mod bethe {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
