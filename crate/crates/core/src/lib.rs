//! Integration built from positive linear functionals on vector lattices.

pub mod dirichlet;
pub mod error;
pub mod extension;
pub mod functional;
pub mod fuzz;
pub mod lattice;
pub mod lebesgue;
pub mod rational;
pub mod rings;
pub mod verify;
pub mod wiener;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    struct Overview;
    #[doc = include_str!("../../../book/src/lattices.md")]
    struct Lattices;
    #[doc = include_str!("../../../book/src/functionals.md")]
    struct Functionals;
    #[doc = include_str!("../../../book/src/extension.md")]
    struct Extension;
    #[doc = include_str!("../../../book/src/lebesgue.md")]
    struct Lebesgue;
    #[doc = include_str!("../../../book/src/wiener.md")]
    struct Wiener;
    #[doc = include_str!("../../../book/src/dirichlet.md")]
    struct Dirichlet;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
