//! Spectral-Galerkin simulation of the damped/driven nonlinear Schrödinger
//! equation on a torus, together with its resonant effective equation.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: the truncated Fourier lattice, damping and noise spectra.
//! - [`resonance`]: resonant tuples, the resonance module and unimodular bases.
//! - [`field`]: spectral fields, actions, phases, rotations and monomials.
//! - [`dynamics`]: the nonlinearity, the resonant field `R⁰`, Hamiltonians and
//!   the stochastic integrators.
//! - [`stats`]: ensembles, empirical laws, distances and the small-`ν`
//!   convergence experiment.
//! - [`check`]: the invariant suite behind `rnls check`.
//! - [`config`] and [`cli`]: experiment configuration and the command line.
//!
//! The guide in `book/` walks through the same material with runnable snippets.

pub mod check;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod lattice;
pub mod resonance;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    pub mod lattice {}
    #[doc = include_str!("../../../book/src/resonances.md")]
    pub mod resonances {}
    #[doc = include_str!("../../../book/src/resonant-field.md")]
    pub mod resonant_field {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
