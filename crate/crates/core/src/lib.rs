//! Spectral model of a particle held between two delta barriers.
//!
//! Scattering-state expansion, resonance poles, packet projection, time
//! evolution, perturbative driving and a finite-difference reference solver.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod deriv;
pub mod drive;
pub mod error;
pub mod evolve;
pub mod faddeeva;
pub mod field;
pub mod model;
pub mod oracle;
pub mod packet;
pub mod poles;
pub mod quad;
pub mod spectrum;

pub use error::{Error, Result};
