//! Collectibility witness on a single hyper-entangled photon pair.
//!
//! Modules, bottom-up:
//!
//! - [`qmat`]: dense density matrices on labelled qubit registers.
//! - [`states`]: Bell, separable, maximally mixed and Werner test states, their
//!   hyper-entangled products, and dephasing in either degree of freedom.
//! - [`witness`]: joint probabilities, normalization policies and the witness.
//! - [`optics`]: the eight-mode linear-optical realization.
//! - [`counts`]: seeded binomial coincidence sampling and bootstrap errors.

pub mod counts;
pub mod error;
pub mod optics;
pub mod qmat;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
