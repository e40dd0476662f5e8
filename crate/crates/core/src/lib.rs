//! Quantitative views of decoherence and the discord measures built on them.
//!
//! Everything here works on dense complex matrices of small dimension (total
//! Hilbert-space dimension up to about 64) and is `no_std` with `alloc`. The
//! companion `decolab` crate carries file formats, the CLI and the parallel
//! ensemble runners.
//!
//! Layout:
//! - [`qmat`]: dense complex linear algebra, Hermitian eigensolver, tensor
//!   structure, and the distinguishability measures (relative entropy,
//!   Hilbert–Schmidt distance, fidelity, trace distance).
//! - [`states`]: density operators, purification, random states, CQ/CC
//!   classification.
//! - [`infotypes`]: types of information (projector decompositions of the
//!   identity), pinching, measurement isometries, mutually unbiased bases.
//! - [`entropies`]: von Neumann, quadratic and min conditional entropies of
//!   the post-measurement classical-quantum state, and their certainties.
//! - [`fidelity`]: maximization of fidelity against pinched states.
//! - [`theorems`]: executable checks of the unification identities.
//! - [`discord`]: basis-minimized discord measures, one-way and two-way.
//! - [`channels`]: Kraus channels, Choi triples, complementary channels.
//! - [`security`]: secure-bit rates and single-shot hashing lengths.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channels;
pub mod discord;
pub mod entropies;
mod error;
pub mod fidelity;
pub mod infotypes;
pub mod optim;
pub mod qmat;
pub mod security;
pub mod states;
pub mod theorems;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use qmat::ComplexMatrix;
pub use states::{DensityOperator, PureState};
pub use infotypes::InfoType;
