//! Sequential Kronecker-sum channel estimation for hybrid analog-digital
//! MIMO-OFDM uplinks.
//!
//! The wideband channel `H = [H_1 … H_K]` is approximated by a sum of
//! Kronecker products `Σ_r C_r ⊗ B_r`. Folding the combined measurement
//! `Y = A·H + Z` into a 3-way tensor gives one Tucker term per Kronecker
//! term, fitted one at a time by alternating least squares.
//!
//! Modules, bottom-up:
//!
//! * [`tensor`]: 3-way tensors, unfoldings, n-mode products, core tensor
//! * [`kron`]: nearest Kronecker product and sequential factorization
//! * [`channel`]: clustered-delay-line channel generator
//! * [`measurement`]: hybrid combiners, precoders, noisy measurements
//! * [`estimators`]: least squares and SALSA
//! * [`experiment`]: seeded Monte-Carlo sweeps and CSV output

pub mod channel;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod kron;
pub mod linalg;
pub mod measurement;
pub mod parallel;
pub mod selftest;
pub mod tensor;

pub use error::{Error, Result};
