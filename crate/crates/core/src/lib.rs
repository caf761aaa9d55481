//! # chi2lab
//!
//! Numerics for the quantum χ²_α-divergence
//!
//! ```text
//! K_α(A‖B) = tr B^{−α}(A−B)B^{α−1}(A−B),   α ∈ [0, 1]
//! ```
//!
//! on positive definite and positive semidefinite operators, together with
//! the machinery needed to reconstruct hidden operators from divergence
//! queries and to recover the unitary or antiunitary conjugation behind a
//! divergence-preserving map.
//!
//! ## Layout
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`linalg`] | Hermitian matrices, cyclic Jacobi eigensolver, fractional powers, supports, norms, random ensembles, matrix JSON |
//! | [`divergence`] | χ²_α (finite, extended, limit probe), the rank-one product form K*, f-, Bregman and Jensen divergences |
//! | [`optim`] | multi-start projected gradient over rank-one projections, the PD cone and the state space |
//! | [`reconstruct`] | divergence oracles, quadratic-form tomography, spectral peeling, Wigner synthesis, the preserver decompiler |
//! | [`lab`] | property suite, discontinuity demos, distinguishers against f-/Bregman/Jensen divergences |
//!
//! All randomness is driven by explicit seeds; every routine is a pure
//! function of its inputs.

#![forbid(unsafe_code)]

pub mod divergence;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod optim;
pub mod reconstruct;

pub use error::{Error, Result};
