//! Derivative-free (finite-difference) optimization over rank-one
//! projections, the positive definite cone and the state space.
//!
//! Objectives are treated as black boxes. All searches are multi-start and
//! fully determined by the configured seed; the best restart wins, ties going
//! to the earliest.

mod cone;
mod descent;
mod sphere;
mod states;

pub use cone::{infimum_over_pd, ConeOptConfig, ConeOptResult};
pub use descent::FD_STEP;
pub use sphere::{maximize_over_rank_one, minimize_over_rank_one, SphereOptConfig, SphereOptResult};
pub use states::{maximize_over_states, StateOptResult};
