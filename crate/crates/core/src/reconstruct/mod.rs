//! Reconstruction from divergence queries: quadratic-form tomography of a
//! hidden operator, spectral peeling of a hidden density, Wigner synthesis
//! of (anti)unitaries, and the end-to-end decompiler for divergence
//! preserving maps.

mod decompile;
mod oracle;
mod peel;
mod tomography;
mod wigner;

pub use decompile::{preserver_decompile, DecompileConfig, DecompileReport, PdMap, StageFailure};
pub use oracle::{chi2_oracle, k_star_oracle, DivergenceOracle};
pub use peel::{spectral_peel, PEEL_GROUPING};
pub use tomography::{probe_operator, quadratic_form_tomography, tomography_probes, ProbeSchedule};
pub use wigner::{
    check_orthogonality_preservation, check_transition_probabilities, orthogonal_pairs, random_pairs,
    scalar_residual, wigner_synthesize, CheckOutcome, ConjugationMap, ProjectionMap, SymmetryKind,
    CHECK_TOL,
};
