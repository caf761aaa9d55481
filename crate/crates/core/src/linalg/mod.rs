//! Dense complex Hermitian linear algebra at desk scale (d ≤ 16).

pub mod eigen;
pub mod matrix;
pub mod operators;
pub mod random;

pub use eigen::{eigh, eigh_with, jacobi_eigen, EigenSystem, SpectralDecomposition};
pub use matrix::{
    matrix_from_json, matrix_to_json, norms, op_norm, hs_norm, C64, ComplexMatrix, ComplexVector,
    MatrixJson, Norms,
};
pub use operators::{
    frac_power, support_contained, support_projection, DensityOperator, HermitianMatrix,
    PdOperator, PsdOperator, RankOneProjection, Tolerances,
};
pub use random::{random_ensemble, seeded_rng, EnsembleKind, Sample, SeededRng};
