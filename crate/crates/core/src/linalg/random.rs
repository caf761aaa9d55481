//! Seeded random ensembles. Every sampler takes the generator explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{outer, C64, ComplexMatrix, ComplexVector};
use super::operators::{DensityOperator, HermitianMatrix, PdOperator, PsdOperator, RankOneProjection};
use crate::{Error, Result};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalue range of the `pd` ensemble; keeps condition numbers ≤ 20.
pub const PD_SPECTRUM: (f64, f64) = (0.1, 2.0);

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::from_fn(d, |_, _| complex_gaussian(rng))
}

/// Haar unitary: Gram–Schmidt orthonormalization of a complex Ginibre
/// matrix (two passes).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut q = gaussian_matrix(d, d, rng);
    for j in 0..d {
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k).into_owned();
                let proj = qk.dotc(&q.column(j));
                let mut col = q.column_mut(j);
                col -= qk * proj;
            }
        }
        let n = q.column(j).norm();
        q.column_mut(j).unscale_mut(n);
    }
    q
}

/// (G + G*)/2 with Gaussian G.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::symmetrized(&gaussian_matrix(d, d, rng))
}

/// G G* / tr(G G*) with square Gaussian G.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    let g = gaussian_matrix(d, d, rng);
    let w = PsdOperator::new(&g * g.adjoint()).expect("Wishart matrix is PSD");
    DensityOperator::normalized(&w).expect("Wishart matrix has positive trace")
}

/// U diag(λ) U* with Haar U and λ uniform in [`PD_SPECTRUM`].
pub fn random_pd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PdOperator {
    let spectrum: Vec<f64> = (0..d)
        .map(|_| rng.random_range(PD_SPECTRUM.0..PD_SPECTRUM.1))
        .collect();
    pd_with_spectrum(&spectrum, rng)
}

/// U diag(spectrum) U* with Haar U.
pub fn pd_with_spectrum<R: Rng + ?Sized>(spectrum: &[f64], rng: &mut R) -> PdOperator {
    let u = haar_unitary(spectrum.len(), rng);
    let m = &u * super::matrix::real_diag(spectrum) * u.adjoint();
    PdOperator::new(m).expect("positive spectrum")
}

/// G G* / r with G of size d×r.
pub fn random_psd_rank<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> PsdOperator {
    if r == 0 {
        return PsdOperator::new(ComplexMatrix::zeros(d, d)).expect("zero is PSD");
    }
    let g = gaussian_matrix(d, r, rng);
    PsdOperator::new((&g * g.adjoint()).unscale(r as f64)).expect("Wishart matrix is PSD")
}

pub fn random_rank_one<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RankOneProjection {
    RankOneProjection::from_vector(gaussian_vector(d, rng)).expect("Gaussian vector is nonzero")
}

/// A random PSD B with rank r and a C ≥ B, both positive definite.
pub fn random_ordered_pd_pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (PdOperator, PdOperator) {
    let b = random_pd(d, rng);
    let r = rng.random_range(1..=d);
    let gap = random_psd_rank(d, r, rng);
    let c = PdOperator::new(b.matrix() + gap.matrix()).expect("sum of PD and PSD is PD");
    (b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Unitary,
    Density,
    Pd,
    PsdRank(usize),
    RankOneProjection,
}

#[derive(Debug, Clone)]
pub enum Sample {
    Unitary(ComplexMatrix),
    Density(DensityOperator),
    Pd(PdOperator),
    Psd(PsdOperator),
    RankOne(RankOneProjection),
}

impl Sample {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            Sample::Unitary(u) => u.clone(),
            Sample::Density(x) => x.matrix().clone(),
            Sample::Pd(x) => x.matrix().clone(),
            Sample::Psd(x) => x.matrix().clone(),
            Sample::RankOne(p) => outer(p.vector()),
        }
    }
}

/// Deterministic sample of the given ensemble for `(kind, d, seed)`.
pub fn random_ensemble(kind: EnsembleKind, d: usize, seed: u64) -> Result<Sample> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} must be at least 2")));
    }
    let mut rng = seeded_rng(seed);
    Ok(match kind {
        EnsembleKind::Unitary => Sample::Unitary(haar_unitary(d, &mut rng)),
        EnsembleKind::Density => Sample::Density(random_density(d, &mut rng)),
        EnsembleKind::Pd => Sample::Pd(random_pd(d, &mut rng)),
        EnsembleKind::PsdRank(r) => {
            if r > d {
                return Err(Error::InvalidArgument(format!("rank {r} exceeds dimension {d}")));
            }
            Sample::Psd(random_psd_rank(d, r, &mut rng))
        }
        EnsembleKind::RankOneProjection => Sample::RankOne(random_rank_one(d, &mut rng)),
    })
}
