//! The operator hierarchy: Hermitian ⊇ PSD ⊇ PD, densities, rank-one
//! projections, and the functional calculus on them.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::eigen::{jacobi_eigen, EigenSystem};
use super::matrix::{
    check_same_dim, check_square, hermitian_defect, identity, op_norm, outer, symmetrize, trace_re,
    C64, ComplexMatrix, ComplexVector,
};
use crate::{Error, Result};

/// Numerical thresholds shared by the operator classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity check, relative to max(1, ‖M‖_op).
    pub hermitian: f64,
    /// Eigenvalues ≥ −psd·max(1, λ_max) count as nonnegative and get clamped.
    pub psd: f64,
    /// Positive definite iff λ_min > pd·λ_max.
    pub pd: f64,
    /// Support cutoff, relative to λ_max.
    pub support: f64,
    /// Eigenvalue clustering width, relative to max(1, λ_max).
    pub cluster: f64,
    /// Unit-trace check for densities.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            psd: 1e-10,
            pd: 1e-10,
            support: 1e-10,
            cluster: 1e-8,
            trace: 1e-10,
        }
    }
}

impl Tolerances {
    /// Overrides one field by name (`hermitian`, `psd`, `pd`, `support`,
    /// `cluster`, `trace`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {key} must be positive")));
        }
        let slot = match key {
            "hermitian" => &mut self.hermitian,
            "psd" => &mut self.psd,
            "pd" => &mut self.pd,
            "support" => &mut self.support,
            "cluster" => &mut self.cluster,
            "trace" => &mut self.trace,
            _ => return Err(Error::InvalidArgument(format!("unknown tolerance {key}"))),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    /// Checks M ≈ M* and stores (M + M*)/2.
    pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let defect = hermitian_defect(&m);
        if defect > tol.hermitian * op_norm(&m).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(HermitianMatrix { m: symmetrize(&m) })
    }

    /// Takes the Hermitian part without checking how far `m` is from it.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        HermitianMatrix { m: symmetrize(m) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn eigen(&self) -> Result<EigenSystem> {
        jacobi_eigen(&self.m)
    }
}

/// Positive semidefinite operator. Keeps its eigensystem, so functional
/// calculus on it costs no further diagonalization.
#[derive(Debug, Clone)]
pub struct PsdOperator {
    m: ComplexMatrix,
    eig: EigenSystem,
    tol: Tolerances,
}

impl PsdOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianMatrix::new_with(m, tol)?;
        Self::from_hermitian(h, tol)
    }

    /// Eigenvalues in [−psd·max(1, λ_max), 0) are clamped to zero.
    pub fn from_hermitian(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let mut eig = h.eigen()?;
        let floor = -tol.psd * eig.max().max(1.0);
        let min = eig.min();
        if min < floor {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let m = if min < 0.0 {
            for v in eig.values.iter_mut() {
                *v = v.max(0.0);
            }
            symmetrize(&eig.reassemble())
        } else {
            h.into_matrix()
        };
        Ok(PsdOperator { m, eig, tol: *tol })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.m)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.max()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig.min()
    }

    fn support_cutoff(&self) -> f64 {
        self.tol.support * self.eig.max()
    }

    pub fn rank(&self) -> usize {
        let cut = self.support_cutoff();
        self.eig.values.iter().filter(|&&l| l > cut).count()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eig.max() > 0.0 && self.eig.min() > self.tol.pd * self.eig.max()
    }

    /// λ·A for λ ≥ 0.
    pub fn scaled(&self, lambda: f64) -> Result<PsdOperator> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {lambda} must be nonnegative")));
        }
        let mut eig = self.eig.clone();
        for v in eig.values.iter_mut() {
            *v *= lambda;
        }
        Ok(PsdOperator {
            m: self.m.scale(lambda),
            eig,
            tol: self.tol,
        })
    }

    /// A + εI, reusing the eigenvectors of A.
    pub fn shifted(&self, eps: f64) -> Result<PsdOperator> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("shift {eps} must be nonnegative")));
        }
        let d = self.dim();
        let mut eig = self.eig.clone();
        for v in eig.values.iter_mut() {
            *v += eps;
        }
        Ok(PsdOperator {
            m: &self.m + identity(d).scale(eps),
            eig,
            tol: self.tol,
        })
    }

    /// Applies a scalar function through the spectrum on the whole space.
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        symmetrize(&self.eig.apply(f, |_| true))
    }
}

/// Positive definite operator.
#[derive(Debug, Clone)]
pub struct PdOperator(PsdOperator);

impl PdOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::from_psd(PsdOperator::new(m)?)
    }

    pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        Self::from_psd(PsdOperator::new_with(m, tol)?)
    }

    pub fn from_psd(a: PsdOperator) -> Result<Self> {
        if !a.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                min: a.lambda_min(),
                max: a.lambda_max(),
            });
        }
        Ok(PdOperator(a))
    }

    pub fn identity(d: usize) -> Self {
        PdOperator::new(identity(d)).expect("identity is positive definite")
    }

    pub fn as_psd(&self) -> &PsdOperator {
        &self.0
    }

    pub fn into_psd(self) -> PsdOperator {
        self.0
    }

    pub fn scaled(&self, lambda: f64) -> Result<PdOperator> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {lambda} must be positive")));
        }
        Ok(PdOperator(self.0.scaled(lambda)?))
    }

    /// A^p for any real p.
    pub fn power(&self, p: f64) -> ComplexMatrix {
        self.0.map_spectrum(|l| l.powf(p))
    }
}

impl Deref for PdOperator {
    type Target = PsdOperator;
    fn deref(&self) -> &PsdOperator {
        &self.0
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct DensityOperator(PsdOperator);

impl DensityOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::from_psd(PsdOperator::new(m)?)
    }

    pub fn from_psd(a: PsdOperator) -> Result<Self> {
        let t = a.trace();
        if (t - 1.0).abs() > a.tolerances().trace {
            return Err(Error::NotDensity(t));
        }
        Ok(DensityOperator(a))
    }

    /// A / tr A.
    pub fn normalized(a: &PsdOperator) -> Result<Self> {
        let t = a.trace();
        if !(t > 0.0) {
            return Err(Error::NotDensity(t));
        }
        Ok(DensityOperator(a.scaled(1.0 / t)?))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityOperator::normalized(PdOperator::identity(d).as_psd()).expect("I/d is a density")
    }

    /// Nonsingular densities form M(H).
    pub fn is_nonsingular(&self) -> bool {
        self.0.is_positive_definite()
    }

    pub fn to_pd(&self) -> Result<PdOperator> {
        PdOperator::from_psd(self.0.clone())
    }

    pub fn as_psd(&self) -> &PsdOperator {
        &self.0
    }
}

impl Deref for DensityOperator {
    type Target = PsdOperator;
    fn deref(&self) -> &PsdOperator {
        &self.0
    }
}

/// Rank-one projection v v*, stored through its unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneProjection {
    v: ComplexVector,
}

impl RankOneProjection {
    /// Normalizes `v`; fails on (numerically) zero vectors.
    pub fn from_vector(v: ComplexVector) -> Result<Self> {
        let n = v.norm();
        if !(n > 1e-150) || !n.is_finite() {
            return Err(Error::NotUnitVector(n));
        }
        Ok(RankOneProjection { v: v.unscale(n) })
    }

    /// Accepts `v` only if it is already a unit vector within 1e−12.
    pub fn from_unit_vector(v: ComplexVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitVector(n));
        }
        Ok(RankOneProjection { v })
    }

    pub fn basis(d: usize, i: usize) -> Self {
        RankOneProjection {
            v: super::matrix::basis_vector(d, i),
        }
    }

    /// P_{(e_i + c e_j)/√2}.
    pub fn superposition(d: usize, i: usize, j: usize, c: C64) -> Self {
        let mut v = ComplexVector::zeros(d);
        v[i] += C64::new(1.0, 0.0);
        v[j] += c;
        Self::from_vector(v).expect("nonzero superposition")
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        outer(&self.v)
    }

    /// tr P Q = |⟨v, w⟩|².
    pub fn transition(&self, other: &RankOneProjection) -> f64 {
        self.v.dotc(&other.v).norm_sqr()
    }

    /// ⟨v, X v⟩ = tr P X.
    pub fn expectation(&self, x: &ComplexMatrix) -> C64 {
        self.v.dotc(&(x * &self.v))
    }

    /// Entrywise conjugate projection P̄.
    pub fn conj(&self) -> Self {
        RankOneProjection {
            v: self.v.map(|z| z.conj()),
        }
    }

    pub fn to_psd(&self) -> PsdOperator {
        PsdOperator::new(self.matrix()).expect("rank-one projection is PSD")
    }
}

/// Σ λ_j^p P_j over the support of `a`.
///
/// Negative powers of a singular operator are only defined as pseudo-powers
/// (kernel mapped to zero) and must be requested with `pseudo`.
pub fn frac_power(a: &PsdOperator, p: f64, pseudo: bool) -> Result<HermitianMatrix> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("power {p} outside [-1, 1]")));
    }
    if p < 0.0 && !pseudo && !a.is_positive_definite() {
        return Err(Error::Singular);
    }
    let cut = a.support_cutoff();
    let m = a.eig.apply(|l| l.powf(p), |l| l > cut);
    Ok(HermitianMatrix::symmetrized(&m))
}

/// Orthogonal projection onto the range of `a`.
pub fn support_projection(a: &PsdOperator) -> ComplexMatrix {
    let cut = a.support_cutoff();
    symmetrize(&a.eig.apply(|_| 1.0, |l| l > cut && l > 0.0))
}

/// supp A ⊆ supp B, tested as ‖(I − S_B) A (I − S_B)‖_op ≤ τ·max(1, ‖A‖_op).
pub fn support_contained(a: &PsdOperator, b: &PsdOperator) -> Result<bool> {
    let d = check_same_dim(a.matrix(), b.matrix())?;
    let kernel = identity(d) - support_projection(b);
    let leak = op_norm(&(&kernel * a.matrix() * &kernel));
    Ok(leak <= b.tol.support * a.lambda_max().max(1.0))
}
