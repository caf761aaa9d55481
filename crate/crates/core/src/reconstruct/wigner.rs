use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::matrix::{
    entrywise_conj, identity, op_norm, serde_matrix, symmetrize, C64, ComplexMatrix, ComplexVector,
};
use crate::linalg::operators::{PdOperator, RankOneProjection};
use crate::linalg::random::{haar_unitary, random_rank_one};
use crate::{Error, Result};

/// Probe transitions must be preserved this well before synthesis starts.
const PROBE_TRANSITION_TOL: f64 = 1e-6;
/// The synthesized map must reproduce every probe image this well.
const REPRODUCTION_TOL: f64 = 1e-7;
/// Fidelity slack when deciding between the unitary and antiunitary predictions.
const KIND_TOL: f64 = 1e-6;
/// Default pass threshold of the orthogonality and transition checks.
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    Unitary,
    Antiunitary,
}

/// A ↦ UAU* (unitary) or A ↦ UĀU* (antiunitary, Ā the entrywise conjugate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugationMap {
    pub kind: SymmetryKind,
    #[serde(with = "serde_matrix")]
    pub u: ComplexMatrix,
}

impl ConjugationMap {
    pub fn new(u: ComplexMatrix, kind: SymmetryKind) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare(u.nrows(), u.ncols()));
        }
        let defect = op_norm(&(u.adjoint() * &u - identity(u.nrows())));
        if defect > 1e-8 {
            return Err(Error::InvalidArgument(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(ConjugationMap { kind, u })
    }

    pub fn identity(d: usize) -> Self {
        ConjugationMap { kind: SymmetryKind::Unitary, u: identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let inner = match self.kind {
            SymmetryKind::Unitary => a.clone(),
            SymmetryKind::Antiunitary => entrywise_conj(a),
        };
        symmetrize(&(&self.u * inner * self.u.adjoint()))
    }

    pub fn apply_pd(&self, a: &PdOperator) -> Result<PdOperator> {
        PdOperator::new_with(self.apply(a.matrix()), a.tolerances())
    }

    pub fn apply_vector(&self, v: &ComplexVector) -> ComplexVector {
        match self.kind {
            SymmetryKind::Unitary => &self.u * v,
            SymmetryKind::Antiunitary => &self.u * v.map(|z| z.conj()),
        }
    }

    pub fn apply_projection(&self, p: &RankOneProjection) -> RankOneProjection {
        RankOneProjection::from_vector(self.apply_vector(p.vector())).expect("unitaries preserve norms")
    }

    /// min over unimodular c of ‖U − cV‖_op; infinite for different kinds.
    pub fn distance(&self, other: &ConjugationMap) -> f64 {
        if self.kind != other.kind || self.dim() != other.dim() {
            return f64::INFINITY;
        }
        scalar_residual(&(&self.u * other.u.adjoint()))
    }

    pub fn projection_map(&self) -> ProjectionMap<'_> {
        ProjectionMap::new(move |p| Ok(self.apply_projection(p)))
    }
}

/// min over |c| = 1 of ‖M − cI‖_op: the best of c = tr M/|tr M| and a
/// coarse phase grid, refined by golden-section search.
pub fn scalar_residual(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let eval = |theta: f64| op_norm(&(m - identity(d) * C64::from_polar(1.0, theta)));
    let tr = m.trace();
    let mut theta0 = if tr.norm() > 0.0 { tr.arg() } else { 0.0 };
    let mut best = eval(theta0);
    let width = std::f64::consts::TAU / 64.0;
    for k in 0..64 {
        let th = k as f64 * width;
        let v = eval(th);
        if v < best {
            best = v;
            theta0 = th;
        }
    }
    let (mut lo, mut hi) = (theta0 - width, theta0 + width);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        }
    }
    f1.min(f2).min(best)
}

/// A map on rank-one projections, possibly fallible (it may wrap a black box).
pub struct ProjectionMap<'a> {
    f: Box<dyn Fn(&RankOneProjection) -> Result<RankOneProjection> + 'a>,
}

impl<'a> ProjectionMap<'a> {
    pub fn new(f: impl Fn(&RankOneProjection) -> Result<RankOneProjection> + 'a) -> Self {
        ProjectionMap { f: Box::new(f) }
    }

    pub fn apply(&self, p: &RankOneProjection) -> Result<RankOneProjection> {
        (self.f)(p)
    }
}

impl std::fmt::Debug for ProjectionMap<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ProjectionMap")
    }
}

fn wigner_probes(d: usize) -> Vec<RankOneProjection> {
    let one = C64::new(1.0, 0.0);
    let mut probes: Vec<RankOneProjection> = (0..d).map(|i| RankOneProjection::basis(d, i)).collect();
    probes.extend((1..d).map(|j| RankOneProjection::superposition(d, 0, j, one)));
    probes.push(RankOneProjection::superposition(d, 0, 1, C64::new(0.0, 1.0)));
    probes
}

fn gram_schmidt(cols: &mut [ComplexVector]) {
    for j in 0..cols.len() {
        for _ in 0..2 {
            for k in 0..j {
                let proj = cols[k].dotc(&cols[j]);
                let ck = cols[k].clone();
                cols[j] -= ck * proj;
            }
        }
        let n = cols[j].norm();
        cols[j].unscale_mut(n);
    }
}

/// Builds the (anti)unitary implementing a transition-probability preserving
/// map ξ, from its values on P_{e_i}, P_{(e_1+e_j)/√2} and P_{(e_1+ie_2)/√2}.
///
/// The global phase is fixed by making the largest-magnitude entry of the
/// first column real and positive.
pub fn wigner_synthesize(xi: &ProjectionMap<'_>, d: usize) -> Result<ConjugationMap> {
    if d < 2 {
        return Err(Error::InvalidArgument("synthesis needs d >= 2".into()));
    }
    let probes = wigner_probes(d);
    let images = probes.iter().map(|p| xi.apply(p)).collect::<Result<Vec<_>>>()?;
    if images.iter().any(|q| q.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: images[0].dim() });
    }
    let mut worst: f64 = 0.0;
    for i in 0..probes.len() {
        for j in i + 1..probes.len() {
            worst = worst.max((images[i].transition(&images[j]) - probes[i].transition(&probes[j])).abs());
        }
    }
    if worst > PROBE_TRANSITION_TOL {
        return Err(Error::NotASymmetry(worst));
    }

    let mut cols: Vec<ComplexVector> = images[..d].iter().map(|q| q.vector().clone()).collect();
    for j in 1..d {
        let w = images[d + j - 1].vector();
        let a = cols[0].dotc(w);
        let b = cols[j].dotc(w);
        if a.norm() < 1e-6 || b.norm() < 1e-6 {
            return Err(Error::NotASymmetry(1.0 - 2.0 * a.norm_sqr().min(b.norm_sqr())));
        }
        let r = b / a;
        cols[j] *= r / r.norm();
    }
    gram_schmidt(&mut cols);

    let z = images[2 * d - 1].vector();
    let i = C64::new(0.0, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let unitary_fit = ((&cols[0] + &cols[1] * i) * C64::new(s, 0.0)).dotc(z).norm_sqr();
    let anti_fit = ((&cols[0] - &cols[1] * i) * C64::new(s, 0.0)).dotc(z).norm_sqr();
    let kind = if unitary_fit >= 1.0 - KIND_TOL {
        SymmetryKind::Unitary
    } else if anti_fit >= 1.0 - KIND_TOL {
        SymmetryKind::Antiunitary
    } else {
        return Err(Error::AmbiguousKind(format!(
            "fidelities {unitary_fit:.3e} (unitary), {anti_fit:.3e} (antiunitary)"
        )));
    };

    let mut u = ComplexMatrix::from_columns(&cols);
    let (mut big, mut phase) = (0.0, C64::new(1.0, 0.0));
    for r in 0..d {
        if u[(r, 0)].norm() > big + 1e-12 {
            big = u[(r, 0)].norm();
            phase = u[(r, 0)] / big;
        }
    }
    u *= phase.conj();
    let map = ConjugationMap::new(u, kind)?;

    let mut mismatch: f64 = 0.0;
    for (p, q) in probes.iter().zip(&images) {
        mismatch = mismatch.max(op_norm(&(map.apply_projection(p).matrix() - q.matrix())));
    }
    if mismatch > REPRODUCTION_TOL {
        return Err(Error::NotASymmetry(mismatch));
    }
    Ok(map)
}

/// Pass/fail with the largest residual seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub max_residual: f64,
    pub samples: usize,
}

/// tr ξ(P)ξ(Q) over pairs P ⊥ Q; passes when every value is ≤ `tol`.
pub fn check_orthogonality_preservation(
    xi: &ProjectionMap<'_>,
    pairs: &[(RankOneProjection, RankOneProjection)],
    tol: f64,
) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (p, q) in pairs {
        worst = worst.max(xi.apply(p)?.transition(&xi.apply(q)?));
    }
    Ok(CheckOutcome { pass: worst <= tol, max_residual: worst, samples: pairs.len() })
}

/// |tr ξ(P)ξ(R) − tr PR| over the given pairs; passes when every value is ≤ `tol`.
pub fn check_transition_probabilities(
    xi: &ProjectionMap<'_>,
    pairs: &[(RankOneProjection, RankOneProjection)],
    tol: f64,
) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (p, r) in pairs {
        let lhs = xi.apply(p)?.transition(&xi.apply(r)?);
        worst = worst.max((lhs - p.transition(r)).abs());
    }
    Ok(CheckOutcome { pass: worst <= tol, max_residual: worst, samples: pairs.len() })
}

/// All basis pairs (e_i, e_j), i < j, followed by `n` pairs of orthogonal
/// columns of Haar unitaries.
pub fn orthogonal_pairs<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Vec<(RankOneProjection, RankOneProjection)> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            out.push((RankOneProjection::basis(d, i), RankOneProjection::basis(d, j)));
        }
    }
    for _ in 0..n {
        let u = haar_unitary(d, rng);
        let p = RankOneProjection::from_vector(u.column(0).into_owned()).expect("unit column");
        let q = RankOneProjection::from_vector(u.column(1).into_owned()).expect("unit column");
        out.push((p, q));
    }
    out
}

/// `n` pairs of independent Haar-random rank-one projections.
pub fn random_pairs<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Vec<(RankOneProjection, RankOneProjection)> {
    (0..n).map(|_| (random_rank_one(d, rng), random_rank_one(d, rng))).collect()
}
