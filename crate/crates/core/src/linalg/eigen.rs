//! Cyclic Jacobi eigensolver for complex Hermitian matrices and the
//! clustered spectral decomposition built on it.

use serde::Serialize;

use super::matrix::{outer, serde_matrix, C64, ComplexMatrix, ComplexVector, ZERO};
use super::operators::{HermitianMatrix, Tolerances};
use crate::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal mass (relative to ‖M‖_HS) below which the sweeps stop.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Raw eigenpairs, eigenvalues non-increasing, eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> ComplexVector {
        self.vectors.column(j).into_owned()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Σ f(λ_i) v_i v_i* over the eigenpairs selected by `keep`.
    pub fn apply<F, K>(&self, f: F, keep: K) -> ComplexMatrix
    where
        F: Fn(f64) -> f64,
        K: Fn(f64) -> bool,
    {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (j, &lambda) in self.values.iter().enumerate() {
            if !keep(lambda) {
                continue;
            }
            let w = f(lambda);
            let v = self.vectors.column(j);
            for c in 0..d {
                let vc = v[c].conj() * w;
                for r in 0..d {
                    out[(r, c)] += v[r] * vc;
                }
            }
        }
        out
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        self.apply(|x| x, |_| true)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let d = a.nrows();
    let mut s = 0.0;
    for j in 0..d {
        for i in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. The input is symmetrized first; only its Hermitian part is
/// diagonalized.
pub fn jacobi_eigen(m: &ComplexMatrix) -> Result<EigenSystem> {
    let d = super::matrix::check_square(m)?;
    let mut a = super::matrix::symmetrize(m);
    let mut v = ComplexMatrix::identity(d, d);
    let scale = super::matrix::hs_norm(&a);
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for _ in 0..MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off > threshold {
        return Err(Error::SolverFailure {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |r, c| v[(r, order[c])]);
    Ok(EigenSystem { values, vectors })
}

/// One rotation annihilating a[p,q]: first a diagonal phase makes the pivot
/// real, then a real Jacobi rotation zeroes it.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let w = apq.conj() / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau.is_finite() {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s], [-w s, w c]] on the (p, q) plane.
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -w * s;
    let g_qq = w * c;
    let d = a.nrows();

    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// λ_1 > … > λ_m with orthogonal eigenprojections P_j.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    #[serde(serialize_with = "serialize_projections")]
    pub projections: Vec<ComplexMatrix>,
    pub multiplicities: Vec<usize>,
}

fn serialize_projections<S: serde::Serializer>(
    ps: &[ComplexMatrix],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Wrap<'a>(&'a ComplexMatrix);
    impl Serialize for Wrap<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serde_matrix::serialize(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(ps.len()))?;
    for p in ps {
        seq.serialize_element(&Wrap(p))?;
    }
    seq.end()
}

impl SpectralDecomposition {
    /// Merges eigenvalues closer than `cluster_tol · max(1, λ_max)` to their
    /// neighbour. A cluster's eigenvalue is the mean of its members.
    pub fn from_eigensystem(es: &EigenSystem, cluster_tol: f64) -> Self {
        let delta = cluster_tol * es.max().abs().max(1.0);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for j in 0..es.dim() {
            match groups.last_mut() {
                Some(g) if es.values[*g.last().unwrap()] - es.values[j] <= delta => g.push(j),
                _ => groups.push(vec![j]),
            }
        }
        let d = es.dim();
        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projections = Vec::with_capacity(groups.len());
        let mut multiplicities = Vec::with_capacity(groups.len());
        for g in groups {
            let mean = g.iter().map(|&j| es.values[j]).sum::<f64>() / g.len() as f64;
            let mut p = ComplexMatrix::zeros(d, d);
            for &j in &g {
                p += outer(&es.vector(j));
            }
            eigenvalues.push(mean);
            projections.push(p);
            multiplicities.push(g.len());
        }
        SpectralDecomposition {
            eigenvalues,
            projections,
            multiplicities,
        }
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.projections.first().map_or(0, |p| p.nrows());
        let mut out = ComplexMatrix::zeros(d, d);
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projections) {
            out += p.scale(*lambda);
        }
        out
    }

    /// Σ λ_j rank(P_j).
    pub fn trace(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &m)| l * m as f64)
            .sum()
    }

    /// Largest violation of Σ P_j = I, P_j P_k = 0 (j ≠ k), P_j² = P_j.
    pub fn projection_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut worst: f64 = 0.0;
        for (j, p) in self.projections.iter().enumerate() {
            sum += p;
            worst = worst.max(super::matrix::op_norm(&(p * p - p)));
            for q in &self.projections[j + 1..] {
                worst = worst.max(super::matrix::op_norm(&(p * q)));
            }
        }
        worst.max(super::matrix::op_norm(&(sum - ComplexMatrix::identity(d, d))))
    }
}

/// Clustered spectral decomposition with default tolerances.
pub fn eigh(m: &HermitianMatrix) -> Result<SpectralDecomposition> {
    eigh_with(m, &Tolerances::default())
}

pub fn eigh_with(m: &HermitianMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let es = jacobi_eigen(m.matrix())?;
    Ok(SpectralDecomposition::from_eigensystem(&es, tol.cluster))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{basis_vector, from_real_rows, op_norm, real_diag};
    use crate::linalg::random::{random_hermitian, seeded_rng};

    fn herm(m: ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn diagonal_sorted_decreasing() {
        let sd = eigh(&herm(real_diag(&[0.3, 0.7]))).unwrap();
        assert_eq!(sd.eigenvalues.len(), 2);
        assert!((sd.eigenvalues[0] - 0.7).abs() < 1e-15);
        assert!((sd.eigenvalues[1] - 0.3).abs() < 1e-15);
        assert!(op_norm(&(&sd.projections[0] - outer(&basis_vector(2, 1)))) < 1e-15);
        assert!(op_norm(&(&sd.projections[1] - outer(&basis_vector(2, 0)))) < 1e-15);
    }

    #[test]
    fn identity_is_one_cluster() {
        let sd = eigh(&herm(ComplexMatrix::identity(2, 2))).unwrap();
        assert_eq!(sd.eigenvalues, vec![1.0]);
        assert_eq!(sd.multiplicities, vec![2]);
        assert!(op_norm(&(&sd.projections[0] - ComplexMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn two_by_two_symmetric() {
        let sd = eigh(&herm(from_real_rows(2, &[2.0, 1.0, 1.0, 2.0]))).unwrap();
        assert!((sd.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        let plus = ComplexVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]);
        let minus = ComplexVector::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)]);
        assert!(op_norm(&(&sd.projections[0] - outer(&plus))) < 1e-14);
        assert!(op_norm(&(&sd.projections[1] - outer(&minus))) < 1e-14);
    }

    #[test]
    fn complex_hermitian_reassembles() {
        let mut rng = seeded_rng(7);
        for d in 2..=8 {
            let h = random_hermitian(d, &mut rng);
            let es = jacobi_eigen(h.matrix()).unwrap();
            let err = op_norm(&(es.reassemble() - h.matrix()));
            assert!(err < 1e-12 * (1.0 + op_norm(h.matrix())), "d={d} err={err}");
            let gram = es.vectors.adjoint() * &es.vectors;
            assert!(op_norm(&(gram - ComplexMatrix::identity(d, d))) < 1e-13);
            assert!(es.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn near_ties_merge() {
        let sd = eigh(&herm(real_diag(&[1.0, 1.0 + 1e-10, 0.5]))).unwrap();
        assert_eq!(sd.multiplicities, vec![2, 1]);
        assert!(sd.projection_defect() < 1e-14);
        assert!((sd.trace() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix() {
        let sd = eigh(&herm(ComplexMatrix::zeros(3, 3))).unwrap();
        assert_eq!(sd.eigenvalues, vec![0.0]);
        assert_eq!(sd.multiplicities, vec![3]);
    }
}
