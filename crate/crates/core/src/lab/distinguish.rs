use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::divergence::{chi2, f_divergence, jensen, Alpha, ScalarFunction};
use crate::linalg::matrix::{identity, real_diag, serde_matrix, ComplexMatrix};
use crate::linalg::operators::PdOperator;
use crate::linalg::random::{random_pd, seeded_rng};
use crate::{Error, Result};

/// Default number of random pairs tried by the f-divergence search.
pub const F_SEARCH_BUDGET: usize = 1000;
/// A witness must separate S_f and K_α by at least this much.
pub const F_WITNESS_GAP: f64 = 0.01;
/// S_f and K_α count as equal within this much.
pub const F_EQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FOutcome {
    Equality,
    Witness,
    SearchFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct FWitness {
    #[serde(with = "serde_matrix")]
    pub a: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub b: ComplexMatrix,
    pub s_f: f64,
    pub k_alpha: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FDistinguishReport {
    pub alpha: f64,
    pub dim: usize,
    pub outcome: FOutcome,
    pub samples: usize,
    /// Largest |S_f − K_α| seen.
    pub max_residual: f64,
    pub witness: Option<FWitness>,
}

/// Compares K_α with the f-divergence for f(t) = (t − 1)² on random
/// noncommuting PD pairs. At α ∈ {0, 1} every sample must agree to
/// [`F_EQUALITY_TOL`]; otherwise the first pair with gap ≥ [`F_WITNESS_GAP`]
/// is returned.
pub fn distinguish_from_f_divergence(alpha: Alpha, d: usize, budget: usize, seed: u64) -> Result<FDistinguishReport> {
    if d < 2 || budget == 0 {
        return Err(Error::InvalidArgument("need d >= 2 and a positive budget".into()));
    }
    let f = ScalarFunction::chi_square();
    let mut rng = seeded_rng(seed);
    let endpoint = alpha.is_endpoint(1e-12);
    let mut max_residual: f64 = 0.0;
    for k in 0..budget {
        let a = random_pd(d, &mut rng);
        let b = random_pd(d, &mut rng);
        let s = f_divergence(&a, &b, &f)?;
        let kv = chi2(&a, &b, alpha)?;
        let gap = (s - kv).abs();
        max_residual = max_residual.max(gap);
        if endpoint {
            if gap > F_EQUALITY_TOL {
                return Ok(FDistinguishReport {
                    alpha: alpha.value(),
                    dim: d,
                    outcome: FOutcome::Witness,
                    samples: k + 1,
                    max_residual,
                    witness: Some(FWitness { a: a.matrix().clone(), b: b.matrix().clone(), s_f: s, k_alpha: kv, gap }),
                });
            }
        } else if gap >= F_WITNESS_GAP {
            return Ok(FDistinguishReport {
                alpha: alpha.value(),
                dim: d,
                outcome: FOutcome::Witness,
                samples: k + 1,
                max_residual,
                witness: Some(FWitness { a: a.matrix().clone(), b: b.matrix().clone(), s_f: s, k_alpha: kv, gap }),
            });
        }
    }
    Ok(FDistinguishReport {
        alpha: alpha.value(),
        dim: d,
        outcome: if endpoint { FOutcome::Equality } else { FOutcome::SearchFailed },
        samples: budget,
        max_residual,
        witness: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BregmanReport {
    pub alpha: f64,
    pub dim: usize,
    pub t: f64,
    pub grid: Vec<f64>,
    /// g(s) = K_α(tI‖sI)
    pub values: Vec<f64>,
    /// c₀ + c₁s + c₂s² fitted to `values`.
    pub fit: [f64; 3],
    pub max_residual: f64,
    /// Same fit applied to the quadratic d(t − s)²; should vanish.
    pub control_residual: f64,
}

fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Result<([f64; 3], f64)> {
    let x = DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let c = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&x * &c - &y).amax();
    Ok(([c[0], c[1], c[2]], residual))
}

/// Fits a quadratic in s to s ↦ K_α(tI‖sI) = d(t − s)²/s over `grid`. A
/// Bregman divergence would make this map quadratic, so a large residual
/// rules one out.
pub fn distinguish_from_bregman(alpha: Alpha, t: f64, grid: &[f64], d: usize) -> Result<BregmanReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    if grid.len() < 4 || grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument("grid needs at least 4 positive points".into()));
    }
    for (i, s) in grid.iter().enumerate() {
        if grid[i + 1..].contains(s) {
            return Err(Error::InvalidArgument(format!("grid point {s} repeated")));
        }
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let a = PdOperator::new(identity(d).scale(t))?;
    let mut values = Vec::with_capacity(grid.len());
    for &s in grid {
        values.push(chi2(&a, &PdOperator::new(identity(d).scale(s))?, alpha)?);
    }
    let (fit, max_residual) = quadratic_fit(grid, &values)?;
    let control: Vec<f64> = grid.iter().map(|s| d as f64 * (t - s) * (t - s)).collect();
    let (_, control_residual) = quadratic_fit(grid, &control)?;
    Ok(BregmanReport {
        alpha: alpha.value(),
        dim: d,
        t,
        grid: grid.to_vec(),
        values,
        fit,
        max_residual,
        control_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JensenReport {
    pub alpha: f64,
    #[serde(with = "serde_matrix")]
    pub a: ComplexMatrix,
    #[serde(with = "serde_matrix")]
    pub b: ComplexMatrix,
    pub forward: f64,
    pub backward: f64,
    pub gap: f64,
    /// J_f(A, B) − J_f(B, A) for f(t) = t², zero by construction.
    pub jensen_gap: f64,
}

/// A = diag(3, 1, …, 1), B = I: K_α(A‖B) = 4 and K_α(B‖A) = 4/3, while any
/// Jensen divergence is symmetric.
pub fn distinguish_from_jensen(alpha: Alpha, d: usize) -> Result<JensenReport> {
    if d < 2 {
        return Err(Error::InvalidArgument("need d >= 2".into()));
    }
    let mut diag = vec![1.0; d];
    diag[0] = 3.0;
    let a = PdOperator::new(real_diag(&diag))?;
    let b = PdOperator::identity(d);
    let forward = chi2(&a, &b, alpha)?;
    let backward = chi2(&b, &a, alpha)?;
    let f = ScalarFunction::square();
    let jensen_gap = jensen(&a, &b, &f)? - jensen(&b, &a, &f)?;
    Ok(JensenReport {
        alpha: alpha.value(),
        a: a.matrix().clone(),
        b: b.matrix().clone(),
        forward,
        backward,
        gap: (forward - backward).abs(),
        jensen_gap,
    })
}
