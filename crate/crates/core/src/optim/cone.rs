use serde::Serialize;

use super::descent::{descend, Problem, Settings};
use crate::linalg::eigen::jacobi_eigen;
use crate::linalg::matrix::{identity, serde_matrix, symmetrize, C64, ComplexMatrix};
use crate::linalg::operators::{PdOperator, Tolerances};
use crate::linalg::random::{random_pd, seeded_rng};
use crate::{Error, Result};

/// Settings for searches over the positive definite cone and the state space.
#[derive(Debug, Clone)]
pub struct ConeOptConfig {
    /// Smallest eigenvalue allowed during the search.
    pub boundary_floor: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub value_tol: f64,
    pub seed: u64,
}

impl Default for ConeOptConfig {
    fn default() -> Self {
        ConeOptConfig {
            boundary_floor: 1e-8,
            max_iters: 500,
            restarts: 8,
            value_tol: 1e-12,
            seed: 0,
        }
    }
}

impl ConeOptConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.boundary_floor > 0.0 && self.boundary_floor.is_finite()) {
            return Err(Error::InvalidArgument("boundary_floor must be positive".into()));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidArgument("restarts and max_iters must be at least 1".into()));
        }
        if !(self.value_tol > 0.0) {
            return Err(Error::InvalidArgument("value_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeOptResult {
    pub value: f64,
    #[serde(with = "serde_matrix")]
    pub argmin: ComplexMatrix,
    /// The best point has eigenvalues at the floor: the infimum is
    /// approached at the boundary of the cone rather than attained inside it.
    pub boundary: bool,
    pub converged: bool,
}

pub(crate) fn hermitian_from_params(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        m[(i, i)] = C64::new(x[i], 0.0);
        for j in i + 1..d {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

pub(crate) fn hermitian_to_params(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut x: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    for i in 0..d {
        for j in i + 1..d {
            x.push(m[(i, j)].re);
            x.push(m[(i, j)].im);
        }
    }
    x
}

fn floored(m: &ComplexMatrix, floor: f64) -> Option<ComplexMatrix> {
    let mut es = jacobi_eigen(m).ok()?;
    for v in es.values.iter_mut() {
        *v = v.max(floor);
    }
    Some(symmetrize(&es.reassemble()))
}

/// Best value of `g` found by projected gradient descent over Hermitian
/// matrices with eigenvalues floored at `cfg.boundary_floor`.
///
/// Restart 0 starts at floor·I; the rest start at random PD points.
pub fn infimum_over_pd<G>(g: G, d: usize, cfg: &ConeOptConfig) -> Result<ConeOptResult>
where
    G: Fn(&PdOperator) -> f64,
{
    cfg.validate()?;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let floor = cfg.boundary_floor;
    let tol = Tolerances { pd: 1e-300, ..Tolerances::default() };
    let eval = |m: &ComplexMatrix| -> f64 {
        floored(m, floor)
            .and_then(|p| PdOperator::new_with(p, &tol).ok())
            .map_or(f64::INFINITY, |p| g(&p))
    };
    let f = |x: &[f64]| eval(&hermitian_from_params(d, x));
    let retract = |x: &mut Vec<f64>| {
        if let Some(p) = floored(&hermitian_from_params(d, x), floor) {
            *x = hermitian_to_params(&p);
        }
    };
    let problem = Problem { f: &f, retract: &retract, project: &|_, _| {} };
    let settings = Settings {
        max_iters: cfg.max_iters,
        step_tol: 1e-14,
        value_tol: cfg.value_tol,
    };

    let mut rng = seeded_rng(cfg.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut any_converged = false;
    for k in 0..cfg.restarts {
        let start = if k == 0 {
            identity(d).scale(floor)
        } else {
            random_pd(d, &mut rng).matrix().clone()
        };
        let out = descend(&problem, hermitian_to_params(&start), &settings);
        any_converged |= out.converged;
        if best.as_ref().is_none_or(|(v, _)| out.value < *v) {
            best = Some((out.value, out.x));
        }
    }
    let (value, x) = best.expect("at least one restart");
    let argmin = floored(&hermitian_from_params(d, &x), floor).ok_or(Error::NonFinite)?;
    let lmin = jacobi_eigen(&argmin)?.min();
    Ok(ConeOptResult {
        value,
        argmin,
        boundary: lmin <= 10.0 * floor,
        converged: any_converged,
    })
}
