use serde::Serialize;

use super::descent::{descend, Outcome, Problem, Settings};
use crate::linalg::matrix::{basis_vector, hermitian_defect, op_norm, serde_matrix, C64, ComplexMatrix, ComplexVector};
use crate::linalg::operators::RankOneProjection;
use crate::linalg::random::{gaussian_vector, seeded_rng};
use crate::{Error, Result};

/// Settings for optimization over rank-one projections.
#[derive(Debug, Clone)]
pub struct SphereOptConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    /// Orthogonal projection onto the subspace the unit vector must lie in.
    pub subspace: Option<ComplexMatrix>,
    pub seed: u64,
}

impl Default for SphereOptConfig {
    fn default() -> Self {
        SphereOptConfig {
            restarts: 32,
            max_iters: 500,
            step_tol: 1e-12,
            value_tol: 1e-10,
            subspace: None,
            seed: 0,
        }
    }
}

impl SphereOptConfig {
    pub fn with_subspace(mut self, s: ComplexMatrix) -> Self {
        self.subspace = Some(s);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidArgument("restarts and max_iters must be at least 1".into()));
        }
        if !(self.step_tol > 0.0 && self.value_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if let Some(s) = &self.subspace {
            if s.nrows() != d || s.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.nrows() });
            }
            let idem = op_norm(&(s * s - s));
            if hermitian_defect(s) > 1e-8 || idem > 1e-8 {
                return Err(Error::InvalidArgument("subspace is not an orthogonal projection".into()));
            }
            if s.trace().re < 0.5 {
                return Err(Error::InvalidArgument("subspace is trivial".into()));
            }
        }
        Ok(())
    }
}

/// Best point found over all restarts.
#[derive(Debug, Clone, Serialize)]
pub struct SphereOptResult {
    #[serde(skip)]
    pub point: RankOneProjection,
    #[serde(with = "serde_matrix")]
    pub projection: ComplexMatrix,
    pub value: f64,
    /// False when every restart hit the iteration cap.
    pub converged: bool,
    pub best_restart: usize,
    pub iterations: usize,
}

fn to_params(v: &ComplexVector) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

fn to_vector(x: &[f64]) -> ComplexVector {
    let d = x.len() / 2;
    ComplexVector::from_fn(d, |i, _| C64::new(x[i], x[d + i]))
}

fn restrict(s: &Option<ComplexMatrix>, v: ComplexVector) -> ComplexVector {
    match s {
        Some(s) => s * v,
        None => v,
    }
}

fn run(
    g: &dyn Fn(&RankOneProjection) -> f64,
    d: usize,
    cfg: &SphereOptConfig,
) -> Result<SphereOptResult> {
    cfg.validate(d)?;
    let sub = &cfg.subspace;
    let f = |x: &[f64]| match RankOneProjection::from_vector(to_vector(x)) {
        Ok(r) => g(&r),
        Err(_) => f64::INFINITY,
    };
    let retract = |x: &mut Vec<f64>| {
        let v = restrict(sub, to_vector(x));
        let n = v.norm();
        if n > 0.0 {
            *x = to_params(&v.unscale(n));
        }
    };
    let project = |x: &[f64], grad: &mut Vec<f64>| {
        let v = to_vector(x);
        let gv = restrict(sub, to_vector(grad));
        let radial = v.dotc(&gv).re;
        *grad = to_params(&(gv - v * C64::new(radial, 0.0)));
    };
    let problem = Problem { f: &f, retract: &retract, project: &project };
    let settings = Settings {
        max_iters: cfg.max_iters,
        step_tol: cfg.step_tol,
        value_tol: cfg.value_tol,
    };

    let mut starts = Vec::with_capacity(cfg.restarts);
    for i in 0..d {
        if starts.len() == cfg.restarts {
            break;
        }
        let v = restrict(sub, basis_vector(d, i));
        if v.norm() > 1e-6 {
            starts.push(v);
        }
    }
    let mut rng = seeded_rng(cfg.seed);
    while starts.len() < cfg.restarts {
        let v = restrict(sub, gaussian_vector(d, &mut rng));
        if v.norm() > 1e-6 {
            starts.push(v);
        }
    }

    let mut best: Option<(usize, Outcome)> = None;
    let mut any_converged = false;
    let mut iterations = 0;
    for (k, v0) in starts.into_iter().enumerate() {
        let out = descend(&problem, to_params(&v0), &settings);
        any_converged |= out.converged;
        iterations += out.iterations;
        if best.as_ref().is_none_or(|(_, b)| out.value < b.value) {
            best = Some((k, out));
        }
    }
    let (best_restart, out) = best.expect("at least one restart");
    let point = RankOneProjection::from_vector(to_vector(&out.x))?;
    Ok(SphereOptResult {
        projection: point.matrix(),
        point,
        value: out.value,
        converged: any_converged,
        best_restart,
        iterations,
    })
}

/// Multi-start projected gradient minimization of `g` over rank-one
/// projections vv*, v a unit vector (restricted to `cfg.subspace` if set).
pub fn minimize_over_rank_one<G>(g: G, d: usize, cfg: &SphereOptConfig) -> Result<SphereOptResult>
where
    G: Fn(&RankOneProjection) -> f64,
{
    run(&g, d, cfg)
}

pub fn maximize_over_rank_one<G>(g: G, d: usize, cfg: &SphereOptConfig) -> Result<SphereOptResult>
where
    G: Fn(&RankOneProjection) -> f64,
{
    let neg = |r: &RankOneProjection| -g(r);
    let mut out = run(&neg, d, cfg)?;
    out.value = -out.value;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{Alpha, KStarForm};
    use crate::linalg::matrix::{outer, real_diag};
    use crate::linalg::operators::PdOperator;
    use crate::linalg::random::random_pd;

    fn kstar(d: &PdOperator, a: f64) -> KStarForm {
        KStarForm::new(d, Alpha::new(a).unwrap())
    }

    #[test]
    fn diagonal_extremes() {
        let d = PdOperator::new(real_diag(&[0.7, 0.3])).unwrap();
        for a in [0.0, 0.5, 1.0] {
            let k = kstar(&d, a);
            let cfg = SphereOptConfig::default();
            let lo = minimize_over_rank_one(|r| k.eval(r), 2, &cfg).unwrap();
            assert!((lo.value - 1.0 / 0.7).abs() < 1e-8, "{}", lo.value);
            assert!(lo.point.transition(&RankOneProjection::basis(2, 0)) >= 1.0 - 1e-6);
            let hi = maximize_over_rank_one(|r| k.eval(r), 2, &cfg).unwrap();
            assert!((hi.value - 1.0 / 0.3).abs() < 1e-8, "{}", hi.value);
            assert!(hi.point.transition(&RankOneProjection::basis(2, 1)) >= 1.0 - 1e-6);
            assert!(lo.converged && hi.converged);
        }
    }

    #[test]
    fn constant_objective() {
        let cfg = SphereOptConfig { restarts: 3, ..Default::default() };
        let out = minimize_over_rank_one(|_| 4.5, 3, &cfg).unwrap();
        assert_eq!(out.value, 4.5);
        assert!(out.converged);
    }

    #[test]
    fn random_pd_matches_extreme_eigenvalues() {
        let mut rng = seeded_rng(5);
        for dim in 2..=4 {
            let d = random_pd(dim, &mut rng);
            let k = kstar(&d, 0.3);
            let cfg = SphereOptConfig::default().with_seed(dim as u64);
            let lo = minimize_over_rank_one(|r| k.eval(r), dim, &cfg).unwrap();
            let hi = maximize_over_rank_one(|r| k.eval(r), dim, &cfg).unwrap();
            assert!((lo.value - 1.0 / d.lambda_max()).abs() < 1e-7);
            assert!((hi.value - 1.0 / d.lambda_min()).abs() < 1e-7);
        }
    }

    #[test]
    fn subspace_gives_second_eigenvalue() {
        let mut rng = seeded_rng(8);
        let d = random_pd(3, &mut rng);
        let es = d.eigensystem();
        let top = outer(&es.vector(0));
        let s = crate::linalg::matrix::identity(3) - top;
        let k = kstar(&d, 0.5);
        let cfg = SphereOptConfig::default().with_subspace(s.clone());
        let out = minimize_over_rank_one(|r| k.eval(r), 3, &cfg).unwrap();
        assert!((out.value - 1.0 / es.values[1]).abs() < 1e-7);
        let v = out.point.vector();
        assert!((v - &s * v).norm() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut rng = seeded_rng(2);
        let d = random_pd(3, &mut rng);
        let k = kstar(&d, 0.25);
        let cfg = SphereOptConfig { restarts: 6, seed: 11, ..Default::default() };
        let a = minimize_over_rank_one(|r| k.eval(r), 3, &cfg).unwrap();
        let b = minimize_over_rank_one(|r| k.eval(r), 3, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.projection, b.projection);
    }

    #[test]
    fn invalid_configs() {
        let bad = SphereOptConfig { restarts: 0, ..Default::default() };
        assert!(minimize_over_rank_one(|_| 0.0, 2, &bad).is_err());
        let bad = SphereOptConfig::default().with_subspace(real_diag(&[0.5, 0.0]));
        assert!(minimize_over_rank_one(|_| 0.0, 2, &bad).is_err());
        let bad = SphereOptConfig { value_tol: 0.0, ..Default::default() };
        assert!(minimize_over_rank_one(|_| 0.0, 2, &bad).is_err());
    }
}
