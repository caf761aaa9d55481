use serde::Serialize;

use super::cone::ConeOptConfig;
use super::descent::{descend, Problem, Settings};
use crate::linalg::matrix::{outer, serde_matrix, trace_re, C64, ComplexMatrix};
use crate::linalg::operators::{DensityOperator, PsdOperator};
use crate::linalg::random::{gaussian_matrix, seeded_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct StateOptResult {
    #[serde(with = "serde_matrix")]
    pub argmax: ComplexMatrix,
    pub value: f64,
    pub converged: bool,
    /// The returned state is the top eigenprojection of the ascent's end point.
    pub polished: bool,
}

fn state_from_params(d: usize, x: &[f64]) -> Option<DensityOperator> {
    let g = ComplexMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(x[k], x[k + 1])
    });
    let m = &g * g.adjoint();
    let t = trace_re(&m);
    if !(t > 0.0 && t.is_finite()) {
        return None;
    }
    let psd = PsdOperator::new(m.unscale(t)).ok()?;
    DensityOperator::normalized(&psd).ok()
}

/// Multi-start gradient ascent of `g` over density operators, parametrized as
/// G G*/tr(G G*). The end point is then compared with its top eigenprojection
/// and the better of the two is kept.
pub fn maximize_over_states<G>(g: G, d: usize, cfg: &ConeOptConfig) -> Result<StateOptResult>
where
    G: Fn(&DensityOperator) -> f64,
{
    cfg.validate()?;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let f = |x: &[f64]| state_from_params(d, x).map_or(f64::INFINITY, |s| -g(&s));
    let retract = |x: &mut Vec<f64>| {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            x.iter_mut().for_each(|v| *v /= n);
        }
    };
    let project = |x: &[f64], grad: &mut Vec<f64>| {
        let r: f64 = x.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
        grad.iter_mut().zip(x).for_each(|(gv, xv)| *gv -= r * xv);
    };
    let problem = Problem { f: &f, retract: &retract, project: &project };
    let settings = Settings {
        max_iters: cfg.max_iters,
        step_tol: 1e-14,
        value_tol: cfg.value_tol,
    };

    let mut rng = seeded_rng(cfg.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut any_converged = false;
    for _ in 0..cfg.restarts {
        let g0 = gaussian_matrix(d, d, &mut rng);
        let x0: Vec<f64> = g0
            .iter()
            .enumerate()
            .fold(vec![0.0; 2 * d * d], |mut acc, (idx, z)| {
                // nalgebra iterates column-major
                let (i, j) = (idx % d, idx / d);
                acc[2 * (i * d + j)] = z.re;
                acc[2 * (i * d + j) + 1] = z.im;
                acc
            });
        let out = descend(&problem, x0, &settings);
        any_converged |= out.converged;
        if best.as_ref().is_none_or(|(v, _)| out.value < *v) {
            best = Some((out.value, out.x));
        }
    }
    let (neg, x) = best.expect("at least one restart");
    let state = state_from_params(d, &x).ok_or(Error::NonFinite)?;
    let value = -neg;

    let top = state.eigensystem().vector(0);
    let pure = DensityOperator::new(outer(&top))?;
    let pure_value = g(&pure);
    if pure_value >= value - 1e-12 * value.abs().max(1.0) {
        return Ok(StateOptResult {
            argmax: pure.matrix().clone(),
            value: pure_value,
            converged: any_converged,
            polished: true,
        });
    }
    Ok(StateOptResult {
        argmax: state.matrix().clone(),
        value,
        converged: any_converged,
        polished: false,
    })
}
