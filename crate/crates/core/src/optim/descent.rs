//! Projected gradient descent on a flat parameter vector with finite-difference
//! gradients, Barzilai–Borwein steps and Armijo backtracking.

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

pub(crate) struct Problem<'a> {
    pub f: &'a dyn Fn(&[f64]) -> f64,
    /// Maps a raw point back onto the feasible set.
    pub retract: &'a dyn Fn(&mut Vec<f64>),
    /// Projects a gradient at `x` onto the admissible directions.
    pub project: &'a dyn Fn(&[f64], &mut Vec<f64>),
}

pub(crate) struct Settings {
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gradient(p: &Problem<'_>, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for k in 0..x.len() {
        let orig = probe[k];
        probe[k] = orig + FD_STEP;
        let up = (p.f)(&probe);
        probe[k] = orig - FD_STEP;
        let down = (p.f)(&probe);
        probe[k] = orig;
        g[k] = (up - down) / (2.0 * FD_STEP);
    }
    let mut g = g;
    (p.project)(x, &mut g);
    g
}

pub(crate) fn descend(p: &Problem<'_>, x0: Vec<f64>, s: &Settings) -> Outcome {
    let mut x = x0;
    (p.retract)(&mut x);
    let mut fx = (p.f)(&x);
    let mut g = gradient(p, &x);
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for it in 0..s.max_iters {
        let gn2 = dot(&g, &g);
        if !gn2.is_finite() || gn2.sqrt() <= s.value_tol * fx.abs().max(1.0) {
            return Outcome { x, value: fx, converged: true, iterations: it };
        }
        if let Some((px, pg)) = prev.take() {
            let sv: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g.iter().zip(&pg).map(|(a, b)| a - b).collect();
            let sy = dot(&sv, &yv);
            step = if sy > 0.0 { dot(&sv, &sv) / sy } else { step * 2.0 };
        } else {
            step = 0.1 / gn2.sqrt();
        }

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            (p.retract)(&mut trial);
            let ft = (p.f)(&trial);
            if ft.is_finite() && ft <= fx - ARMIJO * step * gn2 {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        // No sufficient decrease left: the iterate sits at the rounding floor.
        let Some((xn, fnew)) = accepted else {
            return Outcome { x, value: fx, converged: true, iterations: it };
        };
        let moved = xn.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let gn = gradient(p, &xn);
        prev = Some((std::mem::replace(&mut x, xn), std::mem::replace(&mut g, gn)));
        fx = fnew;
        if moved < s.step_tol {
            return Outcome { x, value: fx, converged: true, iterations: it + 1 };
        }
    }
    Outcome {
        x,
        value: fx,
        converged: false,
        iterations: s.max_iters,
    }
}
