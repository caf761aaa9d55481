use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::divergence::{chi2, k_star, Alpha, Chi2Form};
use crate::linalg::eigen::jacobi_eigen;
use crate::linalg::matrix::{hs_norm, op_norm, ComplexMatrix, MatrixJson};
use crate::linalg::operators::{DensityOperator, PdOperator, PsdOperator};
use crate::linalg::random::{
    haar_unitary, random_hermitian, random_ordered_pd_pair, random_pd, random_psd_rank, random_rank_one,
    seeded_rng, SeededRng,
};
use crate::{Error, Result};

/// Outcome of one property over one (α, d) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub alpha: f64,
    pub dim: usize,
    pub trials: usize,
    pub failures: usize,
    pub worst_residual: f64,
    /// Inputs of the worst failing trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

/// Property names in suite order.
pub const PROPERTIES: [&str; 11] = [
    "nonnegativity",
    "identity_of_indiscernibles",
    "unitary_invariance",
    "homogeneity",
    "product_rule",
    "k_star_consistency",
    "strict_convexity",
    "op_norm_lower_bound",
    "first_variable_continuity",
    "trace_monotonicity",
    "loewner_heinz",
];

struct Trial {
    residual: f64,
    failed: bool,
    inputs: Vec<(&'static str, ComplexMatrix)>,
}

impl Trial {
    fn new(residual: f64, failed: bool, inputs: Vec<(&'static str, ComplexMatrix)>) -> Self {
        Trial { residual, failed, inputs }
    }

    /// Fails when `residual > tol`.
    fn bound(residual: f64, tol: f64, inputs: Vec<(&'static str, ComplexMatrix)>) -> Self {
        Trial::new(residual, !(residual <= tol), inputs)
    }
}

fn psd_random_rank(d: usize, rng: &mut SeededRng) -> PsdOperator {
    let r = rng.random_range(1..=d);
    random_psd_rank(d, r, rng)
}

fn nonnegativity(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let x = psd_random_rank(d, rng);
    let b = random_pd(d, rng);
    let v = chi2(&x, &b, a)?;
    Ok(Trial::new((-v).max(0.0), v < 0.0, vec![("a", x.matrix().clone()), ("b", b.matrix().clone())]))
}

/// Alternates near-equal pairs (perturbation ≤ 1e−9) with independent pairs;
/// chi2 ≤ 1e−10 must coincide with ‖A − B‖_op ≤ 1e−6(1 + ‖B‖_op).
fn indiscernibles(a: Alpha, d: usize, rng: &mut SeededRng, k: usize) -> Result<Trial> {
    let b = random_pd(d, rng);
    let x = if k % 2 == 0 {
        let e = random_hermitian(d, rng);
        let e = e.matrix().scale(1e-9 / op_norm(e.matrix()));
        PsdOperator::new(b.matrix() + e)?
    } else {
        random_pd(d, rng).into_psd()
    };
    let v = chi2(&x, &b, a)?;
    let close = op_norm(&(x.matrix() - b.matrix())) <= 1e-6 * (1.0 + b.lambda_max());
    let small = v <= 1e-10;
    let residual = if close { v } else { 0.0 };
    Ok(Trial::new(residual, close != small, vec![("a", x.matrix().clone()), ("b", b.matrix().clone())]))
}

fn unitary_invariance(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let x = psd_random_rank(d, rng);
    let b = random_pd(d, rng);
    let u = haar_unitary(d, rng);
    let ux = PsdOperator::new(&u * x.matrix() * u.adjoint())?;
    let ub = PdOperator::new(&u * b.matrix() * u.adjoint())?;
    let r = (chi2(&ux, &ub, a)? - chi2(&x, &b, a)?).abs();
    Ok(Trial::bound(r, 1e-9, vec![("a", x.matrix().clone()), ("b", b.matrix().clone()), ("u", u)]))
}

fn homogeneity(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let x = psd_random_rank(d, rng);
    let b = random_pd(d, rng);
    let base = chi2(&x, &b, a)?;
    let mut worst: f64 = 0.0;
    let mut failed = false;
    for lambda in [0.1, 1.0, 7.3] {
        let r = (chi2(&x.scaled(lambda)?, &b.scaled(lambda)?, a)? - lambda * base).abs();
        failed |= !(r <= 1e-9 * lambda);
        worst = worst.max(r / lambda);
    }
    Ok(Trial::new(worst, failed, vec![("a", x.matrix().clone()), ("b", b.matrix().clone())]))
}

fn product_rule(d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let r = random_rank_one(d, rng);
    let x = random_hermitian(d, rng).into_matrix();
    let y = random_hermitian(d, rng).into_matrix();
    let rm = r.matrix();
    let lhs = (&rm * &x * &rm * &y).trace().re;
    let rhs = r.expectation(&x).re * r.expectation(&y).re;
    Ok(Trial::bound((lhs - rhs).abs(), 1e-10, vec![("r", rm), ("x", x), ("y", y)]))
}

fn k_star_consistency(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let r = random_rank_one(d, rng);
    let dens = DensityOperator::normalized(&random_pd(d, rng))?.to_pd()?;
    let lhs = k_star(&r, &dens, a)?;
    let rhs = chi2(&r.to_psd(), &dens, a)? + 1.0;
    Ok(Trial::bound((lhs - rhs).abs(), 1e-10, vec![("r", r.matrix()), ("d", dens.matrix().clone())]))
}

/// Midpoint value must sit at least 1e−12 below the average, for pairs at
/// HS distance ≥ 1e−3.
fn strict_convexity(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let (x1, x2) = loop {
        let x1 = psd_random_rank(d, rng);
        let x2 = psd_random_rank(d, rng);
        if hs_norm(&(x1.matrix() - x2.matrix())) >= 1e-3 {
            break (x1, x2);
        }
    };
    let b = random_pd(d, rng);
    let mid = PsdOperator::new((x1.matrix() + x2.matrix()).scale(0.5))?;
    let lhs = chi2(&mid, &b, a)?;
    let avg = (chi2(&x1, &b, a)? + chi2(&x2, &b, a)?) / 2.0;
    let excess = lhs - (avg - 1e-12);
    Ok(Trial::new(
        excess.max(0.0),
        !(excess < 0.0),
        vec![("a1", x1.matrix().clone()), ("a2", x2.matrix().clone()), ("b", b.matrix().clone())],
    ))
}

fn op_norm_lower_bound(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let x = random_pd(d, rng);
    let y = random_pd(d, rng);
    let v = chi2(&x, &y, a)?;
    let bound = op_norm(&(x.matrix() - y.matrix())).powi(2) / y.lambda_max();
    let deficit = (bound - v).max(0.0);
    Ok(Trial::bound(deficit, 1e-9, vec![("a_prime", x.matrix().clone()), ("a", y.matrix().clone())]))
}

/// Along E·10^{−k}, k = 1..6, the change in chi2 must shrink at least
/// linearly and end below 1e−5·(1 + chi2(A, B)).
fn first_variable_continuity(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let x = random_pd(d, rng);
    let b = random_pd(d, rng);
    let e = random_hermitian(d, rng);
    let e = e.matrix().scale(0.05 / op_norm(e.matrix()));
    let base = chi2(&x, &b, a)?;
    let mut diffs = Vec::with_capacity(6);
    for k in 1..=6 {
        let pert = PsdOperator::new(x.matrix() + e.scale(10f64.powi(-k)))?;
        diffs.push((chi2(&pert, &b, a)? - base).abs());
    }
    // |tg + t²h| can cross zero, so compare rates per unit step instead
    let rates: Vec<f64> = diffs.iter().enumerate().map(|(k, v)| v * 10f64.powi(k as i32 + 1)).collect();
    let coarse = rates[..3].iter().cloned().fold(0.0, f64::max);
    let fine = rates[3..].iter().cloned().fold(0.0, f64::max);
    let linear = fine <= 2.0 * coarse + 1e-6 * (1.0 + base);
    let last = *diffs.last().expect("six steps");
    let failed = !linear || !(last <= 1e-5 * (1.0 + base));
    Ok(Trial::new(last, failed, vec![("a", x.matrix().clone()), ("b", b.matrix().clone()), ("e", e)]))
}

fn trace_monotonicity(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let (b, c) = random_ordered_pd_pair(d, rng);
    let x = random_pd(d, rng);
    let qb = Chi2Form::new(&b, a).quadratic(x.matrix());
    let qc = Chi2Form::new(&c, a).quadratic(x.matrix());
    let deficit = (qc - qb).max(0.0);
    Ok(Trial::bound(
        deficit,
        1e-9,
        vec![("b", b.matrix().clone()), ("c", c.matrix().clone()), ("x", x.matrix().clone())],
    ))
}

fn loewner_heinz(a: Alpha, d: usize, rng: &mut SeededRng) -> Result<Trial> {
    let (b, c) = random_ordered_pd_pair(d, rng);
    let diff = b.power(-a.value()) - c.power(-a.value());
    let lmin = jacobi_eigen(&diff)?.min();
    Ok(Trial::bound((-lmin).max(0.0), 1e-9, vec![("b", b.matrix().clone()), ("c", c.matrix().clone())]))
}

fn run_trial(prop: usize, a: Alpha, d: usize, rng: &mut SeededRng, k: usize) -> Result<Trial> {
    match prop {
        0 => nonnegativity(a, d, rng),
        1 => indiscernibles(a, d, rng, k),
        2 => unitary_invariance(a, d, rng),
        3 => homogeneity(a, d, rng),
        4 => product_rule(d, rng),
        5 => k_star_consistency(a, d, rng),
        6 => strict_convexity(a, d, rng),
        7 => op_norm_lower_bound(a, d, rng),
        8 => first_variable_continuity(a, d, rng),
        9 => trace_monotonicity(a, d, rng),
        _ => loewner_heinz(a, d, rng),
    }
}

fn cell_seed(seed: u64, prop: usize, alpha_idx: usize, d: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((prop as u64) << 32)
        .wrapping_add((alpha_idx as u64) << 16)
        .wrapping_add(d as u64)
}

fn witness_json(inputs: &[(&'static str, ComplexMatrix)]) -> Value {
    let mut map = serde_json::Map::new();
    for (name, m) in inputs {
        map.insert((*name).to_string(), json!(MatrixJson::from_matrix(m)));
    }
    Value::Object(map)
}

/// One report per property per (α, d), each cell seeded independently from
/// `seed`. A trial whose inputs make an operation error counts as a failure.
pub fn run_property_suite(
    alphas: &[Alpha],
    dims: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<PropertyReport>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!("dimension {d} must be at least 2")));
    }
    let mut reports = Vec::new();
    for (prop, name) in PROPERTIES.iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            for &d in dims {
                let mut rng = seeded_rng(cell_seed(seed, prop, ai, d));
                let mut failures = 0;
                let mut worst: f64 = 0.0;
                let mut worst_fail: Option<(f64, Value)> = None;
                for k in 0..trials {
                    let outcome = run_trial(prop, alpha, d, &mut rng, k);
                    let (residual, failed) = match &outcome {
                        Ok(t) => (t.residual, t.failed),
                        Err(_) => (f64::INFINITY, true),
                    };
                    worst = worst.max(residual);
                    if failed {
                        failures += 1;
                        if worst_fail.as_ref().is_none_or(|(r, _)| residual > *r) {
                            let w = match &outcome {
                                Ok(t) => witness_json(&t.inputs),
                                Err(e) => json!({ "error": e.to_string() }),
                            };
                            worst_fail = Some((residual, w));
                        }
                    }
                }
                reports.push(PropertyReport {
                    property: (*name).to_string(),
                    alpha: alpha.value(),
                    dim: d,
                    trials,
                    failures,
                    worst_residual: worst,
                    witness: worst_fail.map(|(_, w)| w),
                });
            }
        }
    }
    Ok(reports)
}

pub fn total_failures(reports: &[PropertyReport]) -> usize {
    reports.iter().map(|r| r.failures).sum()
}

/// Plain-text summary, one line per report.
pub fn format_report_table(reports: &[PropertyReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<28} {:>5} {:>3} {:>7} {:>8} {:>12}", "property", "alpha", "d", "trials", "failures", "worst");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<28} {:>5} {:>3} {:>7} {:>8} {:>12.3e}",
            r.property, r.alpha, r.dim, r.trials, r.failures, r.worst_residual
        );
    }
    let _ = writeln!(out, "total failures: {}", total_failures(reports));
    out
}
