use std::fmt::Write as _;

use serde::Serialize;

use crate::divergence::{chi2, chi2_extended, chi2_limit_probe, Alpha, DivergenceValue};
use crate::linalg::matrix::{from_real_rows, op_norm, real_diag, ComplexMatrix};
use crate::linalg::operators::{support_contained, PdOperator, PsdOperator};
use crate::{Error, Result};

/// Regularization used for the finite surrogate K_α(A_n‖P + εI).
pub const FIRST_VAR_PROBE_EPS: f64 = 1e-7;
/// Size the surrogate is compared against.
pub const FIRST_VAR_PROBE_LEVEL: f64 = 1e6;
/// Relative agreement required between numeric and closed-form values.
pub const SECOND_VAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVarRow {
    pub n: usize,
    pub support_contained: bool,
    pub value: DivergenceValue,
    /// K_α(A_n‖P + εI) at ε = [`FIRST_VAR_PROBE_EPS`].
    pub probe_value: f64,
    pub probe_exceeds_level: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVarDemo {
    pub alpha: f64,
    pub rows: Vec<FirstVarRow>,
    /// K_α(P‖P), the value at the limit point of A_n = P + I/n.
    pub limit_value: DivergenceValue,
}

/// A_n = P + I/n → P with P = e₁e₁* in dimension 2: every K_α(A_n‖P) is
/// infinite (A_n has full support) while K_α(P‖P) = 0.
pub fn demo_first_variable_discontinuity(alpha: Alpha, n_max: usize) -> Result<FirstVarDemo> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let p = PsdOperator::new(real_diag(&[1.0, 0.0]))?;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let inv = 1.0 / n as f64;
        let a = PsdOperator::new(real_diag(&[1.0 + inv, inv]))?;
        let probe = chi2_limit_probe(&a, &p, alpha, &[FIRST_VAR_PROBE_EPS])?[0];
        rows.push(FirstVarRow {
            n,
            support_contained: support_contained(&a, &p)?,
            value: chi2_extended(&a, &p, alpha)?,
            probe_value: probe,
            probe_exceeds_level: probe > FIRST_VAR_PROBE_LEVEL,
        });
    }
    Ok(FirstVarDemo {
        alpha: alpha.value(),
        rows,
        limit_value: chi2_extended(&p, &p, alpha)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondVarRow {
    pub n: usize,
    pub numeric: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    /// ‖B_n − P‖_op
    pub distance_to_p: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondVarDemo {
    pub rows: Vec<SecondVarRow>,
    pub all_pass: bool,
    pub note: String,
}

/// B_n^{1/2} = [[1, 1/n], [1/n, 2/n²]].
pub fn second_var_sequence(n: usize) -> ComplexMatrix {
    let m = 1.0 / n as f64;
    let root = from_real_rows(2, &[1.0, m, m, 2.0 * m * m]);
    &root * &root
}

/// 4 + n² − 2 + (1 + 2/n² + 4/n⁴).
pub fn second_var_closed_form(n: usize) -> f64 {
    let n2 = (n * n) as f64;
    4.0 + n2 - 2.0 + (1.0 + 2.0 / n2 + 4.0 / (n2 * n2))
}

/// B_n → P = e₁e₁* while K_0(P‖B_n) grows like n².
pub fn demo_second_variable_discontinuity(n_max: usize) -> Result<SecondVarDemo> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let p = PsdOperator::new(real_diag(&[1.0, 0.0]))?;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let b = PdOperator::new(second_var_sequence(n))?;
        let numeric = chi2(&p, &b, Alpha::ZERO)?;
        let closed = second_var_closed_form(n);
        let rel = (numeric - closed).abs() / closed;
        rows.push(SecondVarRow {
            n,
            numeric,
            closed_form: closed,
            relative_error: rel,
            distance_to_p: op_norm(&(b.matrix() - p.matrix())),
            pass: rel <= SECOND_VAR_TOL,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(SecondVarDemo {
        rows,
        all_pass,
        note: "B_n -> P in operator norm while K_0(P||B_n) -> infinity: the quadratic relative entropy \
               is not continuous in its second argument, contrary to Proposition 2.12 in [HMPB]"
            .into(),
    })
}

impl FirstVarDemo {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "{:>5} {:>10} {:>8} {:>16}", "n", "supp A<=P", "K", "K(A||P+1e-7 I)");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>5} {:>10} {:>8} {:>16.6e}",
                r.n, r.support_contained, r.value.to_string(), r.probe_value
            );
        }
        let _ = writeln!(out, "limit K(P||P) = {}", self.limit_value);
        out
    }
}

impl SecondVarDemo {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5} {:>20} {:>20} {:>10} {:>12} {:>5}",
            "n", "K_0(P||B_n)", "closed form", "rel err", "|B_n - P|", "ok"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>5} {:>20.10} {:>20.10} {:>10.2e} {:>12.4e} {:>5}",
                r.n, r.numeric, r.closed_form, r.relative_error, r.distance_to_p, r.pass
            );
        }
        let _ = writeln!(out, "{}", self.note);
        out
    }
}
