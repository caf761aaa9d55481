use super::{Alpha, DivergenceValue};
use crate::linalg::matrix::{check_same_dim, hs_norm, ComplexMatrix};
use crate::linalg::operators::{frac_power, support_contained, PdOperator, PsdOperator, RankOneProjection};
use crate::{Error, Result};

/// K_α(·‖B) for a fixed positive definite B, with the two fractional powers
/// of B computed once.
#[derive(Debug, Clone)]
pub struct Chi2Form {
    /// B^{(α−1)/2}
    left: ComplexMatrix,
    /// B^{−α/2}
    right: ComplexMatrix,
    b: ComplexMatrix,
}

impl Chi2Form {
    pub fn new(b: &PdOperator, alpha: Alpha) -> Self {
        let a = alpha.value();
        Chi2Form {
            left: b.power((a - 1.0) / 2.0),
            right: b.power(-a / 2.0),
            b: b.matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// tr B^{−α} X B^{α−1} X for Hermitian X, as a squared HS norm.
    pub fn quadratic(&self, x: &ComplexMatrix) -> f64 {
        let g = &self.left * x * &self.right;
        let n = hs_norm(&g);
        n * n
    }

    pub fn eval(&self, a: &ComplexMatrix) -> Result<f64> {
        check_same_dim(&self.b, a)?;
        Ok(self.quadratic(&(a - &self.b)))
    }
}

/// K_α(A‖B) for positive definite B.
pub fn chi2(a: &PsdOperator, b: &PdOperator, alpha: Alpha) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    Chi2Form::new(b, alpha).eval(a.matrix())
}

/// The α = 0 case, also known as the quadratic relative entropy.
pub fn quadratic_relative_entropy(a: &PsdOperator, b: &PdOperator) -> Result<f64> {
    chi2(a, b, Alpha::ZERO)
}

/// K_α(A‖B) for positive semidefinite B: the trace over supp B when
/// supp A ⊆ supp B, infinite otherwise.
pub fn chi2_extended(a: &PsdOperator, b: &PsdOperator, alpha: Alpha) -> Result<DivergenceValue> {
    check_same_dim(a.matrix(), b.matrix())?;
    if !support_contained(a, b)? {
        return Ok(DivergenceValue::Infinite);
    }
    let al = alpha.value();
    let left = frac_power(b, (al - 1.0) / 2.0, true)?;
    let right = frac_power(b, -al / 2.0, true)?;
    let g = left.matrix() * (a.matrix() - b.matrix()) * right.matrix();
    let n = hs_norm(&g);
    DivergenceValue::finite(n * n)
}

/// K_α(A‖B + εI) along a strictly decreasing schedule of ε ≥ 1e−8.
pub fn chi2_limit_probe(
    a: &PsdOperator,
    b: &PsdOperator,
    alpha: Alpha,
    eps_schedule: &[f64],
) -> Result<Vec<f64>> {
    check_same_dim(a.matrix(), b.matrix())?;
    if eps_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon schedule".into()));
    }
    if eps_schedule.iter().any(|&e| !(e >= 1e-8) || !e.is_finite()) {
        return Err(Error::InvalidArgument("epsilon values must lie in [1e-8, inf)".into()));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilon schedule must be strictly decreasing".into()));
    }
    eps_schedule
        .iter()
        .map(|&eps| {
            let shifted = PdOperator::from_psd(b.shifted(eps)?)?;
            chi2(a, &shifted, alpha)
        })
        .collect()
}

/// K*_α(R‖D) = tr R D^{−α} · tr R D^{α−1} for rank-one R and a fixed
/// positive definite D. For unit-trace D this equals K_α(R‖D) + 1.
#[derive(Debug, Clone)]
pub struct KStarForm {
    neg_alpha: ComplexMatrix,
    alpha_minus_one: ComplexMatrix,
}

impl KStarForm {
    pub fn new(d: &PdOperator, alpha: Alpha) -> Self {
        let a = alpha.value();
        KStarForm {
            neg_alpha: d.power(-a),
            alpha_minus_one: d.power(a - 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.neg_alpha.nrows()
    }

    pub fn eval(&self, r: &RankOneProjection) -> f64 {
        r.expectation(&self.neg_alpha).re * r.expectation(&self.alpha_minus_one).re
    }
}

pub fn k_star(r: &RankOneProjection, d: &PdOperator, alpha: Alpha) -> Result<f64> {
    if r.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: r.dim(),
        });
    }
    Ok(KStarForm::new(d, alpha).eval(r))
}
