//! Divergence functionals on positive operators.
//!
//! The central object is the χ²_α-divergence
//!
//! ```text
//! K_α(A‖B) = tr B^{−α}(A−B)B^{α−1}(A−B) = ‖B^{(α−1)/2}(A−B)B^{−α/2}‖²_HS
//! ```
//!
//! evaluated in the Gram (squared Hilbert–Schmidt norm) form so results are
//! nonnegative by construction. For singular B the value is the
//! support-restricted trace when supp A ⊆ supp B and +∞ otherwise.
//!
//! The comparison families (f-, Bregman, Jensen) live in [`comparison`].

mod chi2;
pub mod comparison;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::{Error, Result};

pub use chi2::{
    chi2, chi2_extended, chi2_limit_probe, k_star, quadratic_relative_entropy, Chi2Form, KStarForm,
};
pub use comparison::{bregman, f_divergence, jensen};

/// Slack below zero tolerated (and clamped) in finite divergence values.
pub const DIVERGENCE_EPS: f64 = 1e-10;

/// The parameter α ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub const ZERO: Alpha = Alpha(0.0);
    pub const HALF: Alpha = Alpha(0.5);
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidArgument(format!("alpha {value} outside [0, 1]")));
        }
        Ok(Alpha(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// α ∈ {0, 1} up to `tol`.
    pub fn is_endpoint(self, tol: f64) -> bool {
        self.0 <= tol || self.0 >= 1.0 - tol
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonnegative extended real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    /// Clamps values in [−ε, 0) to zero; rejects anything more negative.
    pub fn finite(x: f64) -> Result<Self> {
        if !x.is_finite() || x < -DIVERGENCE_EPS {
            return Err(Error::InvalidArgument(format!("{x} is not a divergence value")));
        }
        Ok(DivergenceValue::Finite(x.max(0.0)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, DivergenceValue::Infinite)
    }

    pub fn as_finite(&self) -> Option<f64> {
        match *self {
            DivergenceValue::Finite(x) => Some(x),
            DivergenceValue::Infinite => None,
        }
    }
}

impl fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceValue::Finite(x) => write!(f, "{x}"),
            DivergenceValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DivergenceValue::Finite(x) => s.serialize_f64(*x),
            DivergenceValue::Infinite => s.serialize_str("inf"),
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function applied through the spectral calculus, with an optional
/// derivative (needed by Bregman divergences).
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    f: RealFn,
    df: Option<RealFn>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("has_derivative", &self.df.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunction {
            name: name.into(),
            f: Arc::new(f),
            df: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }

    /// (t − 1)².
    pub fn chi_square() -> Self {
        Self::new("(t-1)^2", |t| (t - 1.0) * (t - 1.0)).with_derivative(|t| 2.0 * (t - 1.0))
    }

    /// t².
    pub fn square() -> Self {
        Self::new("t^2", |t| t * t).with_derivative(|t| 2.0 * t)
    }

    /// t log t with 0 log 0 = 0.
    pub fn x_log_x() -> Self {
        Self::new("t log t", |t| if t == 0.0 { 0.0 } else { t * t.ln() })
            .with_derivative(|t| t.ln() + 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let y = (self.f)(t);
        if !y.is_finite() {
            return Err(Error::FunctionEvaluation(format!("{}({t}) = {y}", self.name)));
        }
        Ok(y)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let df = self.df.as_ref().ok_or(Error::MissingDerivative)?;
        let y = df(t);
        if !y.is_finite() {
            return Err(Error::FunctionEvaluation(format!("{}'({t}) = {y}", self.name)));
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_range() {
        assert!(Alpha::new(-0.1).is_err());
        assert!(Alpha::new(1.1).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert_eq!(Alpha::new(0.25).unwrap().value(), 0.25);
        assert!(Alpha::ONE.is_endpoint(1e-12));
        assert!(!Alpha::HALF.is_endpoint(1e-12));
    }

    #[test]
    fn divergence_value_clamps() {
        assert_eq!(DivergenceValue::finite(-1e-12).unwrap(), DivergenceValue::Finite(0.0));
        assert!(DivergenceValue::finite(-1e-3).is_err());
        assert_eq!(DivergenceValue::Infinite.to_string(), "inf");
        assert_eq!(serde_json::to_string(&DivergenceValue::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn scalar_function_errors() {
        let f = ScalarFunction::new("log", f64::ln);
        assert!(f.eval(0.0).is_err());
        assert!(matches!(f.derivative(1.0), Err(Error::MissingDerivative)));
        assert_eq!(ScalarFunction::x_log_x().eval(0.0).unwrap(), 0.0);
    }
}
