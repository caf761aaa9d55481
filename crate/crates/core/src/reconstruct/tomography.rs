use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::oracle::DivergenceOracle;
use crate::divergence::Alpha;
use crate::linalg::eigen::jacobi_eigen;
use crate::linalg::matrix::{identity, symmetrize, C64, ComplexMatrix};
use crate::linalg::operators::{PdOperator, PsdOperator, RankOneProjection};
use crate::{Error, Result};

/// Endpoint detection width for α.
const ENDPOINT_TOL: f64 = 1e-9;
/// Fit residual threshold, relative to max(1, max |y|).
const FIT_TOL: f64 = 1e-6;
/// Most negative 1/t coefficient accepted as rounding noise.
const NEGATIVE_COEFF_TOL: f64 = 1e-8;

/// The mixing parameters t of the probes tP + ((1−t)/(d−1))(I−P).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbeSchedule {
    t_values: Vec<f64>,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        ProbeSchedule {
            t_values: vec![0.15, 0.3, 0.45, 0.6, 0.75, 0.9],
        }
    }
}

impl ProbeSchedule {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        if t_values.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::InvalidArgument("probe parameters must lie in (0, 1)".into()));
        }
        for (i, a) in t_values.iter().enumerate() {
            if t_values[i + 1..].contains(a) {
                return Err(Error::InvalidArgument(format!("repeated probe parameter {a}")));
            }
        }
        Ok(ProbeSchedule { t_values })
    }

    pub fn values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ProbeSchedule {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbeSchedule::new(v)
    }
}

impl From<ProbeSchedule> for Vec<f64> {
    fn from(s: ProbeSchedule) -> Vec<f64> {
        s.t_values
    }
}

/// The d² projections P_{e_i}, P_{(e_i+e_j)/√2}, P_{(e_i+ie_j)/√2} (i < j),
/// in that order within each (i, j).
pub fn tomography_probes(d: usize) -> Vec<RankOneProjection> {
    let mut out: Vec<RankOneProjection> = (0..d).map(|i| RankOneProjection::basis(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            out.push(RankOneProjection::superposition(d, i, j, C64::new(1.0, 0.0)));
            out.push(RankOneProjection::superposition(d, i, j, C64::new(0.0, 1.0)));
        }
    }
    out
}

/// tP + ((1−t)/(d−1))(I−P).
pub fn probe_operator(p: &RankOneProjection, t: f64) -> Result<PdOperator> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("probes need d >= 2".into()));
    }
    let pm = p.matrix();
    let s = (1.0 - t) / (d as f64 - 1.0);
    PdOperator::new(symmetrize(&(pm.scale(t) + (identity(d) - &pm).scale(s))))
}

/// Basis functions of t whose span contains t ↦ K_α(A‖C_t). The coefficient
/// of 1/t sits in column 1.
fn basis(alpha: f64, t: f64) -> Vec<f64> {
    let mut row = vec![1.0, 1.0 / t, 1.0 / (1.0 - t)];
    if alpha < ENDPOINT_TOL || 1.0 - alpha < ENDPOINT_TOL {
        return row;
    }
    row.push(t.powf(-alpha) * (1.0 - t).powf(alpha - 1.0));
    if (alpha - 0.5).abs() >= ENDPOINT_TOL {
        row.push((1.0 - t).powf(-alpha) * t.powf(alpha - 1.0));
    }
    row
}

/// Least-squares coefficient of 1/t.
fn fit_inverse_coefficient(alpha: f64, ts: &[f64], ys: &[f64]) -> Result<f64> {
    let cols = basis(alpha, ts[0]).len();
    if ts.len() < cols {
        return Err(Error::InvalidArgument(format!(
            "schedule has {} points, the fit needs {cols}",
            ts.len()
        )));
    }
    let x = DMatrix::from_fn(ts.len(), cols, |i, j| basis(alpha, ts[i])[j]);
    let y = DVector::from_column_slice(ys);
    let svd = x.clone().svd(true, true);
    let c = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&x * &c - &y).amax();
    let threshold = FIT_TOL * y.amax().max(1.0);
    if !(residual <= threshold) {
        return Err(Error::IllConditionedProbe { residual, threshold });
    }
    Ok(c[1])
}

/// Solves tr X P = y_P for Hermitian X over the probes of [`tomography_probes`].
fn linear_tomography(d: usize, y: &[f64]) -> ComplexMatrix {
    let mut x = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        x[(i, i)] = C64::new(y[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let mean = (y[i] + y[j]) / 2.0;
            let z = C64::new(y[k] - mean, mean - y[k + 1]);
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
            k += 2;
        }
    }
    x
}

fn clamp_psd(m: &ComplexMatrix) -> Result<PsdOperator> {
    let mut es = jacobi_eigen(m)?;
    for v in es.values.iter_mut() {
        *v = v.max(0.0);
    }
    PsdOperator::new(symmetrize(&es.reassemble()))
}

/// Recovers the hidden PSD operator A behind an oracle C ↦ K_α(A‖C).
///
/// For each probe P the values over the schedule are fitted in the span of
/// 1, 1/t, 1/(1−t), t^{−α}(1−t)^{α−1}, (1−t)^{−α}t^{α−1} (the last two
/// coincide at α = 1/2 and duplicate the middle ones at α ∈ {0, 1}). The
/// 1/t coefficient is tr PAPA = (tr AP)² for α ∈ (0, 1), which yields A by
/// linear tomography. At α ∈ {0, 1} it is tr PA² instead: A² is recovered
/// first and A is its PSD square root.
///
/// Issues exactly d²·|schedule| queries.
pub fn quadratic_form_tomography(
    oracle: &DivergenceOracle<'_, PdOperator>,
    d: usize,
    alpha: Alpha,
    schedule: &ProbeSchedule,
) -> Result<PsdOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument("tomography needs d >= 2".into()));
    }
    let a = alpha.value();
    let endpoint = a < ENDPOINT_TOL || 1.0 - a < ENDPOINT_TOL;
    let ts = schedule.values();
    let mut coeffs = Vec::with_capacity(d * d);
    for p in tomography_probes(d) {
        let mut ys = Vec::with_capacity(ts.len());
        for &t in ts {
            ys.push(oracle.query(&probe_operator(&p, t)?)?);
        }
        let c = fit_inverse_coefficient(a, ts, &ys)?;
        if c < -NEGATIVE_COEFF_TOL {
            return Err(Error::InconsistentOracle(c));
        }
        let c = c.max(0.0);
        coeffs.push(if endpoint { c } else { c.sqrt() });
    }
    let x = linear_tomography(d, &coeffs);
    if endpoint {
        let square = clamp_psd(&x)?;
        PsdOperator::new(square.map_spectrum(|l| l.max(0.0).sqrt()))
    } else {
        clamp_psd(&x)
    }
}
