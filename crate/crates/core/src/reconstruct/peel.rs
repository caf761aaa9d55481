use std::cell::RefCell;

use super::oracle::DivergenceOracle;
use crate::linalg::eigen::SpectralDecomposition;
use crate::linalg::matrix::{identity, outer, ComplexMatrix, ComplexVector};
use crate::linalg::operators::RankOneProjection;
use crate::optim::{minimize_over_rank_one, SphereOptConfig};
use crate::{Error, Result};

/// Consecutive minima within this fraction of each other belong to one eigenspace.
pub const PEEL_GROUPING: f64 = 1e-6;

/// Recovers the spectral decomposition of a hidden positive definite D from
/// an oracle R ↦ K*_α(R‖D).
///
/// The minimum of the oracle over rank-one projections orthogonal to the
/// directions found so far is 1/λ for the largest remaining eigenvalue λ,
/// attained on its eigenvectors. Minima that agree within
/// [`PEEL_GROUPING`] are merged into one eigenprojection.
pub fn spectral_peel(
    oracle: &DivergenceOracle<'_, RankOneProjection>,
    d: usize,
    cfg: &SphereOptConfig,
) -> Result<SpectralDecomposition> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |r: &RankOneProjection| match oracle.query(r) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::INFINITY
        }
    };

    let mut found: Vec<ComplexVector> = Vec::with_capacity(d);
    // (values, vectors) per eigenspace
    let mut groups: Vec<(Vec<f64>, Vec<ComplexVector>)> = Vec::new();
    while found.len() < d {
        let mut complement = identity(d);
        for v in &found {
            complement -= outer(v);
        }
        let step_cfg = SphereOptConfig {
            subspace: if found.is_empty() { None } else { Some(complement.clone()) },
            seed: cfg.seed.wrapping_add(found.len() as u64),
            ..cfg.clone()
        };
        let res = minimize_over_rank_one(objective, d, &step_cfg)?;
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        if !res.converged {
            return Err(Error::ConvergenceFailure(format!(
                "peeling step {} hit the iteration cap",
                found.len() + 1
            )));
        }
        let v = res.value;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::EigenvalueOutOfRange(v));
        }
        // Re-orthogonalize against earlier directions before storing.
        let mut u = &complement * res.point.vector();
        u.unscale_mut(u.norm());
        match groups.last_mut() {
            Some((vals, vecs)) if (v - vals[0]).abs() <= PEEL_GROUPING * vals[0] => {
                vals.push(v);
                vecs.push(u.clone());
            }
            _ => groups.push((vec![v], vec![u.clone()])),
        }
        found.push(u);
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projections = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for (vals, vecs) in groups {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let mut p = ComplexMatrix::zeros(d, d);
        for u in &vecs {
            p += outer(u);
        }
        eigenvalues.push(1.0 / mean);
        projections.push(p);
        multiplicities.push(vecs.len());
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        multiplicities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::Alpha;
    use crate::linalg::matrix::{op_norm, real_diag};
    use crate::linalg::operators::PdOperator;
    use crate::linalg::random::{pd_with_spectrum, seeded_rng};
    use crate::reconstruct::oracle::k_star_oracle;

    #[test]
    fn diagonal_density() {
        let d = PdOperator::new(real_diag(&[0.7, 0.3])).unwrap();
        for a in [0.0, 0.5, 1.0] {
            let o = k_star_oracle(&d, Alpha::new(a).unwrap());
            let sd = spectral_peel(&o, 2, &SphereOptConfig::default()).unwrap();
            assert_eq!(sd.multiplicities, vec![1, 1]);
            assert!((sd.eigenvalues[0] - 0.7).abs() < 1e-6 && (sd.eigenvalues[1] - 0.3).abs() < 1e-6);
            assert!(op_norm(&(&sd.projections[0] - real_diag(&[1.0, 0.0]))) < 1e-6);
            assert!(op_norm(&(&sd.projections[1] - real_diag(&[0.0, 1.0]))) < 1e-6);
        }
    }

    #[test]
    fn fully_degenerate() {
        let d = PdOperator::new(identity(2).scale(0.5)).unwrap();
        let o = k_star_oracle(&d, Alpha::HALF);
        let sd = spectral_peel(&o, 2, &SphereOptConfig::default()).unwrap();
        assert_eq!(sd.multiplicities, vec![2]);
        assert!((sd.eigenvalues[0] - 0.5).abs() < 1e-9);
        assert!(op_norm(&(&sd.projections[0] - identity(2))) < 1e-9);
    }

    #[test]
    fn haar_rotated_density() {
        let mut rng = seeded_rng(31);
        let d = pd_with_spectrum(&[0.5, 0.3, 0.2], &mut rng);
        let o = k_star_oracle(&d, Alpha::new(0.25).unwrap());
        let sd = spectral_peel(&o, 3, &SphereOptConfig::default()).unwrap();
        assert!(op_norm(&(sd.reassemble() - d.matrix())) < 1e-5);
        assert!((sd.trace() - 1.0).abs() < 1e-5);
        assert!(sd.projection_defect() < 1e-8);
    }

    #[test]
    fn nonpositive_minimum_rejected() {
        let o = DivergenceOracle::new(|_: &RankOneProjection| Ok(-1.0));
        assert!(matches!(
            spectral_peel(&o, 2, &SphereOptConfig { restarts: 2, ..Default::default() }),
            Err(Error::EigenvalueOutOfRange(_))
        ));
    }
}
