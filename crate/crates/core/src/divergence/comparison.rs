//! Comparison families: quantum f-divergences, Bregman and Jensen divergences.

use super::ScalarFunction;
use crate::linalg::matrix::{check_same_dim, outer, ComplexMatrix};
use crate::linalg::operators::{HermitianMatrix, PdOperator, PsdOperator};
use crate::Result;

/// S_f(A‖B) = Σ_{a,b} b f(a/b) tr P_a Q_b over the spectral resolutions of A and B.
///
/// Summed over eigenpairs rather than eigenspaces; the two agree since
/// tr P_a Q_b adds up over any orthonormal basis of each eigenspace.
pub fn f_divergence(a: &PsdOperator, b: &PdOperator, f: &ScalarFunction) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    let ea = a.eigensystem();
    let eb = b.eigensystem();
    let mut total = 0.0;
    for (i, &la) in ea.values.iter().enumerate() {
        let u = ea.vectors.column(i);
        for (j, &lb) in eb.values.iter().enumerate() {
            let w = eb.vectors.column(j);
            let overlap = u.dotc(&w).norm_sqr();
            total += lb * f.eval(la.max(0.0) / lb)? * overlap;
        }
    }
    Ok(total)
}

fn trace_of(a: &PsdOperator, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    a.eigensystem().values.iter().map(|&l| f(l.max(0.0))).sum()
}

/// H_f(A‖B) = tr f(A) − tr f(B) − tr f′(B)(A − B).
pub fn bregman(a: &PdOperator, b: &PdOperator, f: &ScalarFunction) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    let fa = trace_of(a, &|t| f.eval(t))?;
    let fb = trace_of(b, &|t| f.eval(t))?;
    let eb = b.eigensystem();
    let mut df_b = ComplexMatrix::zeros(b.dim(), b.dim());
    for (j, &l) in eb.values.iter().enumerate() {
        df_b += outer(&eb.vector(j)).scale(f.derivative(l)?);
    }
    let diff = a.matrix() - b.matrix();
    let cross = (df_b * diff).trace().re;
    Ok(fa - fb - cross)
}

/// J_f(A, B) = tr[(f(A) + f(B))/2 − f((A + B)/2)], symmetric in its arguments.
pub fn jensen(a: &PsdOperator, b: &PsdOperator, f: &ScalarFunction) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    let mid = (a.matrix() + b.matrix()).scale(0.5);
    let mid = PsdOperator::from_hermitian(HermitianMatrix::symmetrized(&mid), a.tolerances())?;
    let fa = trace_of(a, &|t| f.eval(t))?;
    let fb = trace_of(b, &|t| f.eval(t))?;
    let fm = trace_of(&mid, &|t| f.eval(t))?;
    Ok((fa + fb) / 2.0 - fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{chi2, Alpha};
    use crate::linalg::matrix::real_diag;
    use crate::linalg::random::{random_pd, seeded_rng};
    use crate::Error;

    fn pd(v: &[f64]) -> PdOperator {
        PdOperator::new(real_diag(v)).unwrap()
    }

    #[test]
    fn f_divergence_vanishes_on_equal_arguments() {
        let mut rng = seeded_rng(4);
        let b = random_pd(3, &mut rng);
        let v = f_divergence(&b, &b, &ScalarFunction::chi_square()).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn f_divergence_commuting() {
        let v = f_divergence(&pd(&[2.0, 1.0]), &pd(&[1.0, 2.0]), &ScalarFunction::chi_square()).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn f_divergence_matches_alpha_zero_on_noncommuting_pair() {
        let mut rng = seeded_rng(17);
        let a = random_pd(2, &mut rng);
        let b = random_pd(2, &mut rng);
        let s = f_divergence(&a, &b, &ScalarFunction::chi_square()).unwrap();
        let k = chi2(&a, &b, Alpha::ZERO).unwrap();
        assert!((s - k).abs() < 1e-10, "{s} vs {k}");
    }

    #[test]
    fn f_divergence_reports_bad_function() {
        let f = ScalarFunction::new("1/(t-2)", |t| 1.0 / (t - 2.0));
        assert!(matches!(
            f_divergence(&pd(&[2.0, 1.0]), &pd(&[1.0, 1.0]), &f),
            Err(Error::FunctionEvaluation(_))
        ));
    }

    #[test]
    fn bregman_quadratic() {
        let v = bregman(&pd(&[2.0, 1.0]), &pd(&[1.0, 2.0]), &ScalarFunction::square()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let b = pd(&[1.0, 2.0]);
        assert!(bregman(&b, &b, &ScalarFunction::square()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bregman_entropy_is_umegaki() {
        let v = bregman(&pd(&[2.0, 1.0]), &pd(&[1.0, 2.0]), &ScalarFunction::x_log_x()).unwrap();
        let expected = 2.0 * (2.0f64.ln() - 0.0) - 1.0 + (0.0 - 2.0f64.ln()) + 1.0;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.693_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn bregman_requires_derivative() {
        let f = ScalarFunction::new("t^3", |t| t * t * t);
        assert!(matches!(
            bregman(&pd(&[2.0, 1.0]), &pd(&[1.0, 2.0]), &f),
            Err(Error::MissingDerivative)
        ));
    }

    #[test]
    fn jensen_quadratic_and_symmetric() {
        let a = pd(&[2.0, 1.0]);
        let b = pd(&[1.0, 2.0]);
        let f = ScalarFunction::square();
        let ab = jensen(&a, &b, &f).unwrap();
        assert!((ab - 0.5).abs() < 1e-12);
        let mut rng = seeded_rng(3);
        let x = random_pd(4, &mut rng);
        let y = random_pd(4, &mut rng);
        assert_eq!(jensen(&x, &y, &f).unwrap(), jensen(&y, &x, &f).unwrap());
        assert!(jensen(&x, &x, &f).unwrap().abs() < 1e-12);
    }
}
