use nalgebra::SymmetricEigen;
use proptest::prelude::*;

use chi2lab::divergence::{chi2, chi2_extended, jensen, k_star, Alpha, DivergenceValue, ScalarFunction};
use chi2lab::linalg::matrix::{hs_norm, identity, op_norm, symmetrize};
use chi2lab::linalg::random::{haar_unitary, random_density, random_hermitian, random_pd, random_psd_rank, random_rank_one};
use chi2lab::linalg::{
    frac_power, jacobi_eigen, matrix_from_json, matrix_to_json, seeded_rng, support_contained, ComplexMatrix, PdOperator,
    PsdOperator,
};

fn dims() -> impl Strategy<Value = usize> {
    2usize..=4
}

fn alpha() -> impl Strategy<Value = Alpha> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..=1.0].prop_map(|a| Alpha::new(a).unwrap())
}

/// tr B^{-α}(A−B)B^{α−1}(A−B) with powers taken from nalgebra's Hermitian eigensolver.
fn direct_chi2(a: &ComplexMatrix, b: &ComplexMatrix, alpha: f64) -> f64 {
    let eig = SymmetricEigen::new(b.clone());
    let power = |p: f64| {
        let mut m = eig.eigenvectors.clone();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            let s = l.powf(p);
            m.column_mut(j).scale_mut(s);
        }
        &m * eig.eigenvectors.adjoint()
    };
    let x = a - b;
    (power(-alpha) * &x * power(alpha - 1.0) * &x).trace().re
}

fn conjugate(u: &ComplexMatrix, a: &PsdOperator) -> PsdOperator {
    PsdOperator::new(symmetrize(&(u * a.matrix() * u.adjoint()))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_matches_nalgebra_spectrum(d in dims(), seed in any::<u64>()) {
        let h = random_hermitian(d, &mut seeded_rng(seed));
        let es = jacobi_eigen(h.matrix()).unwrap();
        prop_assert!(op_norm(&(es.reassemble() - h.matrix())) <= 1e-12 * (1.0 + op_norm(h.matrix())));
        let mut ours = es.values.as_slice().to_vec();
        let mut theirs = SymmetricEigen::new(h.matrix().clone()).eigenvalues.as_slice().to_vec();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn fractional_powers_compose(d in dims(), seed in any::<u64>(), p in -1.0f64..1.0) {
        let a = random_pd(d, &mut seeded_rng(seed));
        let half = frac_power(&a, 0.5, false).unwrap();
        prop_assert!(op_norm(&(half.matrix() * half.matrix() - a.matrix())) <= 1e-10 * op_norm(a.matrix()));
        let prod = a.power(p) * a.power(-p);
        prop_assert!(op_norm(&(prod - identity(d))) <= 1e-9);
    }

    #[test]
    fn matrix_json_round_trip(d in dims(), seed in any::<u64>()) {
        let h = random_hermitian(d, &mut seeded_rng(seed));
        let back = matrix_from_json(&matrix_to_json(h.matrix())).unwrap();
        prop_assert_eq!(back, h.matrix().clone());
    }

    #[test]
    fn chi2_agrees_with_direct_trace(d in dims(), seed in any::<u64>(), a in alpha()) {
        let mut rng = seeded_rng(seed);
        let x = random_psd_rank(d, 1 + (seed as usize) % d, &mut rng);
        let b = random_pd(d, &mut rng);
        let k = chi2(&x, &b, a).unwrap();
        let direct = direct_chi2(x.matrix(), b.matrix(), a.value());
        prop_assert!((k - direct).abs() <= 1e-9 * (1.0 + direct.abs()), "{k} vs {direct}");
    }

    #[test]
    fn chi2_basic_axioms(d in dims(), seed in any::<u64>(), a in alpha(), lambda in 0.1f64..10.0) {
        let mut rng = seeded_rng(seed);
        let x = random_pd(d, &mut rng);
        let b = random_pd(d, &mut rng);
        let u = haar_unitary(d, &mut rng);
        let k = chi2(&x, &b, a).unwrap();
        prop_assert!(k >= 0.0);
        prop_assert!(chi2(&b, &b, a).unwrap().abs() <= 1e-12);
        let ub = PdOperator::new(conjugate(&u, &b).matrix().clone()).unwrap();
        let rotated = chi2(&conjugate(&u, &x), &ub, a).unwrap();
        prop_assert!((rotated - k).abs() <= 1e-9 * (1.0 + k));
        let scaled = chi2(&x.scaled(lambda).unwrap(), &b.scaled(lambda).unwrap(), a).unwrap();
        prop_assert!((scaled - lambda * k).abs() <= 1e-9 * (1.0 + lambda * k));
        // cyclicity of the trace exchanges α and 1 − α
        let mirrored = chi2(&x, &b, Alpha::new(1.0 - a.value()).unwrap()).unwrap();
        prop_assert!((mirrored - k).abs() <= 1e-9 * (1.0 + k));
    }

    #[test]
    fn op_norm_bound(d in dims(), seed in any::<u64>(), a in alpha()) {
        let mut rng = seeded_rng(seed);
        let x = random_psd_rank(d, 1 + (seed as usize) % d, &mut rng);
        let b = random_pd(d, &mut rng);
        let k = chi2(&x, &b, a).unwrap();
        let diff = op_norm(&(x.matrix() - b.matrix()));
        prop_assert!(k + 1e-10 >= diff * diff / b.lambda_max());
    }

    #[test]
    fn extended_matches_finite_on_pd(d in dims(), seed in any::<u64>(), a in alpha()) {
        let mut rng = seeded_rng(seed);
        let x = random_pd(d, &mut rng);
        let b = random_pd(d, &mut rng);
        let k = chi2(&x, &b, a).unwrap();
        match chi2_extended(&x, &b, a).unwrap() {
            DivergenceValue::Finite(v) => prop_assert!((v - k).abs() <= 1e-9 * (1.0 + k)),
            DivergenceValue::Infinite => prop_assert!(false, "infinite on a PD pair"),
        }
    }

    #[test]
    fn extended_is_infinite_off_support(d in dims(), seed in any::<u64>(), a in alpha()) {
        let mut rng = seeded_rng(seed);
        let b = random_psd_rank(d, d - 1, &mut rng);
        let x = random_pd(d, &mut rng);
        prop_assert!(!support_contained(&x, &b).unwrap());
        prop_assert!(chi2_extended(&x, &b, a).unwrap().is_infinite());
    }

    #[test]
    fn k_star_is_chi2_plus_one_for_densities(d in dims(), seed in any::<u64>(), a in alpha()) {
        let mut rng = seeded_rng(seed);
        let dens = random_density(d, &mut rng).to_pd().unwrap();
        let r = random_rank_one(d, &mut rng);
        let ks = k_star(&r, &dens, a).unwrap();
        let k = chi2(&r.to_psd(), &dens, a).unwrap();
        prop_assert!((ks - k - 1.0).abs() <= 1e-9 * (1.0 + k));
    }

    #[test]
    fn jensen_is_symmetric(d in dims(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let x = random_psd_rank(d, d, &mut rng);
        let y = random_psd_rank(d, 1, &mut rng);
        let f = ScalarFunction::x_log_x();
        let fwd = jensen(&x, &y, &f).unwrap();
        prop_assert_eq!(fwd, jensen(&y, &x, &f).unwrap());
        prop_assert!(fwd >= -1e-12);
    }

    #[test]
    fn hs_norm_dominates_op_norm(d in dims(), seed in any::<u64>()) {
        let h = random_hermitian(d, &mut seeded_rng(seed));
        prop_assert!(op_norm(h.matrix()) <= hs_norm(h.matrix()) + 1e-12);
    }
}
