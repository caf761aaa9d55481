//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use chi2lab::divergence::{chi2, chi2_extended, chi2_limit_probe, k_star, Alpha, KStarForm};
use chi2lab::lab::{
    demo_second_variable_discontinuity, distinguish_from_bregman, distinguish_from_f_divergence,
    distinguish_from_jensen, run_property_suite, FOutcome, PropertyReport, F_SEARCH_BUDGET,
};
use chi2lab::linalg::matrix::op_norm;
use chi2lab::linalg::random::{haar_unitary, pd_with_spectrum, random_ordered_pd_pair, random_psd_rank};
use chi2lab::linalg::{seeded_rng, support_contained, C64, ComplexMatrix, PdOperator, PsdOperator, SeededRng};
use chi2lab::optim::{infimum_over_pd, maximize_over_rank_one, minimize_over_rank_one, ConeOptConfig, SphereOptConfig};
use chi2lab::reconstruct::{
    chi2_oracle, k_star_oracle, preserver_decompile, quadratic_form_tomography, spectral_peel, ConjugationMap,
    DecompileConfig, ProbeSchedule, SymmetryKind,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn alphas(values: &[f64]) -> Vec<Alpha> {
    values.iter().map(|&a| Alpha::new(a).unwrap()).collect()
}

fn counterexample_closed_form() -> Verdict {
    let demo = demo_second_variable_discontinuity(100).unwrap();
    let worst = demo.rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let first = (demo.rows[0].numeric - 10.0).abs();
    verdict(
        worst <= 1e-6 && first <= 1e-9,
        format!("n=1..100 worst relative error {worst:.2e}, |K(n=1) - 10| = {first:.2e}"),
    )
}

/// Rank of an operator through nalgebra's SVD, independent of the Jacobi solver.
fn svd_rank(m: &ComplexMatrix) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-8 * top.max(1e-300)).count()
}

/// A random PSD operator of random rank supported inside supp B.
fn inside_support(b: &PsdOperator, rng: &mut SeededRng) -> PsdOperator {
    let d = b.dim();
    let es = b.eigensystem();
    let r = b.rank();
    let k = rng.random_range(1..=r);
    let g = random_psd_rank(r, k, rng);
    let v = DMatrix::from_fn(d, r, |i, j| es.vectors[(i, j)]);
    let m = &v * g.matrix() * v.adjoint();
    PsdOperator::new(chi2lab::linalg::matrix::symmetrize(&m)).unwrap()
}

fn support_dichotomy() -> Verdict {
    let mut rng = seeded_rng(2024);
    let mut mismatches = 0;
    let mut containment_disagreements = 0;
    let mut worst_tail: f64 = 0.0;
    let mut contained_cases = 0;
    for k in 0..500 {
        let d = rng.random_range(2..=4);
        let rb = rng.random_range(1..=d);
        // PSD B with spectrum from [0.1, 2] on a random rank-rb support
        let spectrum: Vec<f64> = (0..d).map(|j| if j < rb { rng.random_range(0.1..2.0) } else { 0.0 }).collect();
        let u = haar_unitary(d, &mut rng);
        let b = PsdOperator::new(chi2lab::linalg::matrix::symmetrize(
            &(&u * chi2lab::linalg::matrix::real_diag(&spectrum) * u.adjoint()),
        ))
        .unwrap();
        let a = if k % 2 == 0 {
            inside_support(&b, &mut rng)
        } else {
            let ra = rng.random_range(1..=d);
            random_psd_rank(d, ra, &mut rng)
        };
        let alpha = Alpha::new([0.0, 0.25, 0.5, 0.75, 1.0][k % 5]).unwrap();
        let independent = svd_rank(&(a.matrix() + b.matrix())) == svd_rank(b.matrix());
        let contained = support_contained(&a, &b).unwrap();
        if contained != independent {
            containment_disagreements += 1;
        }
        let ext = chi2_extended(&a, &b, alpha).unwrap();
        if ext.is_infinite() == contained {
            mismatches += 1;
        }
        if let Some(v) = ext.as_finite() {
            contained_cases += 1;
            let tail = chi2_limit_probe(&a, &b, alpha, &[1e-2, 1e-4, 1e-6]).unwrap()[2];
            worst_tail = worst_tail.max((tail - v).abs() / v.max(1.0));
        }
    }
    verdict(
        mismatches == 0 && containment_disagreements == 0 && worst_tail <= 1e-4,
        format!(
            "500 pairs ({contained_cases} contained): {mismatches} dichotomy mismatches, \
             {containment_disagreements} disagreements with SVD ranks, worst tail gap {worst_tail:.2e}"
        ),
    )
}

fn failures_of(reports: &[PropertyReport], names: &[&str]) -> (usize, usize, Vec<String>) {
    let mut failures = 0;
    let mut cells = 0;
    let mut bad = Vec::new();
    for r in reports.iter().filter(|r| names.contains(&r.property.as_str())) {
        cells += 1;
        failures += r.failures;
        if r.failures > 0 {
            bad.push(format!("{}(α={}, d={})", r.property, r.alpha, r.dim));
        }
    }
    (failures, cells, bad)
}

fn divergence_axioms(reports: &[PropertyReport]) -> Verdict {
    let names = [
        "nonnegativity",
        "identity_of_indiscernibles",
        "unitary_invariance",
        "homogeneity",
        "product_rule",
        "strict_convexity",
        "op_norm_lower_bound",
    ];
    let (failures, cells, bad) = failures_of(reports, &names);
    verdict(
        failures == 0 && cells == names.len() * 15,
        format!("{cells} (property, α, d) cells x 200 trials, {failures} failures {bad:?}"),
    )
}

fn trace_infimum(reports: &[PropertyReport]) -> Verdict {
    let mut rng = seeded_rng(77);
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    for k in 0..10 {
        let (b, c) = random_ordered_pd_pair(2, &mut rng);
        let alpha = Alpha::new([0.0, 0.25, 0.5, 0.75, 1.0][k % 5]).unwrap();
        let g = |x: &PdOperator| chi2(x, &b, alpha).unwrap() - chi2(x, &c, alpha).unwrap();
        let out = infimum_over_pd(g, 2, &ConeOptConfig { seed: k as u64, ..Default::default() }).unwrap();
        worst = worst.max((out.value - (b.trace() - c.trace())).abs());
        if !out.boundary {
            flagged += 1;
        }
    }
    let (failures, cells, bad) = failures_of(reports, &["trace_monotonicity", "loewner_heinz"]);
    verdict(
        worst <= 1e-3 && failures == 0 && cells == 30,
        format!(
            "10 pairs: worst |inf - (tr B - tr C)| = {worst:.2e} ({flagged} not at boundary); \
             monotonicity/Löwner–Heinz: {failures} failures over {cells} cells {bad:?}"
        ),
    )
}

fn tomography() -> Verdict {
    let mut rng = seeded_rng(5150);
    let schedule = ProbeSchedule::default();
    let mut worst: f64 = 0.0;
    let mut budget_violations = 0;
    let mut errors = Vec::new();
    for alpha in alphas(&[0.0, 0.5, 1.0]) {
        for d in [2, 3] {
            for _ in 0..20 {
                let r = rng.random_range(1..=d);
                let hidden = random_psd_rank(d, r, &mut rng);
                let oracle = chi2_oracle(hidden.clone(), alpha);
                match quadratic_form_tomography(&oracle, d, alpha, &schedule) {
                    Ok(rec) => worst = worst.max(op_norm(&(rec.matrix() - hidden.matrix()))),
                    Err(e) => errors.push(format!("α={alpha} d={d}: {e}")),
                }
                if oracle.count() != d * d * schedule.len() {
                    budget_violations += 1;
                }
            }
        }
    }
    verdict(
        worst <= 1e-6 && budget_violations == 0 && errors.is_empty(),
        format!("120 recoveries, worst error {worst:.2e}, {budget_violations} budget violations, errors {errors:?}"),
    )
}

fn gapped_density(d: usize, rng: &mut SeededRng) -> PdOperator {
    loop {
        let mut s: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let t: f64 = s.iter().sum();
        s.iter_mut().for_each(|x| *x /= t);
        s.sort_by(|a, b| b.total_cmp(a));
        if s.windows(2).all(|w| w[0] - w[1] >= 1e-2) {
            return pd_with_spectrum(&s, rng);
        }
    }
}

fn peeling() -> Verdict {
    let mut rng = seeded_rng(6006);
    let mut worst: f64 = 0.0;
    let mut worst_extreme: f64 = 0.0;
    let mut errors = Vec::new();
    for d in [2, 3] {
        for k in 0..20 {
            let dens = gapped_density(d, &mut rng);
            let alpha = Alpha::new([0.0, 0.25, 0.5, 0.75, 1.0][k % 5]).unwrap();
            let cfg = SphereOptConfig::default().with_seed(k as u64);
            match spectral_peel(&k_star_oracle(&dens, alpha), d, &cfg) {
                Ok(sd) => worst = worst.max(op_norm(&(sd.reassemble() - dens.matrix()))),
                Err(e) => errors.push(e.to_string()),
            }
            let form = KStarForm::new(&dens, alpha);
            let lo = minimize_over_rank_one(|r| form.eval(r), d, &cfg).unwrap();
            let hi = maximize_over_rank_one(|r| form.eval(r), d, &cfg).unwrap();
            worst_extreme = worst_extreme
                .max((lo.value - 1.0 / dens.lambda_max()).abs())
                .max((hi.value - 1.0 / dens.lambda_min()).abs());
        }
    }
    verdict(
        worst <= 1e-5 && worst_extreme <= 1e-7 && errors.is_empty(),
        format!("40 densities: worst reassembly error {worst:.2e}, worst K* extreme gap {worst_extreme:.2e}, errors {errors:?}"),
    )
}

fn decompiler() -> Verdict {
    let mut rng = seeded_rng(31337);
    let mut wrong_kind = 0;
    let mut worst_verify: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    let mut failures = Vec::new();
    for kind in [SymmetryKind::Unitary, SymmetryKind::Antiunitary] {
        for k in 0..10 {
            let d = 2 + k % 2;
            let truth = ConjugationMap::new(haar_unitary(d, &mut rng), kind).unwrap();
            let cfg = DecompileConfig { seed: k as u64, ..Default::default() };
            let report = preserver_decompile(&truth, d, Alpha::new(0.5).unwrap(), &cfg).unwrap();
            if report.kind != Some(kind) {
                wrong_kind += 1;
            }
            worst_verify = worst_verify.max(report.verification_residual);
            worst_scale = worst_scale.max(report.scale_consistency_residual);
            failures.extend(report.failures.iter().map(|f| f.stage.clone()));
        }
    }
    let doubling = |a: &PdOperator| a.scaled(2.0);
    let rejected = preserver_decompile(&doubling, 2, Alpha::ZERO, &DecompileConfig::default())
        .unwrap()
        .failed_stage("trace");
    verdict(
        wrong_kind == 0 && worst_verify <= 1e-6 && worst_scale <= 1e-5 && failures.is_empty() && rejected,
        format!(
            "20 conjugations: {wrong_kind} wrong kinds, worst verification {worst_verify:.2e}, \
             worst cross-scale {worst_scale:.2e}, stage failures {failures:?}; 2A rejected at trace stage: {rejected}"
        ),
    )
}

fn distinguishers() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [Alpha::ZERO, Alpha::ONE] {
        let r = distinguish_from_f_divergence(a, 2, F_SEARCH_BUDGET, 8).unwrap();
        ok &= r.outcome == FOutcome::Equality && r.max_residual <= 1e-9;
        parts.push(format!("α={a}: {:?} max residual {:.1e}", r.outcome, r.max_residual));
    }
    let r = distinguish_from_f_divergence(Alpha::HALF, 2, F_SEARCH_BUDGET, 8).unwrap();
    let gap = r.witness.as_ref().map_or(0.0, |w| w.gap);
    ok &= r.outcome == FOutcome::Witness && gap >= 0.01;
    parts.push(format!("α=0.5: witness gap {gap:.3} after {} samples", r.samples));
    let b = distinguish_from_bregman(Alpha::HALF, 2.0, &[0.5, 1.0, 1.5, 2.5], 2).unwrap();
    ok &= b.max_residual >= 0.1 && b.control_residual <= 1e-10;
    parts.push(format!("Bregman fit residual {:.4}", b.max_residual));
    let j = distinguish_from_jensen(Alpha::HALF, 2).unwrap();
    ok &= (j.gap - 8.0 / 3.0).abs() <= 1e-9 && j.jensen_gap == 0.0;
    parts.push(format!("Jensen gap {:.12}", j.gap));
    // the K* product form these rely on stays consistent with chi2 on densities
    let dens = PdOperator::new(chi2lab::linalg::matrix::real_diag(&[0.7, 0.3])).unwrap();
    let r1 = chi2lab::linalg::RankOneProjection::superposition(2, 0, 1, C64::new(1.0, 0.0));
    let ks = k_star(&r1, &dens, Alpha::HALF).unwrap();
    ok &= (ks - chi2(&r1.to_psd(), &dens, Alpha::HALF).unwrap() - 1.0).abs() < 1e-12;
    verdict(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = run_property_suite(&alphas(&[0.0, 0.25, 0.5, 0.75, 1.0]), &[2, 3, 4], 200, 0).unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("counterexample closed form", Box::new(counterexample_closed_form)),
        ("support dichotomy", Box::new(support_dichotomy)),
        ("divergence axioms", Box::new(|| divergence_axioms(&reports))),
        ("trace-infimum identity", Box::new(|| trace_infimum(&reports))),
        ("tomography", Box::new(tomography)),
        ("spectral peeling", Box::new(peeling)),
        ("preserver decompiler", Box::new(decompiler)),
        ("distinguishers", Box::new(distinguishers)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
