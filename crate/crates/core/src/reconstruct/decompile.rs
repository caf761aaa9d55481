use std::cell::Cell;

use serde::Serialize;

use super::wigner::{
    check_orthogonality_preservation, check_transition_probabilities, orthogonal_pairs, random_pairs,
    scalar_residual, wigner_synthesize, ConjugationMap, ProjectionMap, SymmetryKind,
};
use crate::divergence::{chi2, Alpha};
use crate::linalg::matrix::{identity, op_norm};
use crate::linalg::operators::{PdOperator, RankOneProjection};
use crate::linalg::random::{random_pd, seeded_rng};
use crate::{Error, Result};

/// A map on positive definite operators, treated as a black box.
pub trait PdMap {
    fn apply(&self, a: &PdOperator) -> Result<PdOperator>;
}

impl<F> PdMap for F
where
    F: Fn(&PdOperator) -> Result<PdOperator>,
{
    fn apply(&self, a: &PdOperator) -> Result<PdOperator> {
        self(a)
    }
}

impl PdMap for ConjugationMap {
    fn apply(&self, a: &PdOperator) -> Result<PdOperator> {
        self.apply_pd(a)
    }
}

#[derive(Debug, Clone)]
pub struct DecompileConfig {
    /// Random PD inputs for the trace, divergence and verification stages.
    pub samples: usize,
    /// Random pairs for the orthogonality and transition checks.
    pub pair_samples: usize,
    pub scales: Vec<f64>,
    /// Regularization of rank-one inputs: (1−ε)P + εI/d.
    pub epsilon: f64,
    pub seed: u64,
    pub trace_tol: f64,
    pub stability_tol: f64,
    pub orthogonality_tol: f64,
    pub transition_tol: f64,
    pub scale_tol: f64,
    pub verification_tol: f64,
    pub divergence_tol: f64,
}

impl Default for DecompileConfig {
    fn default() -> Self {
        DecompileConfig {
            samples: 8,
            pair_samples: 16,
            scales: vec![0.5, 1.0, 2.0],
            epsilon: 1e-4,
            seed: 0,
            trace_tol: 1e-8,
            stability_tol: 1e-6,
            orthogonality_tol: 1e-8,
            transition_tol: 1e-8,
            scale_tol: 1e-5,
            verification_tol: 1e-6,
            divergence_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompileReport {
    pub recovered: Option<ConjugationMap>,
    pub kind: Option<SymmetryKind>,
    pub trace_preservation_residual: f64,
    pub stability_residual: f64,
    pub orthogonality_pass: bool,
    pub orthogonality_residual: f64,
    pub transition_residual: f64,
    pub scale_consistency_residual: f64,
    pub divergence_residual: f64,
    pub verification_residual: f64,
    pub query_count: usize,
    pub failures: Vec<StageFailure>,
}

impl DecompileReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_stage(&self, stage: &str) -> bool {
        self.failures.iter().any(|f| f.stage == stage)
    }
}

struct Counted<'a, M: ?Sized> {
    phi: &'a M,
    calls: Cell<usize>,
}

impl<M: PdMap + ?Sized> Counted<'_, M> {
    fn call(&self, a: &PdOperator) -> Result<PdOperator> {
        self.calls.set(self.calls.get() + 1);
        self.phi.apply(a)
    }
}

/// Top eigenprojection of φ(λ((1−ε)P + εI/d))/λ.
fn locate<M: PdMap + ?Sized>(
    phi: &Counted<'_, M>,
    p: &RankOneProjection,
    lambda: f64,
    eps: f64,
) -> Result<RankOneProjection> {
    let d = p.dim();
    let reg = p.matrix().scale(1.0 - eps) + identity(d).scale(eps / d as f64);
    let input = PdOperator::new(reg.scale(lambda))?;
    let image = phi.call(&input)?;
    RankOneProjection::from_vector(image.eigensystem().vector(0))
}

fn fail(failures: &mut Vec<StageFailure>, stage: &str, message: impl Into<String>) {
    failures.push(StageFailure { stage: stage.into(), message: message.into() });
}

/// Recovers the unitary or antiunitary conjugation behind a map φ that
/// preserves K_α, checking each property the recovery relies on along the way.
///
/// Stages: `trace` (tr φ(C) = tr C), `stability` (ε vs ε/2 localization of
/// rank-one images), `orthogonality`, `transition`, `wigner` (per scale),
/// `scale` (the per-scale conjugations agree up to a phase), `divergence`
/// (K_α(φA‖φB) = K_α(A‖B)) and `verification` (‖φ(A) − UAU*‖_op). A failing
/// stage is recorded and the remaining stages still run.
pub fn preserver_decompile<M: PdMap + ?Sized>(
    phi: &M,
    d: usize,
    alpha: Alpha,
    cfg: &DecompileConfig,
) -> Result<DecompileReport> {
    if d < 2 {
        return Err(Error::InvalidArgument("decompiling needs d >= 2".into()));
    }
    if cfg.scales.is_empty() || cfg.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    let phi = Counted { phi, calls: Cell::new(0) };
    let mut rng = seeded_rng(cfg.seed);
    let mut failures = Vec::new();

    // trace
    let mut trace_res: f64 = 0.0;
    for _ in 0..cfg.samples {
        let c = random_pd(d, &mut rng);
        match phi.call(&c) {
            Ok(img) => trace_res = trace_res.max((img.trace() - c.trace()).abs() / c.trace()),
            Err(e) => {
                trace_res = f64::INFINITY;
                fail(&mut failures, "trace", e.to_string());
                break;
            }
        }
    }
    if trace_res > cfg.trace_tol && !failures.iter().any(|f: &StageFailure| f.stage == "trace") {
        fail(&mut failures, "trace", format!("relative trace residual {trace_res:.3e}"));
    }

    // stability of the ε-regularized localization, on the basis and one superposition
    let mut stability: f64 = 0.0;
    let mut probes: Vec<RankOneProjection> = (0..d).map(|i| RankOneProjection::basis(d, i)).collect();
    probes.push(RankOneProjection::superposition(d, 0, 1, crate::linalg::C64::new(1.0, 0.0)));
    for p in &probes {
        let a = locate(&phi, p, 1.0, cfg.epsilon);
        let b = locate(&phi, p, 1.0, cfg.epsilon / 2.0);
        match (a, b) {
            (Ok(a), Ok(b)) => stability = stability.max(op_norm(&(a.matrix() - b.matrix()))),
            (Err(e), _) | (_, Err(e)) => {
                stability = f64::INFINITY;
                fail(&mut failures, "stability", e.to_string());
                break;
            }
        }
    }
    if stability.is_finite() && stability > cfg.stability_tol {
        fail(&mut failures, "stability", format!("localization moved by {stability:.3e}"));
    }

    // orthogonality and transition probabilities of ξ at scale 1
    let xi1 = ProjectionMap::new(|p: &RankOneProjection| locate(&phi, p, 1.0, cfg.epsilon));
    let orth_pairs = orthogonal_pairs(d, cfg.pair_samples, &mut rng);
    let (orth_pass, orth_res) = match check_orthogonality_preservation(&xi1, &orth_pairs, cfg.orthogonality_tol) {
        Ok(o) => (o.pass, o.max_residual),
        Err(e) => {
            fail(&mut failures, "orthogonality", e.to_string());
            (false, f64::INFINITY)
        }
    };
    if !orth_pass && orth_res.is_finite() {
        fail(&mut failures, "orthogonality", format!("tr ξ(P)ξ(Q) up to {orth_res:.3e}"));
    }
    let trans_pairs = random_pairs(d, cfg.pair_samples, &mut rng);
    let trans_res = match check_transition_probabilities(&xi1, &trans_pairs, cfg.transition_tol) {
        Ok(o) => {
            if !o.pass {
                fail(&mut failures, "transition", format!("transition residual {:.3e}", o.max_residual));
            }
            o.max_residual
        }
        Err(e) => {
            fail(&mut failures, "transition", e.to_string());
            f64::INFINITY
        }
    };

    // Wigner synthesis per scale
    let mut maps: Vec<(f64, ConjugationMap)> = Vec::new();
    for &lambda in &cfg.scales {
        let xi = ProjectionMap::new(|p: &RankOneProjection| locate(&phi, p, lambda, cfg.epsilon));
        match wigner_synthesize(&xi, d) {
            Ok(m) => maps.push((lambda, m)),
            Err(e) => fail(&mut failures, "wigner", format!("scale {lambda}: {e}")),
        }
    }

    // cross-scale consistency against the map at the scale closest to 1
    let reference = maps
        .iter()
        .min_by(|a, b| (a.0 - 1.0).abs().total_cmp(&(b.0 - 1.0).abs()))
        .map(|(_, m)| m.clone());
    let mut scale_res: f64 = 0.0;
    if let Some(r) = &reference {
        for (lambda, m) in &maps {
            if m.kind != r.kind {
                scale_res = f64::INFINITY;
                fail(&mut failures, "scale", format!("scale {lambda} gives a different kind"));
                continue;
            }
            scale_res = scale_res.max(scalar_residual(&(&m.u * r.u.adjoint())));
        }
        if scale_res.is_finite() && scale_res > cfg.scale_tol {
            fail(&mut failures, "scale", format!("‖U_λU_1* − cI‖ up to {scale_res:.3e}"));
        }
    } else {
        scale_res = f64::INFINITY;
    }

    // divergence preservation
    let mut div_res: f64 = 0.0;
    for _ in 0..cfg.samples {
        let a = random_pd(d, &mut rng);
        let b = random_pd(d, &mut rng);
        let r = (|| -> Result<f64> {
            let before = chi2(&a, &b, alpha)?;
            let (fa, fb) = (phi.call(&a)?, phi.call(&b)?);
            let after = chi2(&fa, &fb, alpha)?;
            Ok((after - before).abs() / before.max(1.0))
        })();
        match r {
            Ok(v) => div_res = div_res.max(v),
            Err(e) => {
                div_res = f64::INFINITY;
                fail(&mut failures, "divergence", e.to_string());
                break;
            }
        }
    }
    if div_res.is_finite() && div_res > cfg.divergence_tol {
        fail(&mut failures, "divergence", format!("relative divergence change {div_res:.3e}"));
    }

    // verification on fresh samples
    let mut verify: f64 = f64::INFINITY;
    if let Some(r) = &reference {
        verify = 0.0;
        for _ in 0..cfg.samples {
            let a = random_pd(d, &mut rng);
            match phi.call(&a) {
                Ok(img) => verify = verify.max(op_norm(&(img.matrix() - r.apply(a.matrix())))),
                Err(e) => {
                    verify = f64::INFINITY;
                    fail(&mut failures, "verification", e.to_string());
                    break;
                }
            }
        }
        if verify.is_finite() && verify > cfg.verification_tol {
            fail(&mut failures, "verification", format!("‖φ(A) − UAU*‖ up to {verify:.3e}"));
        }
    } else {
        fail(&mut failures, "verification", "no conjugation was synthesized");
    }

    Ok(DecompileReport {
        kind: reference.as_ref().map(|m| m.kind),
        recovered: reference,
        trace_preservation_residual: trace_res,
        stability_residual: stability,
        orthogonality_pass: orth_pass,
        orthogonality_residual: orth_res,
        transition_residual: trans_res,
        scale_consistency_residual: scale_res,
        divergence_residual: div_res,
        verification_residual: verify,
        query_count: phi.calls.get(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::haar_unitary;

    fn conj(kind: SymmetryKind, seed: u64, d: usize) -> ConjugationMap {
        let mut rng = seeded_rng(seed);
        ConjugationMap::new(haar_unitary(d, &mut rng), kind).unwrap()
    }

    #[test]
    fn identity_map() {
        let phi = |a: &PdOperator| Ok(a.clone());
        let r = preserver_decompile(&phi, 2, Alpha::HALF, &DecompileConfig::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.kind, Some(SymmetryKind::Unitary));
        let u = &r.recovered.as_ref().unwrap().u;
        assert!(op_norm(&(u - identity(2))) < 1e-7);
        for x in [r.trace_preservation_residual, r.transition_residual, r.scale_consistency_residual, r.verification_residual] {
            assert!(x <= 1e-7, "{x}");
        }
        assert!(r.query_count > 0);
    }

    #[test]
    fn haar_unitary_and_antiunitary() {
        for d in 2..=3 {
            for (k, kind) in [SymmetryKind::Unitary, SymmetryKind::Antiunitary].into_iter().enumerate() {
                let truth = conj(kind, 40 + d as u64 + k as u64, d);
                let r = preserver_decompile(&truth, d, Alpha::new(0.3).unwrap(), &DecompileConfig::default()).unwrap();
                assert!(r.passed(), "{:?}", r.failures);
                assert_eq!(r.kind, Some(kind));
                assert!(r.verification_residual <= 1e-6);
                assert!(r.recovered.unwrap().distance(&truth) < 1e-6);
            }
        }
    }

    #[test]
    fn doubling_fails_trace_stage() {
        let phi = |a: &PdOperator| a.scaled(2.0);
        let r = preserver_decompile(&phi, 2, Alpha::ZERO, &DecompileConfig::default()).unwrap();
        assert!(r.failed_stage("trace"));
        assert!(!r.passed());
    }

    #[test]
    fn idempotent_on_own_output() {
        let truth = conj(SymmetryKind::Unitary, 77, 3);
        let first = preserver_decompile(&truth, 3, Alpha::HALF, &DecompileConfig::default()).unwrap();
        let rec = first.recovered.unwrap();
        let second = preserver_decompile(&rec, 3, Alpha::HALF, &DecompileConfig::default()).unwrap();
        assert!(second.passed());
        assert!(second.recovered.unwrap().distance(&rec) <= 1e-6);
    }

    #[test]
    fn report_serializes() {
        let phi = |a: &PdOperator| Ok(a.clone());
        let r = preserver_decompile(&phi, 2, Alpha::HALF, &DecompileConfig { samples: 2, ..Default::default() }).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"query_count\"") && s.contains("\"unitary\""));
    }
}
