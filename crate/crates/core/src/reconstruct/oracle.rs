use std::cell::{Cell, RefCell};

use rand_distr::{Distribution, Normal};

use crate::divergence::{chi2, Alpha, KStarForm};
use crate::linalg::operators::{PdOperator, PsdOperator, RankOneProjection};
use crate::linalg::random::{seeded_rng, SeededRng};
use crate::{Error, Result};

/// Query access to a divergence against a hidden operator, with a call
/// counter and optional additive Gaussian noise.
///
/// Not `Sync`: a pipeline run owns its oracle.
pub struct DivergenceOracle<'a, Q> {
    query: Box<dyn Fn(&Q) -> Result<f64> + 'a>,
    noise: Option<(Normal<f64>, RefCell<SeededRng>)>,
    count: Cell<usize>,
}

impl<'a, Q> DivergenceOracle<'a, Q> {
    pub fn new(query: impl Fn(&Q) -> Result<f64> + 'a) -> Self {
        DivergenceOracle {
            query: Box::new(query),
            noise: None,
            count: Cell::new(0),
        }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("noise level {sigma} must be nonnegative"));
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(bad());
        }
        let normal = Normal::new(0.0, sigma).map_err(|_| bad())?;
        self.noise = Some((normal, RefCell::new(seeded_rng(seed))));
        Ok(self)
    }

    pub fn query(&self, q: &Q) -> Result<f64> {
        self.count.set(self.count.get() + 1);
        let mut y = (self.query)(q)?;
        if let Some((normal, rng)) = &self.noise {
            y += normal.sample(&mut *rng.borrow_mut());
        }
        Ok(y)
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }

    pub fn reset_count(&self) {
        self.count.set(0);
    }
}

impl<Q> std::fmt::Debug for DivergenceOracle<'_, Q> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivergenceOracle")
            .field("count", &self.count.get())
            .field("noisy", &self.noise.is_some())
            .finish()
    }
}

/// C ↦ K_α(A‖C) for a hidden PSD operator A.
pub fn chi2_oracle(hidden: PsdOperator, alpha: Alpha) -> DivergenceOracle<'static, PdOperator> {
    DivergenceOracle::new(move |c: &PdOperator| chi2(&hidden, c, alpha))
}

/// R ↦ K*_α(R‖D) for a hidden positive definite D.
pub fn k_star_oracle(hidden: &PdOperator, alpha: Alpha) -> DivergenceOracle<'static, RankOneProjection> {
    let form = KStarForm::new(hidden, alpha);
    DivergenceOracle::new(move |r: &RankOneProjection| Ok(form.eval(r)))
}
