//! The single-objective CatCMA with Margin loop behind an ask/tell interface.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::categorical::{
    default_q_min, sigma_floor, Blocks, CategoricalState, DEFAULT_ALPHA_SNR, DEFAULT_LAMBDA_MIN,
};
use crate::cma::{CmaHyperparameters, CovarianceEigen, GaussianState};
use crate::error::{Error, Result};
use crate::margin::{
    apply_margin_correction, detect_successful_mutation, integer_centering, original_alpha,
    promising_alpha, MarginConfig, MarginMode,
};
use crate::sampler::{enc, sample_population, ThresholdTable};
use crate::space::{validate_space, MixedSolution, Objective, SearchSpace};

/// Floor on `sigma` and `delta` below which the run counts as collapsed.
const UNDERFLOW: f64 = 1e-15;

/// Evaluations without improvement, in units of `lambda`, before a
/// collapsed run is stopped.
const STAGNATION_GENERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Modified margin correction with integer centering.
    CatCmaWm,
    /// Original margin correction, no centering, `alpha = 1 / (lambda N_mi)`.
    OriginalMargin,
    /// Modified margin correction without centering.
    NoCentering,
}

impl Variant {
    fn margin_mode(self) -> MarginMode {
        match self {
            Variant::OriginalMargin => MarginMode::Original,
            _ => MarginMode::Modified,
        }
    }

    fn centering(self) -> bool {
        self == Variant::CatCmaWm
    }
}

/// Initial distribution and overrides. Unset fields fall back to the
/// defaults: `C = I`, uniform `q`, and a mean drawn uniformly from
/// `init_box`.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub variant: Variant,
    pub sigma0: f64,
    pub mean0: Option<Vec<f64>>,
    pub init_box: (f64, f64),
    pub cov0: Option<DMatrix<f64>>,
    pub q0: Option<Blocks>,
    pub lambda: Option<usize>,
    pub alpha: Option<f64>,
    pub q_min: Option<Vec<f64>>,
    pub margin_mode: Option<MarginMode>,
    pub centering: Option<bool>,
    pub alpha_snr: f64,
    pub lambda_min: f64,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            variant: Variant::CatCmaWm,
            sigma0: 1.0,
            mean0: None,
            init_box: (1.0, 3.0),
            cov0: None,
            q0: None,
            lambda: None,
            alpha: None,
            q_min: None,
            margin_mode: None,
            centering: None,
            alpha_snr: DEFAULT_ALPHA_SNR,
            lambda_min: DEFAULT_LAMBDA_MIN,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Budget,
    Target,
    Stagnation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestSolution {
    pub solution: MixedSolution,
    pub fitness: f64,
}

#[derive(Debug, Clone)]
pub struct CatCmaWm {
    space: SearchSpace,
    table: ThresholdTable,
    pub hyper: CmaHyperparameters,
    pub gauss: GaussianState,
    pub cat: CategoricalState,
    margin: Option<MarginConfig>,
    lambda_min: f64,
    rng: ChaCha8Rng,
    evaluations: usize,
    best: Option<BestSolution>,
    last_improvement: usize,
    last_success: Vec<bool>,
}

impl CatCmaWm {
    pub fn new(space: SearchSpace, settings: &Settings) -> Result<Self> {
        if let Err(violations) = validate_space(&space) {
            let report: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidSpace(report.join("; ")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let n_mi = space.n_mi();
        let hyper = match settings.lambda {
            Some(lambda) => CmaHyperparameters::with_population(n_mi, lambda),
            None => CmaHyperparameters::new(n_mi, space.n_total()),
        };

        let mean = match &settings.mean0 {
            Some(m) if m.len() != n_mi => {
                return Err(Error::DimensionMismatch {
                    what: "initial mean",
                    expected: n_mi,
                    got: m.len(),
                })
            }
            Some(m) => DVector::from_column_slice(m),
            None => {
                let (lo, hi) = settings.init_box;
                if !(lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "empty initial box [{lo}, {hi}]"
                    )));
                }
                DVector::from_fn(n_mi, |_, _| rng.random_range(lo..hi))
            }
        };
        let cov = settings
            .cov0
            .clone()
            .unwrap_or_else(|| DMatrix::identity(n_mi, n_mi));
        let gauss = GaussianState::new(mean, settings.sigma0, cov, space.n_in())?;

        let q_min = match &settings.q_min {
            Some(q_min) if q_min.len() != space.n_ca() => {
                return Err(Error::DimensionMismatch {
                    what: "q_min",
                    expected: space.n_ca(),
                    got: q_min.len(),
                })
            }
            Some(q_min) => q_min.clone(),
            None => default_q_min(&space),
        };
        for (&floor, &k) in q_min.iter().zip(space.category_counts()) {
            if !(floor >= 0.0 && floor < 1.0 / k as f64) {
                return Err(Error::InvalidParameter(format!(
                    "q_min {floor} must lie in [0, 1/{k})"
                )));
            }
        }
        let mut cat = match &settings.q0 {
            Some(q0) => {
                check_simplex(q0, space.category_counts())?;
                CategoricalState::from_probabilities(q0.clone(), q_min)
            }
            None => CategoricalState::uniform(space.category_counts(), q_min),
        };
        cat.alpha_snr = settings.alpha_snr;

        let margin = if space.n_in() > 0 {
            let mode = settings
                .margin_mode
                .unwrap_or(settings.variant.margin_mode());
            let alpha = match settings.alpha {
                Some(alpha) => alpha,
                None if settings.variant == Variant::OriginalMargin => {
                    original_alpha(hyper.lambda, n_mi)
                }
                None => {
                    promising_alpha(space.n_in(), space.n_ca()).expect("integer variables present")
                }
            };
            let centering = settings.centering.unwrap_or(settings.variant.centering());
            Some(MarginConfig::new(alpha, mode, centering)?)
        } else {
            None
        };

        Ok(CatCmaWm {
            table: ThresholdTable::new(&space),
            last_success: vec![false; space.n_in()],
            space,
            hyper,
            gauss,
            cat,
            margin,
            lambda_min: settings.lambda_min,
            rng,
            evaluations: 0,
            best: None,
            last_improvement: 0,
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn thresholds(&self) -> &ThresholdTable {
        &self.table
    }

    pub fn lambda(&self) -> usize {
        self.hyper.lambda
    }

    pub fn margin(&self) -> Option<&MarginConfig> {
        self.margin.as_ref()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Counts evaluations made outside `tell`, such as incumbent
    /// evaluations in the multi-objective loop.
    pub fn add_evaluations(&mut self, n: usize) {
        self.evaluations += n;
    }

    pub fn best(&self) -> Option<&BestSolution> {
        self.best.as_ref()
    }

    /// Per integer dimension, whether the last `tell` saw a successful
    /// integer mutation.
    pub fn last_success(&self) -> &[bool] {
        &self.last_success
    }

    /// `Enc(m)`: continuous and integer parts of the mean.
    pub fn encoded_mean(&self) -> (Vec<f64>, Vec<f64>) {
        enc(self.gauss.mean.as_slice(), &self.space, &self.table)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn ask(&mut self) -> Result<Vec<MixedSolution>> {
        sample_population(
            &self.gauss,
            &self.cat,
            &self.space,
            &self.table,
            self.hyper.lambda,
            &mut self.rng,
        )
    }

    /// One update from a full population and its fitness values (minimized).
    pub fn tell(&mut self, solutions: &[MixedSolution], fitness: &[f64]) -> Result<()> {
        let lambda = self.hyper.lambda;
        let mu = self.hyper.mu;
        let n_mi = self.space.n_mi();
        if solutions.len() != lambda {
            return Err(Error::DimensionMismatch {
                what: "population",
                expected: lambda,
                got: solutions.len(),
            });
        }
        if fitness.len() != lambda {
            return Err(Error::DimensionMismatch {
                what: "fitness values",
                expected: lambda,
                got: fitness.len(),
            });
        }
        for sol in solutions {
            if sol.v.len() != n_mi || sol.y.len() != n_mi {
                return Err(Error::DimensionMismatch {
                    what: "solution v/y",
                    expected: n_mi,
                    got: sol.v.len().min(sol.y.len()),
                });
            }
        }

        let order = rank(fitness);
        let mut ranked: Vec<MixedSolution> = order.iter().map(|&i| solutions[i].clone()).collect();

        let (_, mean_levels) = self.encoded_mean();
        let selected_z: Vec<&[f64]> = ranked[..mu].iter().map(|s| s.z.as_slice()).collect();
        let success = detect_successful_mutation(&selected_z, &mean_levels);
        if self.margin.is_some_and(|m| m.centering) {
            integer_centering(&mut ranked[..mu], &self.gauss, &self.space, &self.table);
        }

        if n_mi > 0 {
            let ranked_y: Vec<DVector<f64>> = ranked
                .iter()
                .map(|s| DVector::from_column_slice(&s.y))
                .collect();
            let eig = CovarianceEigen::new(&self.gauss.cov)?;
            self.gauss.update_mean(&self.hyper, &ranked_y);
            let h_sigma = self.gauss.update_paths(&self.hyper, &ranked_y, &eig);
            self.gauss
                .update_covariance(&self.hyper, &ranked_y, h_sigma, &eig)?;
            self.gauss.update_stepsize(&self.hyper);
        }

        let ranked_c: Vec<&[usize]> = ranked[..mu].iter().map(|s| s.c.as_slice()).collect();
        self.cat.update(&ranked_c, self.hyper.positive_weights())?;

        if n_mi > 0 {
            let min_eig = CovarianceEigen::new(&self.gauss.cov)?.min_eigenvalue();
            self.gauss.sigma = sigma_floor(self.gauss.sigma, min_eig, self.lambda_min);
        }
        if let Some(config) = &self.margin {
            apply_margin_correction(&mut self.gauss, &self.space, &self.table, &success, config);
        }
        self.gauss.generation += 1;
        self.evaluations += lambda;
        self.last_success = success;

        let best_index = order[0];
        let best_f = fitness[best_index];
        if !best_f.is_nan() && self.best.as_ref().is_none_or(|b| best_f < b.fitness) {
            self.best = Some(BestSolution {
                solution: solutions[best_index].clone(),
                fitness: best_f,
            });
            self.last_improvement = self.evaluations;
        }

        #[cfg(debug_assertions)]
        self.check_invariants()?;
        Ok(())
    }

    /// Samples, evaluates the first objective component and updates.
    pub fn step(&mut self, objective: &dyn Objective) -> Result<()> {
        let population = self.ask()?;
        let fitness: Vec<f64> = population
            .iter()
            .map(|s| objective.evaluate_solution(s)[0])
            .collect();
        self.tell(&population, &fitness)
    }

    pub fn should_stop(&self, budget: usize, target: Option<f64>) -> Option<StopReason> {
        if self.evaluations + self.hyper.lambda > budget {
            return Some(StopReason::Budget);
        }
        let best = self.best.as_ref().map(|b| b.fitness);
        if let (Some(best), Some(target)) = (best, target) {
            if best <= target {
                return Some(StopReason::Target);
            }
        }
        let collapsed =
            self.gauss.sigma < UNDERFLOW || (!self.cat.is_empty() && self.cat.delta < UNDERFLOW);
        let idle = self.evaluations - self.last_improvement;
        if collapsed && idle >= STAGNATION_GENERATIONS * self.hyper.lambda {
            return Some(StopReason::Stagnation);
        }
        None
    }

    /// Runs until `should_stop` fires.
    pub fn optimize(
        &mut self,
        objective: &dyn Objective,
        budget: usize,
        target: Option<f64>,
    ) -> Result<StopReason> {
        loop {
            if let Some(reason) = self.should_stop(budget, target) {
                return Ok(reason);
            }
            self.step(objective)?;
        }
    }

    /// Checks the invariants every component is expected to keep between
    /// iterations.
    pub fn check_invariants(&self) -> Result<()> {
        let g = &self.gauss;
        if !(g.sigma > 0.0) || !g.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size {} out of range",
                g.sigma
            )));
        }
        if let Some(j) = g
            .amplitude
            .iter()
            .position(|&a| !(a > 0.0) || !a.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "amplitude {} at {j} out of range",
                g.amplitude[j]
            )));
        }
        let asym = (&g.cov - g.cov.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "covariance asymmetry {asym:e}"
            )));
        }
        if let Some(config) = &self.margin {
            for (n, &p) in g.p_mut.iter().enumerate() {
                if !(p >= config.alpha - 1e-12 && p <= 1.0 + 1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "mutation rate {p} at {n} out of range"
                    )));
                }
            }
        }
        for (n, (block, &floor)) in self.cat.q.iter().zip(&self.cat.q_min).enumerate() {
            let total: f64 = block.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "categorical block {n} sums to {total}"
                )));
            }
            if let Some(k) = block.iter().position(|&p| p < floor - 1e-12) {
                return Err(Error::NonPositiveProbability {
                    block: n,
                    entry: k,
                    value: block[k],
                });
            }
        }
        if !(self.cat.delta > 0.0) || !(self.cat.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trust region delta {} gamma {}",
                self.cat.delta, self.cat.gamma
            )));
        }
        Ok(())
    }
}

/// Indices sorted by ascending fitness, NaN last, ties in index order.
pub fn rank(fitness: &[f64]) -> Vec<usize> {
    let key = |f: f64| if f.is_nan() { f64::INFINITY } else { f };
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| key(fitness[a]).total_cmp(&key(fitness[b])));
    order
}

fn check_simplex(q: &Blocks, counts: &[usize]) -> Result<()> {
    if q.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            what: "categorical blocks",
            expected: counts.len(),
            got: q.len(),
        });
    }
    for (n, (block, &k)) in q.iter().zip(counts).enumerate() {
        if block.len() != k {
            return Err(Error::DimensionMismatch {
                what: "categorical block size",
                expected: k,
                got: block.len(),
            });
        }
        if let Some(entry) = block.iter().position(|&p| !(p >= 0.0)) {
            return Err(Error::NonPositiveProbability {
                block: n,
                entry,
                value: block[entry],
            });
        }
        let total: f64 = block.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "initial probabilities of block {n} sum to {total}"
            )));
        }
    }
    Ok(())
}
