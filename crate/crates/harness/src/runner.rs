//! Seeded multi-trial runs.

use std::time::Instant;

use mvbbo_core::{make_bi, make_single, CatCmaWm, ComoCatCmaWm};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// What the per-iteration value column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    BestFitness,
    Hypervolume,
}

impl Measure {
    pub fn column(self) -> &'static str {
        match self {
            Measure::BestFitness => "best_fitness",
            Measure::Hypervolume => "hypervolume",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        match name {
            "best_fitness" => Some(Measure::BestFitness),
            "hypervolume" => Some(Measure::Hypervolume),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub trial: usize,
    pub iteration: usize,
    pub evaluations: usize,
    pub value: f64,
    /// Mutation rate of every integer variable after the iteration (the
    /// kernel average for bi-objective runs).
    pub p_mut: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTiming {
    pub trial: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    /// Time spent inside the optimizer, excluding the hypervolume of the
    /// external archive.
    pub optimizer_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecords {
    pub measure: Measure,
    pub n_in: usize,
    pub rows: Vec<IterationRecord>,
    pub timing: Vec<TrialTiming>,
}

impl ExperimentRecords {
    /// Rows of one trial, in iteration order.
    pub fn trial(&self, index: usize) -> impl Iterator<Item = &IterationRecord> {
        self.rows.iter().filter(move |r| r.trial == index)
    }
}

struct TrialOutput {
    rows: Vec<IterationRecord>,
    timing: TrialTiming,
}

/// Worker count from `MVBBO_THREADS`, or rayon's default when unset.
pub fn worker_count() -> Option<usize> {
    std::env::var("MVBBO_THREADS")
        .ok()?
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecords> {
    run_experiment_with(config, worker_count())
}

/// Runs every trial on a pool of `threads` workers (rayon's default when
/// `None`). Records are ordered by trial whatever the completion order.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentRecords> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let outputs: Vec<TrialOutput> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial(config, i))
            .collect::<Result<_>>()
    })?;

    let measure = if config.variant.is_multi_objective() {
        Measure::Hypervolume
    } else {
        Measure::BestFitness
    };
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        timing.push(out.timing);
    }
    Ok(ExperimentRecords {
        measure,
        n_in: config.dims[1],
        rows,
        timing,
    })
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialOutput> {
    let spec = config.benchmark_spec()?;
    let start = Instant::now();
    let mut optimizer_seconds = 0.0;
    let mut rows = Vec::new();

    if config.variant.is_multi_objective() {
        let objective =
            make_bi(&config.benchmark, &spec).map_err(|e| HarnessError::Config(e.to_string()))?;
        let settings = config.como_settings(trial);
        let t = Instant::now();
        let mut como = ComoCatCmaWm::new(objective.as_ref(), &settings)?;
        optimizer_seconds += t.elapsed().as_secs_f64();
        while como.evaluations() + como.evaluations_per_step() <= config.budget {
            let t = Instant::now();
            como.step()?;
            optimizer_seconds += t.elapsed().as_secs_f64();
            let n_in = config.dims[1];
            let p = como.kernels().len() as f64;
            let p_mut = (0..n_in)
                .map(|n| {
                    como.kernels()
                        .iter()
                        .map(|k| k.optimizer.gauss.p_mut[n])
                        .sum::<f64>()
                        / p
                })
                .collect();
            rows.push(IterationRecord {
                trial,
                iteration: como.steps(),
                evaluations: como.evaluations(),
                value: como.archive().hypervolume(),
                p_mut,
            });
        }
    } else {
        let objective = make_single(&config.benchmark, &spec)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let settings = config.settings(trial);
        let t = Instant::now();
        let mut opt = CatCmaWm::new(spec.space.clone(), &settings)?;
        optimizer_seconds += t.elapsed().as_secs_f64();
        let mut iteration = 0;
        while opt.evaluations() + opt.lambda() <= config.budget {
            let t = Instant::now();
            opt.step(objective.as_ref())?;
            optimizer_seconds += t.elapsed().as_secs_f64();
            iteration += 1;
            rows.push(IterationRecord {
                trial,
                iteration,
                evaluations: opt.evaluations(),
                value: opt.best().map_or(f64::INFINITY, |b| b.fitness),
                p_mut: opt.gauss.p_mut.clone(),
            });
        }
    }

    Ok(TrialOutput {
        rows,
        timing: TrialTiming {
            trial,
            seed: config.trial_seed(trial),
            wall_seconds: start.elapsed().as_secs_f64(),
            optimizer_seconds,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn single_objective_budget_is_consumed() {
        let c = config(
            r#"{"benchmark": "SphereIntCOM", "variant": "catcmawm", "dims": [2, 2, 2], "budget": 500, "trials": 2, "seed": 4}"#,
        );
        let rec = run_experiment_with(&c, Some(1)).unwrap();
        assert_eq!(rec.measure, Measure::BestFitness);
        for t in 0..2 {
            let last = rec.trial(t).last().unwrap();
            assert!(last.evaluations <= 500 && last.evaluations > 500 - 10);
            assert_eq!(last.p_mut.len(), 2);
            let values: Vec<f64> = rec.trial(t).map(|r| r.value).collect();
            assert!(values.windows(2).all(|w| w[1] <= w[0]));
        }
        assert_eq!(
            rec.timing.iter().map(|t| t.seed).collect::<Vec<_>>(),
            vec![4, 5]
        );
    }

    #[test]
    fn multi_objective_steps_cost_p_lambda_plus_one() {
        let c = config(
            r#"{"benchmark": "DSIntLFTL", "variant": "como-catcmawm", "dims": [1, 1, 1], "budget": 300,
                "trials": 1, "kernels": 3, "reference": [5.0, 5.0]}"#,
        );
        let rec = run_experiment_with(&c, Some(1)).unwrap();
        assert_eq!(rec.measure, Measure::Hypervolume);
        let evals: Vec<usize> = rec.rows.iter().map(|r| r.evaluations).collect();
        // lambda = 4 + floor(3 ln 3) = 7
        assert_eq!(evals[0], 3 + 3 * 8);
        assert!(evals.windows(2).all(|w| w[1] - w[0] == 24));
        assert!(rec.rows.windows(2).all(|w| w[1].value >= w[0].value));
    }

    #[test]
    fn trials_are_independent_of_worker_count() {
        let c = config(
            r#"{"benchmark": "MVProximity", "variant": "catcmawm-no-centering", "dims": [2, 2, 2], "budget": 300, "trials": 4}"#,
        );
        let a = run_experiment_with(&c, Some(1)).unwrap();
        let b = run_experiment_with(&c, Some(3)).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.iter().map(|r| r.trial).max(), Some(3));
    }
}
