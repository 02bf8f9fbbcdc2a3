//! Bi-objective optimization with a set of CatCMAwM kernels, each
//! maximizing the uncrowded hypervolume improvement of its samples with
//! respect to the incumbents of all other kernels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::archive::ParetoArchive;
use super::indicators::{uhvi, Point};
use crate::error::{Error, Result};
use crate::optimizer::{CatCmaWm, Settings};
use crate::space::{MixedSolution, Objective};

/// Clamps `v` into the box and returns the quadratic penalty
/// `xi sum_k ((v_k - clamp_k) / (hi_k - lo_k))^2`.
pub fn box_transform(v: &[f64], bounds: &[(f64, f64)], xi: f64) -> (Vec<f64>, f64) {
    let mut penalty = 0.0;
    let clamped = v
        .iter()
        .zip(bounds)
        .map(|(&x, &(lo, hi))| {
            let c = x.clamp(lo, hi);
            penalty += ((x - c) / (hi - lo)).powi(2);
            c
        })
        .collect();
    (clamped, xi * penalty)
}

/// Incumbent of a kernel: `Enc(m)` for the continuous and integer parts and
/// a most probable category per variable, ties broken uniformly.
pub fn incumbent<R: Rng + ?Sized>(kernel: &CatCmaWm, rng: &mut R) -> MixedSolution {
    let (x, z) = kernel.encoded_mean();
    let c = kernel
        .cat
        .q
        .iter()
        .map(|block| {
            let top = block.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = (0..block.len()).filter(|&k| block[k] == top).collect();
            ties[rng.random_range(0..ties.len())]
        })
        .collect();
    MixedSolution {
        x,
        z,
        c,
        v: kernel.gauss.mean.as_slice().to_vec(),
        y: vec![0.0; kernel.gauss.dim()],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComoSettings {
    pub kernels: usize,
    pub reference: Point,
    /// Weight of the box-constraint penalty.
    pub penalty: f64,
    /// Per-kernel settings; `seed` is replaced by one drawn from the master
    /// seed for every kernel.
    pub kernel: Settings,
    pub seed: u64,
}

impl Default for ComoSettings {
    fn default() -> Self {
        ComoSettings {
            kernels: 10,
            reference: [5.0, 5.0],
            penalty: 1.0,
            kernel: Settings {
                sigma0: 4.0,
                init_box: (-5.0, 15.0),
                ..Settings::default()
            },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub optimizer: CatCmaWm,
    pub incumbent: MixedSolution,
    /// Objective vector of the current incumbent.
    pub value: Point,
}

/// Evaluation of one candidate: the raw objective vector of the repaired
/// solution, and the same vector with the box penalty added.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub raw: Point,
    pub penalized: Point,
}

pub struct ComoCatCmaWm<'a> {
    objective: &'a dyn Objective,
    kernels: Vec<Kernel>,
    archive: ParetoArchive,
    penalty: f64,
    rng: ChaCha8Rng,
    evaluations: usize,
    steps: usize,
}

impl<'a> ComoCatCmaWm<'a> {
    /// Creates the kernels and evaluates their initial incumbents.
    pub fn new(objective: &'a dyn Objective, settings: &ComoSettings) -> Result<Self> {
        if objective.arity() != 2 {
            return Err(Error::InvalidParameter(format!(
                "hypervolume is implemented for two objectives, got {}",
                objective.arity()
            )));
        }
        if settings.kernels == 0 {
            return Err(Error::InvalidParameter(
                "at least one kernel is required".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut como = ComoCatCmaWm {
            objective,
            kernels: Vec::with_capacity(settings.kernels),
            archive: ParetoArchive::new(settings.reference),
            penalty: settings.penalty,
            rng: ChaCha8Rng::seed_from_u64(0),
            evaluations: 0,
            steps: 0,
        };
        for _ in 0..settings.kernels {
            let kernel_settings = Settings {
                seed: rng.random(),
                ..settings.kernel.clone()
            };
            let mut optimizer = CatCmaWm::new(objective.space().clone(), &kernel_settings)?;
            let inc = incumbent(&optimizer, &mut rng);
            let evaluated = como.evaluate(&inc);
            optimizer.add_evaluations(1);
            como.evaluations += 1;
            como.archive.insert(evaluated.raw);
            como.kernels.push(Kernel {
                optimizer,
                value: evaluated.raw,
                incumbent: inc,
            });
        }
        como.rng = rng;
        Ok(como)
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Evaluations consumed by one call to `step`.
    pub fn evaluations_per_step(&self) -> usize {
        self.kernels.iter().map(|k| k.optimizer.lambda() + 1).sum()
    }

    /// Evaluates a solution on its repaired continuous part.
    pub fn evaluate(&self, s: &MixedSolution) -> Evaluated {
        let (x, penalty) = match self.objective.space().continuous_bounds() {
            Some(bounds) => box_transform(&s.x, bounds, self.penalty),
            None => (s.x.clone(), 0.0),
        };
        let f = self.objective.evaluate(&x, &s.z, &s.c);
        let raw = [f[0], f[1]];
        Evaluated {
            raw,
            penalized: [raw[0] + penalty, raw[1] + penalty],
        }
    }

    /// One sweep over all kernels in random order.
    pub fn step(&mut self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.kernels.len()).collect();
        order.shuffle(&mut self.rng);
        let reference = *self.archive.reference();
        for i in order {
            let others: Vec<Point> = self
                .kernels
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, k)| k.value)
                .collect();
            let population = self.kernels[i].optimizer.ask()?;
            let evaluated: Vec<Evaluated> = population.iter().map(|s| self.evaluate(s)).collect();
            let fitness: Vec<f64> = evaluated
                .iter()
                .map(|e| -uhvi(&e.penalized, &others, &reference))
                .collect();
            self.kernels[i].optimizer.tell(&population, &fitness)?;

            let inc = incumbent(&self.kernels[i].optimizer, &mut self.rng);
            let inc_eval = self.evaluate(&inc);
            let kernel = &mut self.kernels[i];
            kernel.optimizer.add_evaluations(1);
            kernel.incumbent = inc;
            kernel.value = inc_eval.raw;

            self.evaluations += population.len() + 1;
            for e in &evaluated {
                self.archive.insert(e.raw);
            }
            self.archive.insert(inc_eval.raw);
        }
        self.steps += 1;
        Ok(())
    }

    /// Steps while a whole sweep still fits into `budget` evaluations.
    pub fn run(&mut self, budget: usize, mut on_step: impl FnMut(&Self)) -> Result<()> {
        while self.evaluations + self.evaluations_per_step() <= budget {
            self.step()?;
            on_step(self);
        }
        Ok(())
    }
}
