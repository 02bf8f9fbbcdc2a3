//! Categorical distribution updates: the estimated natural gradient, the
//! adaptive trust-region radius, the probability floor, and the step-size
//! floor applied to the Gaussian part.
//!
//! The Fisher metric uses the full (over-parameterized) categorical
//! parameterization, so it is block diagonal with `diag(1 / q_n)` blocks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::space::SearchSpace;

/// Default signal-to-noise threshold of the trust-region adaptation.
pub const DEFAULT_ALPHA_SNR: f64 = 1.5;

/// Default lower bound on the eigenvalues of `sigma^2 C`.
pub const DEFAULT_LAMBDA_MIN: f64 = 1e-30;

/// One probability vector per categorical variable.
pub type Blocks = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalState {
    pub q: Blocks,
    pub delta: f64,
    pub s: Blocks,
    pub gamma: f64,
    pub q_min: Vec<f64>,
    pub alpha_snr: f64,
}

impl CategoricalState {
    /// Uniform probabilities, `delta = 1`, `s = 0`, `gamma = 0`.
    pub fn uniform(category_counts: &[usize], q_min: Vec<f64>) -> Self {
        let q: Blocks = category_counts
            .iter()
            .map(|&k| vec![1.0 / k as f64; k])
            .collect();
        Self::from_probabilities(q, q_min)
    }

    pub fn from_probabilities(q: Blocks, q_min: Vec<f64>) -> Self {
        let s = q.iter().map(|b| vec![0.0; b.len()]).collect();
        CategoricalState {
            q,
            delta: 1.0,
            s,
            gamma: 0.0,
            q_min,
            alpha_snr: DEFAULT_ALPHA_SNR,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `delta / sum_n (K_n - 1)`.
    pub fn beta(&self) -> f64 {
        self.delta / self.degrees_of_freedom()
    }

    /// `sum_n (K_n - 1)`.
    pub fn degrees_of_freedom(&self) -> f64 {
        self.q.iter().map(|b| b.len() - 1).sum::<usize>() as f64
    }

    /// Draws one category index per variable.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.q
            .iter()
            .map(|block| sample_block(block, rng))
            .collect()
    }

    /// `q <- q + delta G / ||G||_F`. A zero gradient leaves `q` unchanged.
    pub fn update_q(&mut self, grad: &Blocks, fisher_norm: f64) {
        if !(fisher_norm > 0.0) {
            return;
        }
        let step = self.delta / fisher_norm;
        for (qb, gb) in self.q.iter_mut().zip(grad) {
            for (q, g) in qb.iter_mut().zip(gb) {
                *q += step * g;
            }
        }
    }

    /// Updates the accumulator `s`, its reference `gamma`, and the radius
    /// `delta`. `beta` is taken from the radius before this call.
    pub fn update_trust_region(&mut self, fisher_sqrt_grad: &Blocks, fisher_norm_sq: f64) {
        let beta = self.beta();
        let keep = 1.0 - beta;
        let gain = (beta * (2.0 - beta)).sqrt();
        for (sb, fb) in self.s.iter_mut().zip(fisher_sqrt_grad) {
            for (s, f) in sb.iter_mut().zip(fb) {
                *s = keep * *s + gain * f;
            }
        }
        self.gamma = keep * keep * self.gamma + beta * (2.0 - beta) * fisher_norm_sq;
        let s_norm_sq: f64 = self.s.iter().flatten().map(|v| v * v).sum();
        self.delta *= (beta * (s_norm_sq / self.alpha_snr - self.gamma)).exp();
        // keeps beta <= 1 so that sqrt(beta (2 - beta)) stays real
        self.delta = self.delta.min(self.degrees_of_freedom());
    }

    /// Full categorical step for one iteration, from the `mu` best category
    /// vectors (rank order) and the positive recombination weights. The
    /// probability floor is applied last.
    pub fn update(&mut self, ranked_c: &[&[usize]], weights: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let grad = natural_gradient(&self.q, ranked_c, weights);
        let norm_sq = fisher_norm_sq(&self.q, &grad)?;
        let fisher_grad = fisher_sqrt_mul(&self.q, &grad)?;
        self.update_q(&grad, norm_sq.sqrt());
        self.update_trust_region(&fisher_grad, norm_sq);
        self.apply_margin();
        Ok(())
    }

    pub fn apply_margin(&mut self) {
        for (qb, &floor) in self.q.iter_mut().zip(&self.q_min) {
            *qb = q_margin_correction(qb, floor);
        }
    }
}

fn sample_block<R: Rng + ?Sized>(block: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in block.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the cumulative total; fall back to the last
    // category carrying mass
    block
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(block.len() - 1)
}

/// `G = sum_i w_i (c_{i:lambda} - q)`, blockwise.
pub fn natural_gradient(q: &Blocks, ranked_c: &[&[usize]], weights: &[f64]) -> Blocks {
    let w_sum: f64 = weights.iter().take(ranked_c.len()).sum();
    q.iter()
        .enumerate()
        .map(|(n, qb)| {
            let mut g: Vec<f64> = qb.iter().map(|&p| -w_sum * p).collect();
            for (c, &w) in ranked_c.iter().zip(weights) {
                g[c[n]] += w;
            }
            g
        })
        .collect()
}

fn check_positive(q: &Blocks) -> Result<()> {
    for (block, qb) in q.iter().enumerate() {
        for (entry, &value) in qb.iter().enumerate() {
            if !(value > 0.0) {
                return Err(Error::NonPositiveProbability {
                    block,
                    entry,
                    value,
                });
            }
        }
    }
    Ok(())
}

/// `||G||^2_{F(q)} = sum G^2 / q`.
pub fn fisher_norm_sq(q: &Blocks, grad: &Blocks) -> Result<f64> {
    check_positive(q)?;
    Ok(q.iter()
        .zip(grad)
        .flat_map(|(qb, gb)| qb.iter().zip(gb).map(|(p, g)| g * g / p))
        .sum())
}

/// `F(q)^{1/2} G = G / sqrt(q)`, elementwise.
pub fn fisher_sqrt_mul(q: &Blocks, grad: &Blocks) -> Result<Blocks> {
    check_positive(q)?;
    Ok(q.iter()
        .zip(grad)
        .map(|(qb, gb)| qb.iter().zip(gb).map(|(p, g)| g / p.sqrt()).collect())
        .collect())
}

/// `max(sigma, sqrt(lambda_min / min eig(C)))`.
pub fn sigma_floor(sigma: f64, min_eigenvalue: f64, lambda_min: f64) -> f64 {
    sigma.max((lambda_min / min_eigenvalue).sqrt())
}

/// Lifts every entry to at least `q_min` and rescales the excess mass so the
/// block sums to one again.
pub fn q_margin_correction(q: &[f64], q_min: f64) -> Vec<f64> {
    let clipped: Vec<f64> = q.iter().map(|&p| p.max(q_min)).collect();
    let total: f64 = clipped.iter().sum();
    let excess: f64 = clipped.iter().map(|&p| p - q_min).sum();
    if !(excess > 0.0) {
        return vec![1.0 / q.len() as f64; q.len()];
    }
    let scale = (1.0 - total) / excess;
    clipped.iter().map(|&p| p + scale * (p - q_min)).collect()
}

/// `q_min_n = (1 - 0.73^{1/(N_in + N_ca)}) / (K_n - 1)`.
pub fn default_q_min(space: &SearchSpace) -> Vec<f64> {
    let discrete = space.n_in() + space.n_ca();
    if discrete == 0 {
        return Vec::new();
    }
    let budget = 1.0 - 0.73f64.powf(1.0 / discrete as f64);
    space
        .category_counts()
        .iter()
        .map(|&k| budget / (k as f64 - 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_when_all_winners_agree() {
        let q = vec![vec![0.2, 0.3, 0.5]];
        let c = [1usize];
        let ranked: Vec<&[usize]> = vec![&c, &c, &c];
        let g = natural_gradient(&q, &ranked, &[0.5, 0.3, 0.2]);
        let expected = [-0.2, 0.7, -0.5];
        for (a, b) in g[0].iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn gradient_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = [3usize, 5, 2];
        let state = CategoricalState::uniform(&counts, vec![0.01; 3]);
        let samples: Vec<Vec<usize>> = (0..6).map(|_| state.sample(&mut rng)).collect();
        let ranked: Vec<&[usize]> = samples.iter().map(|s| s.as_slice()).collect();
        let w = [0.4, 0.25, 0.15, 0.1, 0.06, 0.04];
        let g = natural_gradient(&state.q, &ranked, &w);
        for n in 0..3 {
            for k in 0..counts[n] {
                let mut direct = 0.0;
                for i in 0..6 {
                    let onehot = if samples[i][n] == k { 1.0 } else { 0.0 };
                    direct += w[i] * (onehot - state.q[n][k]);
                }
                assert_relative_eq!(g[n][k], direct, epsilon = 1e-15);
            }
            assert!(g[n].iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn fisher_norm_examples() {
        let q = vec![vec![0.5, 0.5]];
        assert_eq!(fisher_norm_sq(&q, &vec![vec![0.0, 0.0]]).unwrap(), 0.0);
        let g = vec![vec![0.1, -0.1]];
        assert_relative_eq!(fisher_norm_sq(&q, &g).unwrap(), 0.04, epsilon = 1e-15);
        let fg = fisher_sqrt_mul(&q, &g).unwrap();
        let n2: f64 = fg.iter().flatten().map(|v| v * v).sum();
        assert_relative_eq!(n2, 0.04, epsilon = 1e-15);
        assert!(fisher_norm_sq(&vec![vec![1.0, 0.0]], &g).is_err());
    }

    #[test]
    fn update_q_skip_and_unit_radius() {
        let mut s = CategoricalState::uniform(&[2], vec![0.1]);
        s.update_q(&vec![vec![0.0, 0.0]], 0.0);
        assert_eq!(s.q, vec![vec![0.5, 0.5]]);
        let g = vec![vec![0.1, -0.1]];
        let norm = fisher_norm_sq(&s.q, &g).unwrap().sqrt();
        s.delta = norm;
        s.update_q(&g, norm);
        assert_relative_eq!(s.q[0][0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(s.q[0][1], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn trust_region_full_replacement_when_beta_is_one() {
        // beta = delta / (K - 1) = 1 with K = 2, delta = 1
        let mut s = CategoricalState::uniform(&[2], vec![0.1]);
        s.s = vec![vec![3.0, -3.0]];
        s.gamma = 7.0;
        let fg = vec![vec![0.2, -0.2]];
        s.update_trust_region(&fg, 0.08);
        assert_eq!(s.s, fg);
        assert_relative_eq!(s.gamma, 0.08, epsilon = 1e-15);
        assert_relative_eq!(s.delta, (0.08f64 / 1.5 - 0.08).exp(), epsilon = 1e-15);
    }

    #[test]
    fn trust_region_matches_formula() {
        let mut s = CategoricalState::uniform(&[3, 4], vec![0.01, 0.01]);
        s.delta = 0.7;
        s.s = vec![vec![0.1, -0.2, 0.1], vec![0.3, 0.0, -0.1, -0.2]];
        s.gamma = 0.4;
        let fg = vec![vec![0.05, 0.1, -0.15], vec![-0.2, 0.1, 0.05, 0.05]];
        let norm_sq = 0.123;
        let beta = 0.7 / 5.0;
        let s_expected: Vec<Vec<f64>> =
            s.s.iter()
                .zip(&fg)
                .map(|(a, b)| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (1.0 - beta) * x + (beta * (2.0 - beta)).sqrt() * y)
                        .collect()
                })
                .collect();
        let gamma = (1.0 - beta) * (1.0 - beta) * 0.4 + beta * (2.0 - beta) * norm_sq;
        let sn: f64 = s_expected.iter().flatten().map(|v| v * v).sum();
        let delta = 0.7 * (beta * (sn / 1.5 - gamma)).exp();
        s.update_trust_region(&fg, norm_sq);
        assert_relative_eq!(s.gamma, gamma, epsilon = 1e-15);
        assert_relative_eq!(s.delta, delta, epsilon = 1e-15);
        for (a, b) in s.s.iter().flatten().zip(s_expected.iter().flatten()) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_gradient_decays_accumulator() {
        let mut s = CategoricalState::uniform(&[3], vec![0.05]);
        s.s = vec![vec![0.5, -0.25, -0.25]];
        s.gamma = 1.0;
        let zero = vec![vec![0.0; 3]];
        let mut last_norm = f64::INFINITY;
        let delta0 = s.delta;
        for _ in 0..50 {
            s.update_trust_region(&zero, 0.0);
            let n: f64 = s.s[0].iter().map(|v| v * v).sum();
            assert!(n < last_norm);
            last_norm = n;
        }
        assert!(s.delta < delta0);
    }

    #[test]
    fn snr_drives_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let counts = [5usize; 4];
        // pure noise: winners drawn from q itself
        let mut noise = CategoricalState::uniform(&counts, vec![0.0; 4]);
        let w = [0.5, 0.3, 0.2];
        let mut deltas = Vec::new();
        for _ in 0..1000 {
            let draws: Vec<Vec<usize>> = (0..3).map(|_| noise.sample(&mut rng)).collect();
            let ranked: Vec<&[usize]> = draws.iter().map(|d| d.as_slice()).collect();
            let g = natural_gradient(&noise.q, &ranked, &w);
            let fg = fisher_sqrt_mul(&noise.q, &g).unwrap();
            noise.update_trust_region(&fg, fisher_norm_sq(&noise.q, &g).unwrap());
            deltas.push(noise.delta);
        }
        deltas.sort_by(f64::total_cmp);
        assert!(deltas[500] < 1.0, "median delta {}", deltas[500]);

        // persistent direction
        let mut signal = CategoricalState::uniform(&counts, vec![0.0; 4]);
        let c = vec![0usize; 4];
        let ranked: Vec<&[usize]> = vec![&c, &c, &c];
        let g = natural_gradient(&signal.q, &ranked, &w);
        let fg = fisher_sqrt_mul(&signal.q, &g).unwrap();
        let n2 = fisher_norm_sq(&signal.q, &g).unwrap();
        for _ in 0..20 {
            signal.update_trust_region(&fg, n2);
        }
        assert!(signal.delta > 1.0, "delta {}", signal.delta);
        for _ in 0..1000 {
            signal.update_trust_region(&fg, n2);
            assert!(signal.beta() <= 1.0 && signal.delta.is_finite());
        }
    }

    #[test]
    fn sigma_floor_examples() {
        assert_relative_eq!(sigma_floor(0.0, 1.0, 1e-30), 1e-15, max_relative = 1e-12);
        assert_eq!(sigma_floor(0.5, 1.0, 1e-30), 0.5);
        assert_relative_eq!(
            sigma_floor(0.0, 1.0, 1e-30),
            DEFAULT_LAMBDA_MIN.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn margin_examples() {
        let q = q_margin_correction(&[0.95, 0.03, 0.02], 0.1);
        for (a, b) in q.iter().zip([0.8, 0.1, 0.1]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        let q = q_margin_correction(&[1.0, 0.0], 0.2);
        assert_relative_eq!(q[0], 0.8, epsilon = 1e-15);
        assert_relative_eq!(q[1], 0.2, epsilon = 1e-15);
        let q = q_margin_correction(&[0.5, 0.3, 0.2], 0.1);
        assert_eq!(q, vec![0.5, 0.3, 0.2]);
        // everything at the floor
        let q = q_margin_correction(&[0.0, 0.0], 0.5);
        assert_eq!(q, vec![0.5, 0.5]);
    }

    #[test]
    fn q_min_examples() {
        let s = SearchSpace::uniform(0, 0, 0, 0, 1, 5).unwrap();
        assert_relative_eq!(default_q_min(&s)[0], 0.0675, epsilon = 1e-15);
        let s = SearchSpace::uniform(0, 3, -3, 3, 3, 5).unwrap();
        assert_relative_eq!(
            default_q_min(&s)[0],
            0.25 * (1.0 - 0.73f64.powf(1.0 / 6.0)),
            epsilon = 1e-15
        );
        assert!((default_q_min(&s)[0] - 0.012775).abs() < 1e-6);
        let s = SearchSpace::uniform(0, 0, 0, 0, 1, 2).unwrap();
        assert_relative_eq!(default_q_min(&s)[0], 0.27, epsilon = 1e-15);
    }

    #[test]
    fn deterministic_marginal_always_samples_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = CategoricalState::from_probabilities(vec![vec![1.0, 0.0, 0.0]], vec![0.0]);
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut rng), vec![0]);
        }
    }

    proptest! {
        #[test]
        fn margin_lands_on_floored_simplex(raw in prop::collection::vec(0.0f64..1.0, 2..8), frac in 0.0f64..0.99) {
            let k = raw.len();
            let q_min = frac / k as f64;
            // arbitrary point near the simplex, as produced by a natural-gradient step
            let total: f64 = raw.iter().sum::<f64>() + 1e-9;
            let q: Vec<f64> = raw.iter().map(|v| v / total * 1.1 - 0.05).collect();
            let out = q_margin_correction(&q, q_min);
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for p in &out {
                prop_assert!(*p >= q_min - 1e-15);
            }
        }
    }
}
