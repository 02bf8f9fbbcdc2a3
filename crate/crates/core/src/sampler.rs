//! Gaussian sampling, the discretizing encoder, and threshold geometry of the
//! integer coordinates.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::categorical::CategoricalState;
use crate::cma::{CovarianceEigen, GaussianState};
use crate::error::Result;
use crate::space::{MixedSolution, SearchSpace};

/// Midpoints between consecutive levels of every integer domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    thresholds: Vec<Vec<f64>>,
}

impl ThresholdTable {
    pub fn new(space: &SearchSpace) -> Self {
        let thresholds = space
            .integer_domains()
            .iter()
            .map(|levels| levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
            .collect();
        ThresholdTable { thresholds }
    }

    pub fn dim(&self, n: usize) -> &[f64] {
        &self.thresholds[n]
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// Index of the level a coordinate encodes to. Values on a threshold go to
/// the lower level.
pub fn level_index(thresholds: &[f64], v: f64) -> usize {
    thresholds.partition_point(|&t| t < v)
}

/// Splits a combined coordinate vector into continuous values (copied) and
/// integer levels.
pub fn enc(v: &[f64], space: &SearchSpace, table: &ThresholdTable) -> (Vec<f64>, Vec<f64>) {
    let x = space.j_co().iter().map(|&j| v[j]).collect();
    let z = space
        .j_in()
        .iter()
        .zip(space.integer_domains())
        .enumerate()
        .map(|(n, (&j, levels))| levels[level_index(table.dim(n), v[j])])
        .collect();
    (x, z)
}

/// Which side of the domain an edge level sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lowest,
    Highest,
}

/// The thresholds relevant to the margin correction of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nearest {
    /// The coordinate encodes to the first or last level; only one threshold
    /// borders its plateau.
    Edge { edge: Edge, threshold: f64 },
    /// Largest threshold strictly below and smallest threshold at or above
    /// the coordinate.
    Interior { low: f64, up: f64 },
}

pub fn nearest_thresholds(m_coord: f64, thresholds: &[f64]) -> Nearest {
    let idx = level_index(thresholds, m_coord);
    if idx == 0 {
        Nearest::Edge {
            edge: Edge::Lowest,
            threshold: thresholds[0],
        }
    } else if idx == thresholds.len() {
        Nearest::Edge {
            edge: Edge::Highest,
            threshold: thresholds[idx - 1],
        }
    } else {
        Nearest::Interior {
            low: thresholds[idx - 1],
            up: thresholds[idx],
        }
    }
}

/// Draws `lambda` candidates: `y = C^{1/2} xi`, `v = m + sigma A y`,
/// `(x, z) = Enc(v)`, and categories from `q`.
pub fn sample_population<R: Rng + ?Sized>(
    gauss: &GaussianState,
    cat: &CategoricalState,
    space: &SearchSpace,
    table: &ThresholdTable,
    lambda: usize,
    rng: &mut R,
) -> Result<Vec<MixedSolution>> {
    let eig = CovarianceEigen::new(&gauss.cov)?;
    let n = gauss.dim();
    let scale = &gauss.amplitude * gauss.sigma;
    let population = (0..lambda)
        .map(|_| {
            let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let c = cat.sample(rng);
            let y = eig.sqrt_mul(&xi);
            let v = &gauss.mean + y.component_mul(&scale);
            let (x, z) = enc(v.as_slice(), space, table);
            MixedSolution {
                x,
                z,
                c,
                v: v.as_slice().to_vec(),
                y: y.as_slice().to_vec(),
            }
        })
        .collect();
    Ok(population)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space_with(levels: Vec<f64>) -> SearchSpace {
        SearchSpace::new(1, vec![levels], vec![]).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let t = ThresholdTable::new(&space_with(vec![-1.0, 0.0, 1.0]));
        assert_eq!(t.dim(0), &[-0.5, 0.5]);
        let t = ThresholdTable::new(&space_with(vec![0.01, 0.1, 1.0]));
        assert!((t.dim(0)[0] - 0.055).abs() < 1e-15 && (t.dim(0)[1] - 0.55).abs() < 1e-15);
        let t = ThresholdTable::new(&SearchSpace::uniform(0, 1, -3, 3, 0, 2).unwrap());
        assert_eq!(t.dim(0), &[-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn enc_examples() {
        let s = space_with(vec![-1.0, 0.0, 1.0]);
        let t = ThresholdTable::new(&s);
        assert_eq!(enc(&[7.5, 0.3], &s, &t), (vec![7.5], vec![0.0]));
        assert_eq!(enc(&[7.5, -0.5], &s, &t), (vec![7.5], vec![-1.0]));
        assert_eq!(enc(&[7.5, 0.5], &s, &t), (vec![7.5], vec![0.0]));
        assert_eq!(enc(&[7.5, 9.0], &s, &t), (vec![7.5], vec![1.0]));
        let s = space_with(vec![0.01, 0.1, 1.0]);
        let t = ThresholdTable::new(&s);
        assert_eq!(enc(&[0.0, 0.6], &s, &t).1, vec![1.0]);
    }

    #[test]
    fn enc_respects_custom_layout() {
        let s = SearchSpace::with_layout(vec![1], vec![0], vec![vec![0.0, 1.0]], vec![]).unwrap();
        let t = ThresholdTable::new(&s);
        assert_eq!(enc(&[0.9, -4.0], &s, &t), (vec![-4.0], vec![1.0]));
    }

    #[test]
    fn nearest_examples() {
        let th = [-0.5, 0.5];
        assert_eq!(
            nearest_thresholds(-3.0, &th),
            Nearest::Edge {
                edge: Edge::Lowest,
                threshold: -0.5
            }
        );
        assert_eq!(
            nearest_thresholds(0.2, &th),
            Nearest::Interior { low: -0.5, up: 0.5 }
        );
        assert_eq!(
            nearest_thresholds(0.5, &th),
            Nearest::Interior { low: -0.5, up: 0.5 }
        );
        assert_eq!(
            nearest_thresholds(0.51, &th),
            Nearest::Edge {
                edge: Edge::Highest,
                threshold: 0.5
            }
        );
        // two levels: always an edge
        assert!(matches!(
            nearest_thresholds(0.49, &[0.5]),
            Nearest::Edge {
                edge: Edge::Lowest,
                ..
            }
        ));
        assert!(matches!(
            nearest_thresholds(0.51, &[0.5]),
            Nearest::Edge {
                edge: Edge::Highest,
                ..
            }
        ));
    }

    fn gaussian(n: usize, n_in: usize, mean: Vec<f64>, sigma: f64) -> GaussianState {
        GaussianState::new(
            DVector::from_vec(mean),
            sigma,
            DMatrix::identity(n, n),
            n_in,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_distribution_samples_the_mean() {
        let s = SearchSpace::new(1, vec![vec![-1.0, 0.0, 1.0]], vec![2]).unwrap();
        let t = ThresholdTable::new(&s);
        let g = gaussian(2, 1, vec![0.25, 0.8], 1e-300);
        let cat = CategoricalState::from_probabilities(vec![vec![1.0, 0.0]], vec![0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for sol in sample_population(&g, &cat, &s, &t, 20, &mut rng).unwrap() {
            assert_eq!(sol.v, vec![0.25, 0.8]);
            assert_eq!(sol.z, vec![1.0]);
            assert_eq!(sol.c, vec![0]);
        }
    }

    #[test]
    fn sample_mean_converges_to_m() {
        let s = SearchSpace::new(3, vec![], vec![]).unwrap();
        let t = ThresholdTable::new(&s);
        let mut g = gaussian(3, 0, vec![1.0, -2.0, 0.5], 0.7);
        g.amplitude = DVector::from_vec(vec![1.0, 2.0, 0.5]);
        g.cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 1.5]);
        let cat = CategoricalState::uniform(&[], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n_samples = 100_000;
        let pop = sample_population(&g, &cat, &s, &t, n_samples, &mut rng).unwrap();
        for j in 0..3 {
            let mean = pop.iter().map(|p| p.v[j]).sum::<f64>() / n_samples as f64;
            let sd = g.coordinate_std(j);
            let se = sd / (n_samples as f64).sqrt();
            assert!(
                (mean - g.mean[j]).abs() < 4.0 * se,
                "coord {j}: {mean} vs {}",
                g.mean[j]
            );
        }
        // v and y stay linked
        for p in pop.iter().take(100) {
            for j in 0..3 {
                let back = g.mean[j] + g.sigma * g.amplitude[j] * p.y[j];
                assert!((back - p.v[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn category_frequencies_match_q() {
        // chi-squared goodness of fit at 1e5 samples
        let q = vec![0.1, 0.2, 0.3, 0.4];
        let cat = CategoricalState::from_probabilities(vec![q.clone()], vec![0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[cat.sample(&mut rng)[0]] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&q)
            .map(|(&o, &p)| {
                let e = p * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 3 degrees of freedom, p = 0.001 critical value
        assert!(chi2 < 16.266, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_rejects_indefinite_covariance() {
        let s = SearchSpace::new(2, vec![], vec![]).unwrap();
        let t = ThresholdTable::new(&s);
        let mut g = gaussian(2, 0, vec![0.0, 0.0], 1.0);
        g.cov[(1, 1)] = -1.0;
        let cat = CategoricalState::uniform(&[], vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_population(&g, &cat, &s, &t, 3, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn enc_is_idempotent_and_lands_on_levels(
            raw in prop::collection::vec(-20.0f64..20.0, 3),
            gaps in prop::collection::vec(0.01f64..3.0, 1..6),
        ) {
            let mut levels = vec![-4.0];
            for g in &gaps {
                let last = *levels.last().unwrap();
                levels.push(last + g);
            }
            let s = SearchSpace::new(1, vec![levels.clone(), levels.clone()], vec![]).unwrap();
            let t = ThresholdTable::new(&s);
            let (x, z) = enc(&raw, &s, &t);
            for zn in &z {
                prop_assert!(levels.contains(zn));
            }
            let embedded = vec![x[0], z[0], z[1]];
            prop_assert_eq!(enc(&embedded, &s, &t), (x, z));
        }
    }
}
