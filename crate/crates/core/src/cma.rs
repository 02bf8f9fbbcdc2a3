//! CMA-ES updates for the Gaussian part of the joint distribution.
//!
//! The search distribution is `N(m, sigma^2 A C A)` with a diagonal
//! amplitude matrix `A` that the integer margin correction adjusts. The
//! updates here are the usual CMA-ES ones (weighted recombination,
//! cumulative step-size adaptation, rank-one plus rank-mu covariance update
//! with active negative weights); `A` enters only through the mean update.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative size below which a negative eigenvalue counts as rounding noise.
pub const ROUNDING_TOLERANCE: f64 = 1e-8;

/// Largest condition number kept by the covariance update.
pub const MAX_CONDITION: f64 = 1e14;

/// Floor applied to eigenvalues before taking square roots.
pub const EIGEN_FLOOR: f64 = 1e-30;

/// `E||N(0, I_n)||`, approximated by `sqrt(n) (1 - 1/(4n) + 1/(21 n^2))`.
pub fn expected_norm(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}

/// `4 + floor(3 ln n_total)`.
pub fn default_population_size(n_total: usize) -> usize {
    4 + (3.0 * (n_total.max(1) as f64).ln()).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaHyperparameters {
    pub lambda: usize,
    pub mu: usize,
    /// All `lambda` recombination weights; the first `mu` are positive and
    /// sum to one, the rest are non-positive.
    pub weights: Vec<f64>,
    pub c_m: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub mu_eff: f64,
}

impl CmaHyperparameters {
    /// Standard CMA-ES defaults for an `n_mi`-dimensional Gaussian, with the
    /// population size derived from the total number of variables.
    pub fn new(n_mi: usize, n_total: usize) -> Self {
        Self::with_population(n_mi, default_population_size(n_total))
    }

    pub fn with_population(n_mi: usize, lambda: usize) -> Self {
        let n = n_mi.max(1) as f64;
        let lambda = lambda.max(2);
        let mu = lambda / 2;

        let raw: Vec<f64> = (1..=lambda)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let pos_sum: f64 = raw.iter().filter(|&&w| w > 0.0).sum();
        let pos_sq: f64 = raw.iter().filter(|&&w| w > 0.0).map(|w| w * w).sum();
        let neg_sum: f64 = raw.iter().filter(|&&w| w < 0.0).map(|w| -w).sum();
        let neg_sq: f64 = raw.iter().filter(|&&w| w < 0.0).map(|w| w * w).sum();
        let mu_eff = pos_sum * pos_sum / pos_sq;
        let mu_eff_minus = if neg_sq > 0.0 {
            neg_sum * neg_sum / neg_sq
        } else {
            0.0
        };

        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu =
            (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));

        let alpha_mu_minus = 1.0 + c_1 / c_mu;
        let alpha_mu_eff_minus = 1.0 + 2.0 * mu_eff_minus / (mu_eff + 2.0);
        let alpha_posdef_minus = (1.0 - c_1 - c_mu) / (n * c_mu);
        let neg_scale = alpha_mu_minus
            .min(alpha_mu_eff_minus)
            .min(alpha_posdef_minus);

        let weights = raw
            .iter()
            .map(|&w| {
                if w >= 0.0 {
                    w / pos_sum
                } else {
                    neg_scale * w / neg_sum
                }
            })
            .collect();

        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);

        CmaHyperparameters {
            lambda,
            mu,
            weights,
            c_m: 1.0,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            mu_eff,
        }
    }

    pub fn positive_weights(&self) -> &[f64] {
        &self.weights[..self.mu]
    }
}

/// Eigendecomposition `C = B diag(d) B^T` of a covariance matrix.
#[derive(Debug, Clone)]
pub struct CovarianceEigen {
    basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl CovarianceEigen {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        if cov.is_empty() {
            return Ok(CovarianceEigen {
                basis: DMatrix::zeros(0, 0),
                eigenvalues: DVector::zeros(0),
            });
        }
        let eig = SymmetricEigen::new(cov.clone());
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let max = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        // eigenvalues within rounding distance of zero are clamped to the
        // floor when used; anything more negative is rejected
        let rounding = max * ROUNDING_TOLERANCE;
        if !(max > 0.0) || !(min > -rounding) {
            return Err(Error::NotPositiveDefinite { eigenvalue: min });
        }
        Ok(CovarianceEigen {
            basis: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
        })
    }

    /// Smallest eigenvalue, clamped to `EIGEN_FLOOR`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .max(EIGEN_FLOOR)
    }

    /// `C^{1/2} v`.
    pub fn sqrt_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let scaled = self
            .basis
            .tr_mul(v)
            .zip_map(&self.eigenvalues, |a, d| a * d.max(EIGEN_FLOOR).sqrt());
        &self.basis * scaled
    }

    /// `C^{-1/2} v`.
    pub fn inv_sqrt_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let scaled = self
            .basis
            .tr_mul(v)
            .zip_map(&self.eigenvalues, |a, d| a / d.max(EIGEN_FLOOR).sqrt());
        &self.basis * scaled
    }
}

/// Parameters of the Gaussian part, plus the per-integer-dimension mutation
/// rate memory used by the margin correction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    /// Diagonal of `A`.
    pub amplitude: DVector<f64>,
    pub path_sigma: DVector<f64>,
    pub path_c: DVector<f64>,
    pub p_mut: Vec<f64>,
    pub generation: usize,
}

impl GaussianState {
    /// Fresh state: `A = I`, zero paths, all mutation rates 1.
    pub fn new(mean: DVector<f64>, sigma: f64, cov: DMatrix<f64>, n_in: usize) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "covariance",
                expected: n,
                got: cov.nrows(),
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {sigma}"
            )));
        }
        CovarianceEigen::new(&cov)?;
        Ok(GaussianState {
            mean,
            sigma,
            cov,
            amplitude: DVector::from_element(n, 1.0),
            path_sigma: DVector::zeros(n),
            path_c: DVector::zeros(n),
            p_mut: vec![1.0; n_in],
            generation: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard deviation of coordinate `j` of the sampling distribution,
    /// `sigma <A>_j sqrt(<C>_j)`.
    pub fn coordinate_std(&self, j: usize) -> f64 {
        self.sigma * self.amplitude[j] * self.cov[(j, j)].sqrt()
    }

    /// `m <- m + c_m sigma A sum_{i<=mu} w_i y_{i:lambda}`.
    pub fn update_mean(&mut self, hyper: &CmaHyperparameters, ranked_y: &[DVector<f64>]) {
        let y_w = weighted_step(hyper, ranked_y);
        let step = y_w.component_mul(&self.amplitude) * (hyper.c_m * self.sigma);
        self.mean += step;
    }

    /// Updates both evolution paths and returns the Heaviside flag `h_sigma`.
    /// `eig` must be the decomposition of the current (pre-update) `C`.
    pub fn update_paths(
        &mut self,
        hyper: &CmaHyperparameters,
        ranked_y: &[DVector<f64>],
        eig: &CovarianceEigen,
    ) -> bool {
        let y_w = weighted_step(hyper, ranked_y);
        let cs = hyper.c_sigma;
        let cc = hyper.c_c;
        self.path_sigma = &self.path_sigma * (1.0 - cs)
            + eig.inv_sqrt_mul(&y_w) * (cs * (2.0 - cs) * hyper.mu_eff).sqrt();

        let h_sigma = self.heaviside(hyper);
        let gate = if h_sigma { 1.0 } else { 0.0 };
        self.path_c =
            &self.path_c * (1.0 - cc) + &y_w * (gate * (cc * (2.0 - cc) * hyper.mu_eff).sqrt());
        h_sigma
    }

    /// `||p_sigma|| / sqrt(1 - (1 - c_sigma)^{2(t+1)}) < (1.4 + 2/(n+1)) E||N(0,I)||`.
    pub fn heaviside(&self, hyper: &CmaHyperparameters) -> bool {
        let n = self.dim();
        let exponent = 2.0 * (self.generation as f64 + 1.0);
        let lhs = self.path_sigma.norm() / (1.0 - (1.0 - hyper.c_sigma).powf(exponent)).sqrt();
        lhs < (1.4 + 2.0 / (n as f64 + 1.0)) * expected_norm(n)
    }

    /// Rank-one plus rank-mu update with active negative weights. `ranked_y`
    /// holds all `lambda` whitened steps in rank order; `eig` is the
    /// decomposition of the pre-update `C`.
    pub fn update_covariance(
        &mut self,
        hyper: &CmaHyperparameters,
        ranked_y: &[DVector<f64>],
        h_sigma: bool,
        eig: &CovarianceEigen,
    ) -> Result<()> {
        let n = self.dim() as f64;
        let weight_sum: f64 = hyper.weights.iter().sum();
        let gate = if h_sigma { 0.0 } else { 1.0 };
        let decay = 1.0 - hyper.c_1 - hyper.c_mu * weight_sum
            + gate * hyper.c_1 * hyper.c_c * (2.0 - hyper.c_c);

        let mut next = &self.cov * decay;
        next.ger(hyper.c_1, &self.path_c, &self.path_c, 1.0);
        for (w, y) in hyper.weights.iter().zip(ranked_y) {
            let w_circ = if *w >= 0.0 {
                *w
            } else {
                let norm_sq = eig.inv_sqrt_mul(y).norm_squared();
                if norm_sq > 0.0 {
                    w * n / norm_sq
                } else {
                    0.0
                }
            };
            next.ger(hyper.c_mu * w_circ, y, y, 1.0);
        }
        let sym = (&next + next.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(max > 0.0) || !max.is_finite() || min.is_nan() {
            return Err(Error::NotPositiveDefinite { eigenvalue: min });
        }
        let lower = max / MAX_CONDITION;
        self.cov = if min >= lower {
            sym
        } else {
            let clamped = eig.eigenvalues.map(|d| d.max(lower));
            let rebuilt =
                &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
            (&rebuilt + rebuilt.transpose()) * 0.5
        };
        Ok(())
    }

    /// Cumulative step-size adaptation.
    pub fn update_stepsize(&mut self, hyper: &CmaHyperparameters) {
        let ratio = self.path_sigma.norm() / expected_norm(self.dim());
        self.sigma *= ((hyper.c_sigma / hyper.d_sigma) * (ratio - 1.0)).exp();
    }
}

fn weighted_step(hyper: &CmaHyperparameters, ranked_y: &[DVector<f64>]) -> DVector<f64> {
    let n = ranked_y.first().map_or(0, |y| y.len());
    let mut y_w = DVector::zeros(n);
    for (w, y) in hyper.positive_weights().iter().zip(ranked_y) {
        y_w.axpy(*w, y, 1.0);
    }
    y_w
}
