//! Integer handling for the Gaussian part.
//!
//! Each integer coordinate of the mean sits on a plateau of `Enc`. The
//! margin correction keeps the probability of sampling a different level
//! (the mutation rate) at or above `alpha` by moving the mean coordinate
//! and, on interior plateaus, rescaling the amplitude `<A>`.
//!
//! Two variants are provided. The original correction only imposes the lower
//! bound. The modified correction additionally caps the mutation rate at the
//! previous iteration's value in dimensions where no successful integer
//! mutation happened, which stops the rate from drifting upward once the
//! integer part has settled.
//!
//! Integer centering moves successfully mutated coordinates of the selected
//! samples onto the level they encoded to before the distribution update.

use crate::cma::GaussianState;
use crate::error::{Error, Result};
use crate::normal::{norm_cdf, tail_quantile};
use crate::sampler::{enc, level_index, nearest_thresholds, Edge, Nearest, ThresholdTable};
use crate::space::{MixedSolution, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginMode {
    Original,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginConfig {
    pub alpha: f64,
    pub mode: MarginMode,
    pub centering: bool,
}

impl MarginConfig {
    pub fn new(alpha: f64, mode: MarginMode, centering: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "margin alpha must lie in (0, 0.5), got {alpha}"
            )));
        }
        Ok(MarginConfig {
            alpha,
            mode,
            centering,
        })
    }
}

/// `alpha = 1 - 0.73^{1/(N_in + N_ca)}`; `None` when there are no discrete
/// variables.
pub fn promising_alpha(n_in: usize, n_ca: usize) -> Option<f64> {
    let discrete = n_in + n_ca;
    (discrete > 0).then(|| 1.0 - 0.73f64.powf(1.0 / discrete as f64))
}

/// The margin usually paired with the original correction, `1 / (lambda N_mi)`.
pub fn original_alpha(lambda: usize, n_mi: usize) -> f64 {
    1.0 / (lambda * n_mi.max(1)) as f64
}

/// One integer coordinate of the Gaussian: the mean coordinate, `sigma`,
/// the diagonal entries of `C` and `A`, and the mutation-rate memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub mean: f64,
    pub sigma: f64,
    pub cov_diag: f64,
    pub amplitude: f64,
    pub p_mut: f64,
}

impl Coordinate {
    pub fn of(gauss: &GaussianState, j: usize, n: usize) -> Self {
        Coordinate {
            mean: gauss.mean[j],
            sigma: gauss.sigma,
            cov_diag: gauss.cov[(j, j)],
            amplitude: gauss.amplitude[j],
            p_mut: gauss.p_mut[n],
        }
    }

    pub fn std(&self) -> f64 {
        self.sigma * self.amplitude * self.cov_diag.sqrt()
    }
}

/// Marginal probabilities of the sampled coordinate relative to its plateau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginals {
    /// Mass on the far side of the single bordering threshold.
    Edge {
        p_mut: f64,
    },
    Interior {
        p_low: f64,
        p_mid: f64,
        p_up: f64,
    },
}

impl Marginals {
    pub fn mutation_rate(&self) -> f64 {
        match *self {
            Marginals::Edge { p_mut } => p_mut,
            Marginals::Interior { p_low, p_up, .. } => p_low + p_up,
        }
    }
}

/// `Pr(v <= t)` for `v ~ N(mean, std^2)`.
fn mass_below(t: f64, mean: f64, std: f64) -> f64 {
    let z = (t - mean) / std;
    if z.is_nan() {
        0.5
    } else {
        norm_cdf(z)
    }
}

pub fn marginal_probabilities(mean: f64, std: f64, nearest: Nearest) -> Marginals {
    match nearest {
        Nearest::Edge { threshold, .. } => {
            let below = mass_below(threshold, mean, std);
            let above = mass_below(mean, threshold, std);
            Marginals::Edge {
                p_mut: below.min(above),
            }
        }
        Nearest::Interior { low, up } => {
            let p_low = mass_below(low, mean, std);
            let p_up = mass_below(mean, up, std);
            Marginals::Interior {
                p_low,
                p_mid: 1.0 - p_low - p_up,
                p_up,
            }
        }
    }
}

/// Marginals of one coordinate measured against the plateau its mean
/// currently encodes to.
pub fn measure(coord: &Coordinate, thresholds: &[f64]) -> Marginals {
    marginal_probabilities(
        coord.mean,
        coord.std(),
        nearest_thresholds(coord.mean, thresholds),
    )
}

/// Flags the integer dimensions in which at least one of the selected
/// solutions encodes to a level different from `Enc(m)`.
pub fn detect_successful_mutation(selected_z: &[&[f64]], mean_levels: &[f64]) -> Vec<bool> {
    mean_levels
        .iter()
        .enumerate()
        .map(|(n, &level)| selected_z.iter().any(|z| z[n] != level))
        .collect()
}

/// Correction on an edge plateau. `level` is the encoded mean level, used by
/// the amplitude floor when centering is enabled.
pub fn margin_correct_edge(
    coord: Coordinate,
    edge: Edge,
    threshold: f64,
    level: f64,
    success: bool,
    config: &MarginConfig,
) -> Coordinate {
    let alpha = config.alpha;
    let measured =
        match marginal_probabilities(coord.mean, coord.std(), Nearest::Edge { edge, threshold }) {
            Marginals::Edge { p_mut } => p_mut,
            Marginals::Interior { .. } => unreachable!(),
        };
    let p_mut = if success || config.mode == MarginMode::Original {
        alpha.max(measured)
    } else {
        alpha.max(measured.min(coord.p_mut))
    };

    let unit = coord.sigma * coord.cov_diag.sqrt();
    let amplitude = if config.centering {
        ((level - threshold).abs() / (unit * tail_quantile(alpha))).max(coord.amplitude)
    } else {
        coord.amplitude
    };

    let sign = match edge {
        Edge::Lowest => -1.0,
        Edge::Highest => 1.0,
    };
    Coordinate {
        mean: threshold + sign * unit * amplitude * tail_quantile(p_mut),
        amplitude,
        p_mut,
        ..coord
    }
}

/// Target tail masses `(p_low, p_up)` of the correction on an interior
/// plateau bounded by `low` and `up`.
pub fn interior_targets(
    coord: &Coordinate,
    low: f64,
    up: f64,
    success: bool,
    config: &MarginConfig,
) -> (f64, f64) {
    let alpha = config.alpha;
    let (mut p_low, mut p_mid, mut p_up) =
        match marginal_probabilities(coord.mean, coord.std(), Nearest::Interior { low, up }) {
            Marginals::Interior { p_low, p_mid, p_up } => (p_low, p_mid, p_up),
            Marginals::Edge { .. } => unreachable!(),
        };

    p_low = p_low.max(alpha / 2.0);
    p_up = p_up.max(alpha / 2.0);
    let excess = if success || config.mode == MarginMode::Original {
        p_low + p_up + p_mid - 1.5 * alpha
    } else {
        p_mid = p_mid.max(1.0 - coord.p_mut);
        p_low + p_up + p_mid - alpha - (1.0 - coord.p_mut)
    };
    let shortfall = 1.0 - p_low - p_up - p_mid;
    // excess == 0 only when every mass sits on its bound, which forces the
    // shortfall to zero as well
    let delta = if excess > 0.0 {
        shortfall / excess
    } else {
        0.0
    };
    (
        p_low + delta * (p_low - alpha / 2.0),
        p_up + delta * (p_up - alpha / 2.0),
    )
}

/// Total mutation mass of the interior targets, clamped to the range the
/// update rule guarantees so rounding cannot leave it.
pub fn interior_mass(
    coord: &Coordinate,
    p_low: f64,
    p_up: f64,
    success: bool,
    config: &MarginConfig,
) -> f64 {
    let alpha = config.alpha;
    let cap = if success || config.mode == MarginMode::Original {
        1.0
    } else {
        alpha.max(coord.p_mut)
    };
    (p_low + p_up).clamp(alpha, cap)
}

/// Correction on an interior plateau bounded by `low` and `up`.
pub fn margin_correct_interior(
    coord: Coordinate,
    low: f64,
    up: f64,
    success: bool,
    config: &MarginConfig,
) -> Coordinate {
    let (p_low, p_up) = interior_targets(&coord, low, up, success, config);
    let p_mut = interior_mass(&coord, p_low, p_up, success, config);
    let scale = p_mut / (p_low + p_up);
    let (p_low, p_up) = (p_low * scale, p_up * scale);
    let q_low = tail_quantile(p_low);
    let q_up = tail_quantile(p_up);
    Coordinate {
        mean: (low * q_up + up * q_low) / (q_up + q_low),
        amplitude: (up - low) / (coord.sigma * coord.cov_diag.sqrt() * (q_up + q_low)),
        p_mut,
        ..coord
    }
}

/// Dispatches to the edge or interior correction according to where the
/// mean coordinate currently encodes.
pub fn margin_correct(
    coord: Coordinate,
    levels: &[f64],
    thresholds: &[f64],
    success: bool,
    config: &MarginConfig,
) -> Coordinate {
    match nearest_thresholds(coord.mean, thresholds) {
        Nearest::Edge { edge, threshold } => {
            let level = levels[level_index(thresholds, coord.mean)];
            margin_correct_edge(coord, edge, threshold, level, success, config)
        }
        Nearest::Interior { low, up } => margin_correct_interior(coord, low, up, success, config),
    }
}

/// Applies the correction to every integer coordinate of `gauss`, which must
/// already hold the updated mean, step size and covariance (and the previous
/// amplitude and mutation rates).
pub fn apply_margin_correction(
    gauss: &mut GaussianState,
    space: &SearchSpace,
    table: &ThresholdTable,
    success: &[bool],
    config: &MarginConfig,
) {
    for (n, &j) in space.j_in().iter().enumerate() {
        let corrected = margin_correct(
            Coordinate::of(gauss, j, n),
            &space.integer_domains()[n],
            table.dim(n),
            success[n],
            config,
        );
        gauss.mean[j] = corrected.mean;
        gauss.amplitude[j] = corrected.amplitude;
        gauss.p_mut[n] = corrected.p_mut;
    }
}

/// Moves each successfully mutated integer coordinate of the selected
/// solutions onto its encoded level and recomputes the whitened step of
/// that coordinate against the pre-update mean, step size and amplitude.
/// The evaluated `x`, `z`, `c` are left untouched.
pub fn integer_centering(
    selected: &mut [MixedSolution],
    gauss: &GaussianState,
    space: &SearchSpace,
    table: &ThresholdTable,
) {
    let (_, mean_levels) = enc(gauss.mean.as_slice(), space, table);
    for sol in selected.iter_mut() {
        for (n, &j) in space.j_in().iter().enumerate() {
            if sol.z[n] != mean_levels[n] {
                sol.v[j] = sol.z[n];
                sol.y[j] = (sol.v[j] - gauss.mean[j]) / (gauss.sigma * gauss.amplitude[j]);
            }
        }
    }
}
