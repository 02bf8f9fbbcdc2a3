//! Mixed-variable search spaces, solutions and the objective interface.
//!
//! A space holds `n_co` continuous coordinates, `n_in` integer coordinates
//! drawn from ordered level lists, and `n_ca` categorical variables. The
//! continuous and integer coordinates share one combined vector of length
//! `n_mi = n_co + n_in`; `j_co` and `j_in` say which slot each variable
//! occupies.

use std::fmt;

use crate::error::{Error, Result};

/// A single violated invariant reported by [`SearchSpace::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceViolation {
    DomainTooShort { dim: usize, len: usize },
    DomainNotIncreasing { dim: usize },
    DomainNotFinite { dim: usize },
    CategoryCountTooSmall { dim: usize, count: usize },
    IndexMapNotBijective,
    BoundsLength { expected: usize, got: usize },
    BoundsNotOrdered { dim: usize },
}

impl fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceViolation::DomainTooShort { dim, len } => {
                write!(f, "integer domain {dim} has {len} levels (need at least 2)")
            }
            SpaceViolation::DomainNotIncreasing { dim } => {
                write!(f, "integer domain {dim}: domain not increasing")
            }
            SpaceViolation::DomainNotFinite { dim } => {
                write!(f, "integer domain {dim} contains a non-finite level")
            }
            SpaceViolation::CategoryCountTooSmall { dim, count } => {
                write!(
                    f,
                    "categorical variable {dim}: category count < 2 (got {count})"
                )
            }
            SpaceViolation::IndexMapNotBijective => {
                write!(
                    f,
                    "continuous/integer index maps do not partition the coordinate vector"
                )
            }
            SpaceViolation::BoundsLength { expected, got } => {
                write!(f, "expected {expected} continuous bounds, got {got}")
            }
            SpaceViolation::BoundsNotOrdered { dim } => {
                write!(
                    f,
                    "continuous bound {dim}: lower bound not below upper bound"
                )
            }
        }
    }
}

/// The domain `R^n_co x Z_1 x ... x Z_n_in x C_1 x ... x C_n_ca`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    n_co: usize,
    integer_domains: Vec<Vec<f64>>,
    category_counts: Vec<usize>,
    continuous_bounds: Option<Vec<(f64, f64)>>,
    j_co: Vec<usize>,
    j_in: Vec<usize>,
}

impl SearchSpace {
    /// Builds a space with continuous coordinates first, then integers.
    pub fn new(
        n_co: usize,
        integer_domains: Vec<Vec<f64>>,
        category_counts: Vec<usize>,
    ) -> Result<Self> {
        let n_in = integer_domains.len();
        let space = SearchSpace {
            n_co,
            integer_domains,
            category_counts,
            continuous_bounds: None,
            j_co: (0..n_co).collect(),
            j_in: (n_co..n_co + n_in).collect(),
        };
        space.check()?;
        Ok(space)
    }

    /// Builds a space with an explicit slot assignment for each continuous
    /// and integer variable (0-based slots in the combined vector).
    pub fn with_layout(
        j_co: Vec<usize>,
        j_in: Vec<usize>,
        integer_domains: Vec<Vec<f64>>,
        category_counts: Vec<usize>,
    ) -> Result<Self> {
        let space = SearchSpace {
            n_co: j_co.len(),
            integer_domains,
            category_counts,
            continuous_bounds: None,
            j_co,
            j_in,
        };
        space.check()?;
        Ok(space)
    }

    /// Attaches box bounds for the continuous variables.
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        self.continuous_bounds = Some(bounds);
        self.check()?;
        Ok(self)
    }

    /// Convenience: `n_in` integer variables on the same contiguous range
    /// `lo..=hi` and `n_ca` categorical variables with `k` categories each.
    pub fn uniform(
        n_co: usize,
        n_in: usize,
        lo: i64,
        hi: i64,
        n_ca: usize,
        k: usize,
    ) -> Result<Self> {
        let levels: Vec<f64> = (lo..=hi).map(|v| v as f64).collect();
        SearchSpace::new(n_co, vec![levels; n_in], vec![k; n_ca])
    }

    /// Lists every violated invariant; empty means the space is valid.
    pub fn validate(&self) -> Vec<SpaceViolation> {
        let mut report = Vec::new();
        for (dim, levels) in self.integer_domains.iter().enumerate() {
            if levels.len() < 2 {
                report.push(SpaceViolation::DomainTooShort {
                    dim,
                    len: levels.len(),
                });
            }
            if levels.iter().any(|z| !z.is_finite()) {
                report.push(SpaceViolation::DomainNotFinite { dim });
            } else if levels.windows(2).any(|w| w[0] >= w[1]) {
                report.push(SpaceViolation::DomainNotIncreasing { dim });
            }
        }
        for (dim, &count) in self.category_counts.iter().enumerate() {
            if count < 2 {
                report.push(SpaceViolation::CategoryCountTooSmall { dim, count });
            }
        }
        let n_mi = self.j_co.len() + self.j_in.len();
        let mut seen = vec![false; n_mi];
        let mut bijective =
            self.j_co.len() == self.n_co && self.j_in.len() == self.integer_domains.len();
        for &j in self.j_co.iter().chain(&self.j_in) {
            if j >= n_mi || seen[j] {
                bijective = false;
                break;
            }
            seen[j] = true;
        }
        if !bijective {
            report.push(SpaceViolation::IndexMapNotBijective);
        }
        if let Some(bounds) = &self.continuous_bounds {
            if bounds.len() != self.n_co {
                report.push(SpaceViolation::BoundsLength {
                    expected: self.n_co,
                    got: bounds.len(),
                });
            }
            for (dim, &(lo, hi)) in bounds.iter().enumerate() {
                if !(lo < hi) {
                    report.push(SpaceViolation::BoundsNotOrdered { dim });
                }
            }
        }
        report
    }

    fn check(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidSpace(msg.join("; ")))
        }
    }

    pub fn n_co(&self) -> usize {
        self.n_co
    }

    pub fn n_in(&self) -> usize {
        self.integer_domains.len()
    }

    pub fn n_ca(&self) -> usize {
        self.category_counts.len()
    }

    /// Length of the combined continuous + integer coordinate vector.
    pub fn n_mi(&self) -> usize {
        self.n_co + self.n_in()
    }

    /// Total number of variables of all three kinds.
    pub fn n_total(&self) -> usize {
        self.n_mi() + self.n_ca()
    }

    pub fn integer_domains(&self) -> &[Vec<f64>] {
        &self.integer_domains
    }

    pub fn category_counts(&self) -> &[usize] {
        &self.category_counts
    }

    pub fn continuous_bounds(&self) -> Option<&[(f64, f64)]> {
        self.continuous_bounds.as_deref()
    }

    pub fn j_co(&self) -> &[usize] {
        &self.j_co
    }

    pub fn j_in(&self) -> &[usize] {
        &self.j_in
    }
}

/// Returns `Ok(())` when every invariant holds, otherwise the full report.
pub fn validate_space(space: &SearchSpace) -> std::result::Result<(), Vec<SpaceViolation>> {
    let report = space.validate();
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

/// One-hot vector of length `size` with a 1 at the 1-based position `index`.
pub fn one_hot(index: usize, size: usize) -> Result<Vec<f64>> {
    if index == 0 || index > size {
        return Err(Error::CategoryOutOfRange { index, size });
    }
    let mut v = vec![0.0; size];
    v[index - 1] = 1.0;
    Ok(v)
}

/// A sampled candidate. Categories are stored as 0-based indices; `v` is the
/// pre-encoding Gaussian sample and `y` its whitened counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub c: Vec<usize>,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
}

impl MixedSolution {
    /// The categorical part as one-hot vectors.
    pub fn one_hot_categories(&self, space: &SearchSpace) -> Vec<Vec<f64>> {
        self.c
            .iter()
            .zip(space.category_counts())
            .map(|(&k, &size)| {
                let mut v = vec![0.0; size];
                v[k] = 1.0;
                v
            })
            .collect()
    }
}

/// A deterministic vector-valued objective over a mixed space.
pub trait Objective: Send + Sync {
    fn space(&self) -> &SearchSpace;

    /// Number of objective components.
    fn arity(&self) -> usize;

    /// `c` holds 0-based category indices.
    fn evaluate(&self, x: &[f64], z: &[f64], c: &[usize]) -> Vec<f64>;

    fn evaluate_solution(&self, s: &MixedSolution) -> Vec<f64> {
        self.evaluate(&s.x, &s.z, &s.c)
    }
}
