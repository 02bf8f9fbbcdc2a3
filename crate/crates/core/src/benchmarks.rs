//! Benchmark functions over mixed spaces, addressable by name.

use crate::error::{Error, Result};
use crate::space::{Objective, SearchSpace};

pub const SINGLE_OBJECTIVE: &[&str] = &[
    "SphereIntCOM",
    "EllipsoidIntCLO",
    "REllipsoidIntCLO",
    "MVProximity",
    "EllipsoidInt",
    "REllipsoidInt",
];

pub const BI_OBJECTIVE: &[&str] = &["DSIntLFTL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    SphereIntCom,
    EllipsoidIntClo,
    REllipsoidIntClo,
    MvProximity,
    EllipsoidInt,
    REllipsoidInt,
    DsIntLftl,
}

impl Kind {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "SphereIntCOM" => Kind::SphereIntCom,
            "EllipsoidIntCLO" => Kind::EllipsoidIntClo,
            "REllipsoidIntCLO" => Kind::REllipsoidIntClo,
            "MVProximity" => Kind::MvProximity,
            "EllipsoidInt" => Kind::EllipsoidInt,
            "REllipsoidInt" => Kind::REllipsoidInt,
            "DSIntLFTL" => Kind::DsIntLftl,
            other => return Err(Error::UnknownBenchmark(other.to_string())),
        })
    }

    fn arity(self) -> usize {
        if self == Kind::DsIntLftl {
            2
        } else {
            1
        }
    }
}

/// Search space and scale constants of a benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub space: SearchSpace,
    pub x_scale: f64,
    pub z_scale: f64,
}

impl BenchmarkSpec {
    /// Integers on `{-3, ..., 3}`, five categories, scales 3.
    pub fn new(n_co: usize, n_in: usize, n_ca: usize) -> Self {
        Self::from_space(
            SearchSpace::uniform(n_co, n_in, -3, 3, n_ca, 5).expect("valid default space"),
        )
    }

    pub fn from_space(space: SearchSpace) -> Self {
        BenchmarkSpec {
            space,
            x_scale: 3.0,
            z_scale: 3.0,
        }
    }

    /// The geometry each benchmark is usually run with: integers on
    /// `{-10, ..., 10}` for the categorical-free ellipsoids, and
    /// `{-5, ..., 15}` with continuous bounds `[-5, 15]` and scales 10 for
    /// the bi-objective one.
    pub fn defaults_for(name: &str, n_co: usize, n_in: usize, n_ca: usize) -> Result<Self> {
        Ok(match Kind::parse(name)? {
            Kind::EllipsoidInt | Kind::REllipsoidInt => {
                Self::from_space(SearchSpace::uniform(n_co, n_in, -10, 10, 0, 2)?)
            }
            Kind::DsIntLftl => {
                BenchmarkSpec {
                    space: SearchSpace::uniform(n_co, n_in, -5, 15, n_ca, 5)?
                        .with_bounds(vec![(-5.0, 15.0); n_co])?,
                    x_scale: 10.0,
                    z_scale: 10.0,
                }
            }
            _ => Self::new(n_co, n_in, n_ca),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    kind: Kind,
    spec: BenchmarkSpec,
}

impl Benchmark {
    pub fn new(name: &str, spec: BenchmarkSpec) -> Result<Self> {
        let kind = Kind::parse(name)?;
        let s = &spec.space;
        match kind {
            Kind::MvProximity if s.n_co() != s.n_ca() || s.n_in() != s.n_ca() => {
                return Err(Error::InvalidParameter(format!(
                    "MVProximity needs equal variable counts, got ({}, {}, {})",
                    s.n_co(),
                    s.n_in(),
                    s.n_ca()
                )))
            }
            Kind::EllipsoidInt | Kind::REllipsoidInt if s.n_ca() != 0 => {
                return Err(Error::DimensionMismatch {
                    what: "categorical variables",
                    expected: 0,
                    got: s.n_ca(),
                })
            }
            _ => {}
        }
        if !(spec.x_scale > 0.0 && spec.z_scale > 0.0) {
            return Err(Error::InvalidParameter(
                "benchmark scales must be positive".into(),
            ));
        }
        Ok(Benchmark { kind, spec })
    }

    pub fn spec(&self) -> &BenchmarkSpec {
        &self.spec
    }
}

impl Objective for Benchmark {
    fn space(&self) -> &SearchSpace {
        &self.spec.space
    }

    fn arity(&self) -> usize {
        self.kind.arity()
    }

    fn evaluate(&self, x: &[f64], z: &[f64], c: &[usize]) -> Vec<f64> {
        let counts = self.spec.space.category_counts();
        match self.kind {
            Kind::SphereIntCom => vec![sum_sq(x) + sum_sq(z) + one_max_gap(c)],
            Kind::EllipsoidIntClo => vec![ellipsoid(x, z, false) + leading_firsts_gap(c)],
            Kind::REllipsoidIntClo => vec![ellipsoid(x, z, true) + leading_firsts_gap(c)],
            Kind::EllipsoidInt => vec![ellipsoid(x, z, false)],
            Kind::REllipsoidInt => vec![ellipsoid(x, z, true)],
            Kind::MvProximity => {
                let zeta: Vec<f64> = c
                    .iter()
                    .zip(counts)
                    .map(|(&k, &size)| k as f64 / size as f64)
                    .collect();
                let fx: f64 = x
                    .iter()
                    .zip(&zeta)
                    .map(|(xi, t)| (xi / self.spec.x_scale - t).powi(2))
                    .sum();
                let fz: f64 = z
                    .iter()
                    .zip(&zeta)
                    .map(|(zi, t)| (zi / self.spec.z_scale - t).powi(2))
                    .sum();
                vec![fx + fz + zeta.iter().sum::<f64>()]
            }
            Kind::DsIntLftl => {
                let (xs, zs) = (self.spec.x_scale, self.spec.z_scale);
                let f1 = mean_of(x.iter().map(|v| (v / xs).powi(2)))
                    + mean_of(z.iter().map(|v| (v / zs).powi(2)))
                    + mean_gap(leading_firsts_gap(c), c.len());
                let f2 = mean_of(x.iter().map(|v| (v / xs - 1.0).powi(2)))
                    + mean_of(z.iter().map(|v| (v / zs - 1.0).powi(2)))
                    + mean_gap(trailing_lasts_gap(c, counts), c.len());
                vec![f1, f2]
            }
        }
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn mean_of(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

fn mean_gap(gap: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        gap / n as f64
    }
}

/// Weights `10^{6 (i - 1) / (N - 1)}` over the concatenation of `x` and
/// `z`; `reversed` puts the integer block first.
fn ellipsoid(x: &[f64], z: &[f64], reversed: bool) -> f64 {
    let total = x.len() + z.len();
    let weight = |slot: usize| {
        if total > 1 {
            10f64.powf(6.0 * slot as f64 / (total - 1) as f64)
        } else {
            1.0
        }
    };
    let (x_offset, z_offset) = if reversed { (z.len(), 0) } else { (0, x.len()) };
    let fx: f64 = x
        .iter()
        .enumerate()
        .map(|(n, v)| weight(x_offset + n) * v * v)
        .sum();
    let fz: f64 = z
        .iter()
        .enumerate()
        .map(|(n, v)| weight(z_offset + n) * v * v)
        .sum();
    fx + fz
}

/// `N_ca - #{n : c_n is the first category}`.
fn one_max_gap(c: &[usize]) -> f64 {
    c.iter().filter(|&&k| k != 0).count() as f64
}

/// `N_ca` minus the length of the leading run of first categories.
fn leading_firsts_gap(c: &[usize]) -> f64 {
    let run = c.iter().take_while(|&&k| k == 0).count();
    (c.len() - run) as f64
}

/// `N_ca` minus the length of the trailing run of last categories.
fn trailing_lasts_gap(c: &[usize], counts: &[usize]) -> f64 {
    let run = c
        .iter()
        .zip(counts)
        .rev()
        .take_while(|(&k, &size)| k + 1 == size)
        .count();
    (c.len() - run) as f64
}

/// Single-objective benchmark by name.
pub fn make_single(name: &str, spec: &BenchmarkSpec) -> Result<Box<dyn Objective>> {
    let b = Benchmark::new(name, spec.clone())?;
    if b.kind.arity() != 1 {
        return Err(Error::InvalidParameter(format!(
            "{name} is not single-objective"
        )));
    }
    Ok(Box::new(b))
}

/// Bi-objective benchmark by name.
pub fn make_bi(name: &str, spec: &BenchmarkSpec) -> Result<Box<dyn Objective>> {
    let b = Benchmark::new(name, spec.clone())?;
    if b.kind.arity() != 2 {
        return Err(Error::InvalidParameter(format!(
            "{name} is not bi-objective"
        )));
    }
    Ok(Box::new(b))
}

/// Known optimal value; `None` for the bi-objective benchmark.
pub fn optimum_of(name: &str) -> Result<Option<f64>> {
    Ok(match Kind::parse(name)?.arity() {
        1 => Some(0.0),
        _ => None,
    })
}

pub fn is_bi_objective(name: &str) -> Result<bool> {
    Ok(Kind::parse(name)?.arity() == 2)
}
