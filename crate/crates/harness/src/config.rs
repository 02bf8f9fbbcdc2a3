//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use mvbbo_core::benchmarks::{BI_OBJECTIVE, SINGLE_OBJECTIVE};
use mvbbo_core::cma::default_population_size;
use mvbbo_core::{BenchmarkSpec, ComoSettings, MarginMode, SearchSpace, Settings, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariantName {
    #[serde(rename = "catcmawm")]
    CatCmaWm,
    #[serde(rename = "catcmawm-original-margin")]
    OriginalMargin,
    #[serde(rename = "catcmawm-no-centering")]
    NoCentering,
    #[serde(rename = "como-catcmawm")]
    ComoCatCmaWm,
}

impl VariantName {
    pub fn is_multi_objective(self) -> bool {
        self == VariantName::ComoCatCmaWm
    }

    fn kernel_variant(self) -> Variant {
        match self {
            VariantName::OriginalMargin => Variant::OriginalMargin,
            VariantName::NoCentering => Variant::NoCentering,
            VariantName::CatCmaWm | VariantName::ComoCatCmaWm => Variant::CatCmaWm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginModeName {
    Original,
    Modified,
}

impl From<MarginModeName> for MarginMode {
    fn from(m: MarginModeName) -> Self {
        match m {
            MarginModeName::Original => MarginMode::Original,
            MarginModeName::Modified => MarginMode::Modified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: String,
    pub variant: VariantName,
    /// `[n_co, n_in, n_ca]`.
    pub dims: [usize; 3],
    /// Categories per categorical variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<usize>,
    /// Inclusive integer range shared by all integer variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_range: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_scale: Option<f64>,
    pub budget: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Lower bound shared by every categorical block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_mode: Option<MarginModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centering: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_box: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let known = SINGLE_OBJECTIVE.contains(&self.benchmark.as_str())
            || BI_OBJECTIVE.contains(&self.benchmark.as_str());
        if !known {
            return bad(format!("unknown benchmark `{}`", self.benchmark));
        }
        let bi = BI_OBJECTIVE.contains(&self.benchmark.as_str());
        if bi != self.variant.is_multi_objective() {
            return bad(format!(
                "variant {:?} cannot run benchmark `{}`",
                self.variant, self.benchmark
            ));
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        let lambda = default_population_size(self.dims.iter().sum());
        if self.budget < lambda {
            return bad(format!(
                "budget {} is below the population size {lambda}",
                self.budget
            ));
        }
        let mo_fields = self.kernels.is_some() || self.reference.is_some();
        if self.variant.is_multi_objective() {
            if self.kernels.is_none() || self.reference.is_none() {
                return bad("como-catcmawm needs `kernels` and `reference`".into());
            }
            if self.kernels == Some(0) {
                return bad("kernels must be at least 1".into());
            }
        } else if mo_fields {
            return bad("`kernels` and `reference` are only valid for como-catcmawm".into());
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 0.5) {
                return bad(format!("alpha {a} must lie in (0, 0.5)"));
            }
        }
        if let Some(s) = self.sigma0 {
            if !(s > 0.0) || !s.is_finite() {
                return bad(format!("sigma0 {s} must be positive"));
            }
        }
        if let Some([lo, hi]) = self.init_box {
            if !(lo <= hi) {
                return bad(format!("init_box [{lo}, {hi}] is empty"));
            }
        }
        self.benchmark_spec().map(|_| ())
    }

    /// Benchmark geometry: the benchmark's defaults with overrides applied.
    pub fn benchmark_spec(&self) -> Result<BenchmarkSpec> {
        let [n_co, n_in, n_ca] = self.dims;
        let config_err = |e: mvbbo_core::Error| HarnessError::Config(e.to_string());
        let mut spec =
            BenchmarkSpec::defaults_for(&self.benchmark, n_co, n_in, n_ca).map_err(config_err)?;
        if self.categories.is_some() || self.integer_range.is_some() {
            let [lo, hi] = match self.integer_range {
                Some(r) => r,
                None => {
                    let levels = spec.space.integer_domains().first();
                    levels.map_or([-3, 3], |l| [l[0] as i64, l[l.len() - 1] as i64])
                }
            };
            let k = self
                .categories
                .unwrap_or_else(|| spec.space.category_counts().first().copied().unwrap_or(5));
            let mut space =
                SearchSpace::uniform(n_co, n_in, lo, hi, n_ca, k).map_err(config_err)?;
            if let Some(bounds) = spec.space.continuous_bounds() {
                space = space.with_bounds(bounds.to_vec()).map_err(config_err)?;
            }
            spec.space = space;
        }
        if let Some(s) = self.x_scale {
            spec.x_scale = s;
        }
        if let Some(s) = self.z_scale {
            spec.z_scale = s;
        }
        mvbbo_core::Benchmark::new(&self.benchmark, spec.clone()).map_err(config_err)?;
        Ok(spec)
    }

    /// Optimizer settings for trial `index`.
    pub fn settings(&self, index: usize) -> Settings {
        let defaults = if self.variant.is_multi_objective() {
            ComoSettings::default().kernel
        } else {
            Settings::default()
        };
        let n_ca = self.dims[2];
        Settings {
            variant: self.variant.kernel_variant(),
            sigma0: self.sigma0.unwrap_or(defaults.sigma0),
            init_box: self.init_box.map_or(defaults.init_box, |[lo, hi]| (lo, hi)),
            alpha: self.alpha,
            q_min: self.q_min.map(|q| vec![q; n_ca]),
            margin_mode: self.margin_mode.map(Into::into),
            centering: self.centering,
            seed: self.trial_seed(index),
            ..defaults
        }
    }

    pub fn como_settings(&self, index: usize) -> ComoSettings {
        let defaults = ComoSettings::default();
        ComoSettings {
            kernels: self.kernels.unwrap_or(defaults.kernels),
            reference: self.reference.unwrap_or(defaults.reference),
            kernel: self.settings(index),
            seed: self.trial_seed(index),
            ..defaults
        }
    }

    pub fn trial_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"benchmark": "SphereIntCOM", "variant": "catcmawm", "dims": [3, 3, 3], "budget": 1000, "trials": 2}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_minimal_config() {
        let c = base();
        assert_eq!(c.seed, 0);
        assert_eq!(c.settings(1).seed, 1);
        assert_eq!(c.settings(0).init_box, (1.0, 3.0));
        assert_eq!(c.benchmark_spec().unwrap().space.n_total(), 9);
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = base();
        c.alpha = Some(0.05);
        c.margin_mode = Some(MarginModeName::Original);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut c = base();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.budget = 5;
        assert!(c.validate().is_err());
        let mut c = base();
        c.kernels = Some(5);
        assert!(c.validate().is_err());
        let mut c = base();
        c.benchmark = "Nope".into();
        assert!(c.validate().is_err());
        let mut c = base();
        c.benchmark = "DSIntLFTL".into();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"benchmark": "SphereIntCOM"}"#).is_err());
        assert!(
            ExperimentConfig::from_json(&base().to_json().replace("\"trials\"", "\"trails\""))
                .is_err()
        );
    }

    #[test]
    fn multi_objective_needs_its_fields() {
        let text = r#"{"benchmark": "DSIntLFTL", "variant": "como-catcmawm", "dims": [3, 3, 3],
                       "budget": 2000, "trials": 1, "kernels": 5, "reference": [5.0, 5.0]}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let s = c.como_settings(0);
        assert_eq!(s.kernels, 5);
        assert_eq!(s.kernel.sigma0, 4.0);
        assert_eq!(s.kernel.init_box, (-5.0, 15.0));
        let mut bad = c.clone();
        bad.reference = None;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn overrides_reshape_the_space() {
        let mut c = base();
        c.categories = Some(2);
        c.integer_range = Some([-10, 10]);
        let spec = c.benchmark_spec().unwrap();
        assert_eq!(spec.space.category_counts(), &[2, 2, 2]);
        assert_eq!(spec.space.integer_domains()[0].len(), 21);
    }
}
