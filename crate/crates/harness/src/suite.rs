//! The desk-scaled experiment grid.

use std::path::Path;

use crate::config::{ExperimentConfig, VariantName};
use crate::error::Result;
use crate::experiment::run_and_write;

pub const SINGLE_DIMS: [[usize; 3]; 4] = [[2, 2, 2], [4, 4, 4], [6, 6, 6], [15, 15, 15]];
pub const SINGLE_FUNCTIONS: [&str; 4] = [
    "SphereIntCOM",
    "EllipsoidIntCLO",
    "REllipsoidIntCLO",
    "MVProximity",
];
pub const BI_DIMS: [[usize; 3]; 2] = [[3, 3, 3], [7, 7, 7]];
pub const BI_CATEGORIES: [usize; 2] = [5, 2];

const TRIALS: usize = 5;

fn base(
    benchmark: &str,
    variant: VariantName,
    dims: [usize; 3],
    budget: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        benchmark: benchmark.into(),
        variant,
        dims,
        categories: None,
        integer_range: None,
        x_scale: None,
        z_scale: None,
        budget,
        trials: TRIALS,
        seed: 0,
        alpha: None,
        q_min: None,
        margin_mode: None,
        centering: None,
        init_box: None,
        sigma0: None,
        kernels: None,
        reference: None,
        out: None,
    }
}

/// `(directory name, config)` for every experiment of the grid.
pub fn suite_configs() -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for dims in SINGLE_DIMS {
        let n: usize = dims.iter().sum();
        for f in SINGLE_FUNCTIONS {
            let name = format!("{f}_{}_{}_{}", dims[0], dims[1], dims[2]);
            out.push((name, base(f, VariantName::CatCmaWm, dims, 2000 * n)));
        }
    }
    for dims in BI_DIMS {
        for k in BI_CATEGORIES {
            let mut c = base("DSIntLFTL", VariantName::ComoCatCmaWm, dims, 20_000);
            c.categories = Some(k);
            c.kernels = Some(10);
            c.reference = Some([5.0, 5.0]);
            let name = format!("DSIntLFTL_{}_{}_{}_K{k}", dims[0], dims[1], dims[2]);
            out.push((name, c));
        }
    }
    out
}

pub fn run_suite(out: &Path, mut progress: impl FnMut(&str)) -> Result<()> {
    for (name, config) in suite_configs() {
        progress(&name);
        run_and_write(&config, Some(&out.join(&name)))?;
    }
    Ok(())
}
