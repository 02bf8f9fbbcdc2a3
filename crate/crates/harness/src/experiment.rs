//! Running an experiment and writing its artifacts to a directory.

use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, VariantName};
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot, PlotStyle};
use crate::runner::{run_experiment, ExperimentRecords, Measure};
use crate::stats::aggregate;
use crate::table::{write_records, write_stats, write_text};

pub const RECORDS_FILE: &str = "records.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const TIMING_FILE: &str = "timing.json";
pub const CONFIG_FILE: &str = "config.json";
pub const PLOT_FILE: &str = "plot.svg";

fn variant_label(v: VariantName) -> &'static str {
    match v {
        VariantName::CatCmaWm => "CatCMAwM",
        VariantName::OriginalMargin => "CatCMAwM (original margin)",
        VariantName::NoCentering => "CatCMAwM (no centering)",
        VariantName::ComoCatCmaWm => "COMO-CatCMAwM",
    }
}

pub fn plot_style(config: &ExperimentConfig, measure: Measure) -> PlotStyle {
    let [n_co, n_in, n_ca] = config.dims;
    let title = format!("{} ({n_co}, {n_in}, {n_ca})", config.benchmark);
    let legend = variant_label(config.variant);
    match measure {
        Measure::BestFitness => PlotStyle::fitness(&title, legend),
        Measure::Hypervolume => PlotStyle::hypervolume(&title, legend),
    }
}

/// Writes records, stats, timing, the effective config and a plot into
/// `dir`, creating it if needed.
pub fn write_experiment(
    config: &ExperimentConfig,
    records: &ExperimentRecords,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_records(&dir.join(RECORDS_FILE), records)?;
    let stats = aggregate(records);
    write_stats(&dir.join(STATS_FILE), &stats)?;
    let timing = serde_json::to_string_pretty(&records.timing).expect("timing serializes");
    write_text(&dir.join(TIMING_FILE), &(timing + "\n"))?;
    write_text(&dir.join(CONFIG_FILE), &(config.to_json() + "\n"))?;
    if !stats.is_empty() {
        emit_plot(
            &stats,
            &dir.join(PLOT_FILE),
            &plot_style(config, records.measure),
        )?;
    }
    Ok(())
}

/// Runs `config` and writes its artifacts to `out`, falling back to the
/// config's own `out` and then to `results`.
pub fn run_and_write(config: &ExperimentConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let records = run_experiment(config)?;
    write_experiment(config, &records, &dir)?;
    Ok(dir)
}
