//! Median and inter-quartile band across trials.

use crate::runner::ExperimentRecords;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatRow {
    pub evaluations: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Percentile of an ascending sample by linear interpolation between the
/// closest ranks, with `p` in `[0, 1]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// One row per checkpoint of the longest trial. A trial that ended earlier
/// contributes its last value to later checkpoints.
pub fn aggregate(records: &ExperimentRecords) -> Vec<StatRow> {
    let trials = records.rows.iter().map(|r| r.trial + 1).max().unwrap_or(0);
    let traces: Vec<Vec<(usize, f64)>> = (0..trials)
        .map(|t| records.trial(t).map(|r| (r.evaluations, r.value)).collect())
        .collect();
    let traces: Vec<&Vec<(usize, f64)>> = traces.iter().filter(|t| !t.is_empty()).collect();
    let Some(longest) = traces.iter().max_by_key(|t| t.len()) else {
        return Vec::new();
    };

    let mut out = Vec::with_capacity(longest.len());
    let mut column = Vec::with_capacity(traces.len());
    for (i, &(evaluations, _)) in longest.iter().enumerate() {
        column.clear();
        column.extend(traces.iter().map(|t| t[i.min(t.len() - 1)].1));
        column.sort_by(f64::total_cmp);
        out.push(StatRow {
            evaluations,
            median: percentile(&column, 0.5),
            q25: percentile(&column, 0.25),
            q75: percentile(&column, 0.75),
        });
    }
    out
}
