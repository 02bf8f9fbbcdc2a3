//! CSV emission and parsing. Floats use the shortest representation that
//! parses back to the same bits.

use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::runner::{ExperimentRecords, IterationRecord, Measure};
use crate::stats::StatRow;

pub const STATS_HEADER: [&str; 4] = ["evaluations", "median", "q25", "q75"];

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

pub fn records_header(measure: Measure, n_in: usize) -> Vec<String> {
    let mut header: Vec<String> = ["trial", "iteration", "evaluations", measure.column()]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n_in).map(|n| format!("p_mut_{n}")));
    header
}

pub fn records_to_csv(records: &ExperimentRecords) -> String {
    let mut w = writer();
    w.write_record(records_header(records.measure, records.n_in))
        .expect("in-memory write");
    for r in &records.rows {
        let mut row = vec![
            r.trial.to_string(),
            r.iteration.to_string(),
            r.evaluations.to_string(),
            float(r.value),
        ];
        row.extend(r.p_mut.iter().map(|&p| float(p)));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn stats_to_csv(stats: &[StatRow]) -> String {
    let mut w = writer();
    w.write_record(STATS_HEADER).expect("in-memory write");
    for s in stats {
        w.write_record([
            s.evaluations.to_string(),
            float(s.median),
            float(s.q25),
            float(s.q75),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn write_records(path: &Path, records: &ExperimentRecords) -> Result<()> {
    write_text(path, &records_to_csv(records))
}

pub fn write_stats(path: &Path, stats: &[StatRow]) -> Result<()> {
    write_text(path, &stats_to_csv(stats))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: Option<&str>) -> Result<T> {
    let raw = field.ok_or_else(|| HarnessError::Parse {
        path: path.into(),
        message: format!("line {line}: missing field"),
    })?;
    raw.parse().map_err(|_| HarnessError::Parse {
        path: path.into(),
        message: format!("line {line}: cannot parse `{raw}`"),
    })
}

/// Parses records CSV text; `path` only labels errors.
pub fn parse_records(path: &Path, text: &str) -> Result<ExperimentRecords> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| HarnessError::csv(path, e))?
        .clone();
    let measure = header
        .get(3)
        .and_then(Measure::from_column)
        .ok_or_else(|| HarnessError::Parse {
            path: path.into(),
            message: "header is not a records header".into(),
        })?;
    let n_in = header.len() - 4;
    if header.iter().map(str::to_string).collect::<Vec<_>>() != records_header(measure, n_in) {
        return Err(HarnessError::Parse {
            path: path.into(),
            message: "unexpected records columns".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let line = i + 2;
        rows.push(IterationRecord {
            trial: parse_field(path, line, rec.get(0))?,
            iteration: parse_field(path, line, rec.get(1))?,
            evaluations: parse_field(path, line, rec.get(2))?,
            value: parse_field(path, line, rec.get(3))?,
            p_mut: (4..4 + n_in)
                .map(|k| parse_field(path, line, rec.get(k)))
                .collect::<Result<_>>()?,
        });
    }
    Ok(ExperimentRecords {
        measure,
        n_in,
        rows,
        timing: Vec::new(),
    })
}

pub fn parse_stats(path: &Path, text: &str) -> Result<Vec<StatRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| HarnessError::csv(path, e))?;
    if header.iter().ne(STATS_HEADER) {
        return Err(HarnessError::Parse {
            path: path.into(),
            message: "header is not a stats header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let line = i + 2;
        out.push(StatRow {
            evaluations: parse_field(path, line, rec.get(0))?,
            median: parse_field(path, line, rec.get(1))?,
            q25: parse_field(path, line, rec.get(2))?,
            q75: parse_field(path, line, rec.get(3))?,
        });
    }
    Ok(out)
}

pub fn read_stats(path: &Path) -> Result<Vec<StatRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_stats(path, &text)
}

pub fn read_records(path: &Path) -> Result<ExperimentRecords> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_records(path, &text)
}
