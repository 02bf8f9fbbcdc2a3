use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mvbbo_harness::table::write_stats;
use mvbbo_harness::StatRow;

fn mvbbo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvbbo"))
        .args(args)
        .env("MVBBO_THREADS", "2")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn svg_points(svg: &str) -> Vec<(f64, f64)> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    let line = doc
        .descendants()
        .find(|n| n.has_tag_name("polyline") && n.attribute("class") == Some("median"))
        .unwrap();
    line.attribute("points")
        .unwrap()
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

const SINGLE: &str = r#"{"benchmark": "SphereIntCOM", "variant": "catcmawm", "dims": [2, 2, 2],
                         "budget": 600, "trials": 3, "seed": 5}"#;

#[test]
fn run_writes_records_stats_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SINGLE);
    let out = dir.path().join("res");
    let o = mvbbo(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(records.starts_with("trial,iteration,evaluations,best_fitness,p_mut_1,p_mut_2\n"));
    assert!(!records.contains('\r'));
    let stats = fs::read_to_string(out.join("stats.csv")).unwrap();
    assert!(stats.starts_with("evaluations,median,q25,q75\n"));
    roxmltree::Document::parse(&fs::read_to_string(out.join("plot.svg")).unwrap()).unwrap();
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SINGLE);
    let out = dir.path().join("res");
    let o = mvbbo(&[
        "run",
        "--config",
        &config,
        "--trials",
        "2",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    let trials: Vec<&str> = records
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(trials.contains(&"1") && !trials.contains(&"2"));
    let saved = fs::read_to_string(out.join("config.json")).unwrap();
    assert!(saved.contains("\"seed\": 9"), "{saved}");
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        r#"{"benchmark": "SphereIntCOM", "variant": "catcmawm", "dims": [2, 2, 2],
                                               "budget": 600, "trials": 1, "colour": "red"}"#,
    );
    assert_eq!(mvbbo(&["run", "--config", &unknown]).status.code(), Some(1));

    let tiny = write_config(
        dir.path(),
        r#"{"benchmark": "SphereIntCOM", "variant": "catcmawm", "dims": [2, 2, 2],
                                            "budget": 3, "trials": 1}"#,
    );
    assert_eq!(mvbbo(&["run", "--config", &tiny]).status.code(), Some(1));

    assert_eq!(mvbbo(&["run"]).status.code(), Some(1));
    assert_eq!(mvbbo(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = dir.path().join("fig.svg");
    let o = mvbbo(&[
        "plot",
        "--in",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));

    let config = write_config(dir.path(), SINGLE);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = mvbbo(&[
        "run",
        "--config",
        &config,
        "--out",
        blocker.join("res").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn header_only_stats_cannot_be_plotted() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    write_stats(&stats, &[]).unwrap();
    assert_eq!(
        fs::read_to_string(&stats).unwrap(),
        "evaluations,median,q25,q75\n"
    );
    let out = dir.path().join("fig.svg");
    let o = mvbbo(&[
        "plot",
        "--in",
        stats.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn hypervolume_plot_is_well_formed_and_rises() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"benchmark": "DSIntLFTL", "variant": "como-catcmawm", "dims": [2, 2, 2], "categories": 3,
            "budget": 3000, "trials": 2, "kernels": 3, "reference": [5.0, 5.0]}"#,
    );
    let out = dir.path().join("res");
    assert_eq!(
        mvbbo(&["run", "--config", &config, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(records.starts_with("trial,iteration,evaluations,hypervolume,"));

    let fig = dir.path().join("hv.svg");
    let o = mvbbo(&[
        "plot",
        "--in",
        out.join("stats.csv").to_str().unwrap(),
        "--out",
        fig.to_str().unwrap(),
        "--scale",
        "linear",
        "--title",
        "a < b & c",
        "--y-label",
        "hypervolume",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(&fig).unwrap();
    assert!(svg.contains("a &lt; b &amp; c"));
    let points = svg_points(&svg);
    assert!(points.len() > 1);
    assert!(points
        .windows(2)
        .all(|w| w[1].0 > w[0].0 && w[1].1 <= w[0].1));
}

#[test]
fn single_checkpoint_plots_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.csv");
    write_stats(
        &stats,
        &[StatRow {
            evaluations: 10,
            median: 1.0,
            q25: 0.5,
            q75: 2.0,
        }],
    )
    .unwrap();
    let fig = dir.path().join("fig.svg");
    assert_eq!(
        mvbbo(&[
            "plot",
            "--in",
            stats.to_str().unwrap(),
            "--out",
            fig.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let doc_text = fs::read_to_string(&fig).unwrap();
    let doc = roxmltree::Document::parse(&doc_text).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.has_tag_name("circle"))
            .count(),
        1
    );
}
