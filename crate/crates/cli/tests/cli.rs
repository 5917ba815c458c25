use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use regime_ffnn::dataset::synthetic::{LevelShock, SyntheticSpec};
use regime_ffnn::dataset::{descriptive_stats, save_csv};
use regime_ffnn::network::{Activation, Network};
use regime_ffnn::scaling::ColumnRange;
use regime_ffnn::{generate_synthetic, Column, MinMaxScaler};
use regime_ffnn_cli::{run_experiment, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regime-ffnn"))
}

fn run_bin(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn market(dir: &Path, rows: usize, seed: u64) -> PathBuf {
    let spec = SyntheticSpec::daily_market(NaiveDate::from_ymd_opt(2008, 12, 1).unwrap())
        .with_shock(LevelShock {
            index: rows / 2,
            magnitude: -0.3,
            columns: vec!["tepix".into(), "industry".into()],
        });
    let path = dir.join("market.csv");
    save_csv(&generate_synthetic(&spec, rows, seed).unwrap(), &path).unwrap();
    path
}

/// Two regimes split at row 100 of a 200-row weekday calendar.
fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        r#"seed = 3

[data]
path = "market.csv"

[columns]
inputs = ["oil", "gas", "gold", "exchange_rate", "volume"]
targets = ["tepix", "industry"]

[[regime]]
name = "first"
start = "2008-12-01"
end = "2009-04-20"

[[regime]]
name = "second"
start = "2009-04-20"
end = "2010-01-01"

[training]
batch = 16
max_epochs = 40
{extra}"#
    );
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn setup(extra: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    market(dir.path(), 200, 1);
    let config = write_config(dir.path(), extra);
    (dir, config)
}

#[test]
fn stats_prints_one_row_per_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("three.csv"),
        "date,a,b,c\n2020-01-01,1,4,9\n2020-01-02,2,5,7\n2020-01-03,3,6,8\n",
    )
    .unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(
        &config,
        "[data]\npath = \"three.csv\"\n[columns]\ninputs = [\"a\", \"b\"]\ntargets = [\"c\"]\n",
    )
    .unwrap();
    let out = run_bin(&["--config", config.to_str().unwrap(), "stats"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("a ") && lines[1].contains("2.0000"));
    let csv = std::fs::read_to_string(dir.path().join("out/stats.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "a,3,2,2,1,0,-1.5,1,3");
}

#[test]
fn stats_on_missing_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(
        &config,
        "[data]\npath = \"nope.csv\"\n[columns]\ninputs = [\"a\"]\ntargets = [\"c\"]\n",
    )
    .unwrap();
    let out = run_bin(&["--config", config.to_str().unwrap(), "stats"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));
}

#[test]
fn stats_of_calibrated_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::daily_market(NaiveDate::from_ymd_opt(2008, 12, 1).unwrap());
    let frame = generate_synthetic(&spec, 1845, 2).unwrap();
    save_csv(&frame, dir.path().join("market.csv")).unwrap();
    let config = write_config(dir.path(), "");
    let out = run_bin(&["--config", config.to_str().unwrap(), "stats"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/stats.csv")).unwrap();
    let expected = descriptive_stats(&frame).unwrap();
    for (line, want) in csv.lines().skip(1).zip(&expected.columns) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], want.name);
        assert_eq!(fields[2].parse::<f64>().unwrap(), want.mean);
    }
    let oil = expected.get("oil").unwrap();
    assert!(
        (oil.mean - 77.2).abs() < 2.0 && (oil.std_dev / 27.29 - 1.0).abs() < 0.15,
        "{oil:?}"
    );
}

#[test]
fn separate_targets_write_one_model_per_target() {
    let (dir, config) = setup("");
    let out = run_bin(&["--config", config.to_str().unwrap(), "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for regime in ["first", "second"] {
        for target in ["tepix", "industry"] {
            let d = dir.path().join("out").join(regime);
            assert!(d.join(format!("model_{target}.txt")).is_file());
            assert!(d.join(format!("loss_history_{target}.csv")).is_file());
            assert!(d.join(format!("predictions_{target}.csv")).is_file());
            assert!(d.join(format!("predictions_{target}.svg")).is_file());
        }
    }
    let report = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 4);
}

#[test]
fn tiny_regime_fails_alone() {
    let (dir, config) =
        setup("\n[[regime]]\nname = \"tiny\"\nstart = \"2011-01-03\"\nend = \"2011-01-10\"\n");
    // Extend the data so the tiny regime has 5 rows.
    market(dir.path(), 600, 1);
    let out = run_bin(&["--config", config.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("tiny") && stderr.contains("too small"),
        "{stderr}"
    );
    let report = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(
        report.contains("\nfirst,") && report.contains("\nsecond,") && !report.contains("tiny,")
    );
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"failed\""));
}

#[test]
fn exit_codes_by_failure_class() {
    let (dir, config) = setup("learning_rate = 1e300\n");
    let out = run_bin(&["--config", config.to_str().unwrap(), "run"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[data]\npath = 3\n").unwrap();
    assert_eq!(
        run_bin(&["--config", bad.to_str().unwrap(), "run"])
            .status
            .code(),
        Some(1)
    );

    let overlap = write_config(dir.path(), "").to_str().unwrap().to_string();
    let text = std::fs::read_to_string(&overlap)
        .unwrap()
        .replace("end = \"2009-04-20\"", "end = \"2009-05-20\"");
    std::fs::write(&overlap, text).unwrap();
    assert_eq!(
        run_bin(&["--config", &overlap, "run"]).status.code(),
        Some(1)
    );
}

#[test]
fn seed_flag_and_manifest_reproduce_reports() {
    let (dir, config) = setup("");
    let c = config.to_str().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let out_c = dir.path().join("c");
    assert!(run_bin(&[
        "--config",
        c,
        "--seed",
        "11",
        "--out",
        out_a.to_str().unwrap(),
        "run"
    ])
    .status
    .success());
    assert!(run_bin(&[
        "--config",
        c,
        "--seed",
        "11",
        "--out",
        out_b.to_str().unwrap(),
        "run"
    ])
    .status
    .success());
    let manifest = out_a.join("manifest.toml");
    assert!(run_bin(&[
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        out_c.to_str().unwrap(),
        "run"
    ])
    .status
    .success());
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    for f in [
        "report.csv",
        "report.txt",
        "first/model_tepix.txt",
        "second/predictions_industry.svg",
    ] {
        assert_eq!(read(&out_a, f), read(&out_b, f), "{f}");
        assert_eq!(read(&out_a, f), read(&out_c, f), "{f}");
    }
    let m = String::from_utf8(read(&out_a, "manifest.toml")).unwrap();
    assert!(
        m.starts_with("# ")
            && m.contains("seed = 11")
            && m.contains("test_reads_before_evaluation = 0")
    );

    let other = dir.path().join("d");
    assert!(run_bin(&[
        "--config",
        c,
        "--seed",
        "12",
        "--out",
        other.to_str().unwrap(),
        "run"
    ])
    .status
    .success());
    assert_ne!(read(&out_a, "report.csv"), read(&other, "report.csv"));
}

#[test]
fn fit_global_flag_changes_scaler_policy() {
    let (dir, config) = setup("");
    let mut cfg = ExperimentConfig::load(&config).unwrap();
    cfg.apply(&regime_ffnn_cli::Overrides {
        fit_global: true,
        ..Default::default()
    });
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.exit_code(), 0);
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("policy = \"global\""));
    let report = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("scaler fit global"));
}

#[test]
fn predict_reproduces_stored_predictions() {
    let (dir, config) = setup("");
    assert!(run_bin(&["--config", config.to_str().unwrap(), "run"])
        .status
        .success());
    let d = dir.path().join("out/first");
    let out = run_bin(&[
        "predict",
        "--model",
        d.join("model_tepix.txt").to_str().unwrap(),
        "--scaler",
        d.join("scaler.txt").to_str().unwrap(),
        "--input",
        dir.path().join("market.csv").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let predicted = String::from_utf8(out.stdout).unwrap();
    let by_date: std::collections::HashMap<&str, &str> = predicted
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap())
        .collect();
    let stored = std::fs::read_to_string(d.join("predictions_tepix.csv")).unwrap();
    let mut checked = 0;
    for line in stored.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(by_date[f[0]], f[3], "{line}");
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn predict_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let mut net = Network::zeros(&[2, 1], &[Activation::Linear]).unwrap();
    net.layers_mut()[0].biases_mut()[0] = 0.25;
    net.save(dir.path().join("m.txt")).unwrap();
    let scaler = MinMaxScaler::from_ranges(vec![
        ColumnRange {
            column: Column::input("a"),
            min: 0.0,
            max: 1.0,
        },
        ColumnRange {
            column: Column::input("b"),
            min: 0.0,
            max: 2.0,
        },
        ColumnRange {
            column: Column::target("y"),
            min: 10.0,
            max: 14.0,
        },
    ]);
    scaler.save(dir.path().join("s.txt")).unwrap();
    std::fs::write(
        dir.path().join("in.csv"),
        "date,b,a\n2020-01-01,5,7\n2020-01-02,-3,0.5\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("empty.csv"), "date,a,b\n").unwrap();
    std::fs::write(dir.path().join("wrong.csv"), "date,a,c\n2020-01-01,1,2\n").unwrap();
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let predict = |input: &str| {
        run_bin(&[
            "predict",
            "--model",
            &p("m.txt"),
            "--scaler",
            &p("s.txt"),
            "--input",
            &p(input),
        ])
    };

    let out = predict("in.csv");
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "date,y\n2020-01-01,11\n2020-01-02,11\n"
    );
    let out = predict("empty.csv");
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "date,y\n");
    let out = predict("wrong.csv");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_command() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    std::fs::write(
        &csv,
        "date,block,actual,predicted\n2020-01-01,test,1,1.5\n2020-01-02,test,2,1\n",
    )
    .unwrap();
    let svg = dir.path().join("p.svg");
    let args = [
        "plot",
        "--input",
        csv.to_str().unwrap(),
        "--output",
        svg.to_str().unwrap(),
    ];
    assert!(run_bin(&args).status.success());
    let first = std::fs::read_to_string(&svg).unwrap();
    let polylines: Vec<&str> = first
        .lines()
        .filter(|l| l.starts_with("<polyline"))
        .collect();
    assert_eq!(polylines.len(), 2);
    for l in &polylines {
        let points = l
            .split("points=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches("\"/>");
        assert_eq!(points.split(' ').count(), 2);
    }
    assert!(run_bin(&args).status.success());
    assert_eq!(std::fs::read_to_string(&svg).unwrap(), first);

    std::fs::write(&csv, "date,actual\n2020-01-01,1\n").unwrap();
    assert_eq!(run_bin(&args).status.code(), Some(2));
    std::fs::write(&csv, "date,actual,predicted\n2020-01-01,1,x\n").unwrap();
    assert_eq!(run_bin(&args).status.code(), Some(2));
}

#[test]
fn synth_command_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run_bin(&[
            "--seed",
            "4",
            "synth",
            "--rows",
            "50",
            "--shock-at",
            "20",
            "--shock-magnitude",
            "-0.5",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 51);
    assert!(text.starts_with("date,oil,gas,gold,exchange_rate,volume,tepix,industry\n2008-12-01,"));
}
