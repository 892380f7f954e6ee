use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_readlens");

const ARTIFACTS: [&str; 10] = [
    "features_raw.csv",
    "features_norm.csv",
    "cluster_quality.csv",
    "cluster_sweep.csv",
    "anova.csv",
    "clusters.json",
    "heatmap.csv",
    "prompt.json",
    "report.md",
    "evaluations.json",
];

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("LLM_API_KEY")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture(students: usize) -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = run(&["gen-fixture", "--out", p(&data), "--students", &students.to_string()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (tmp, data)
}

fn stage(name: &str, data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        name,
        "--data-dir",
        p(data),
        "--out-dir",
        p(out),
        "--mock-llm",
        "--seed",
        "7",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn assert_ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn fixation_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join("fixations"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn pipeline_writes_every_artifact() {
    let (tmp, data) = fixture(46);
    let out = tmp.path().join("out");
    assert_ok(&stage("pipeline", &data, &out, &[]));
    for a in ARTIFACTS {
        let path = out.join(a);
        assert!(path.is_file() && fs::metadata(&path).unwrap().len() > 0, "{a}");
    }
    assert_eq!(fixation_files(&out).len(), 46);
    let quality = fs::read_to_string(out.join("cluster_quality.csv")).unwrap();
    assert!(quality.starts_with("method,k,avg_within_cluster_variance,silhouette\n"));
    assert_eq!(quality.lines().count(), 4);
}

#[test]
fn pipeline_matches_individual_stages() {
    let (tmp, data) = fixture(24);
    let whole = tmp.path().join("whole");
    let staged = tmp.path().join("staged");
    assert_ok(&stage("pipeline", &data, &whole, &["--k-range", "2-5"]));
    for s in ["fixations", "features", "cluster", "report", "evaluate"] {
        assert_ok(&stage(s, &data, &staged, &["--k-range", "2-5"]));
    }
    for a in ARTIFACTS {
        assert_eq!(
            fs::read(whole.join(a)).unwrap(),
            fs::read(staged.join(a)).unwrap(),
            "{a}"
        );
    }
    assert_eq!(fixation_files(&whole), fixation_files(&staged));
}

#[test]
fn cluster_rerun_is_byte_identical() {
    let (tmp, data) = fixture(24);
    let out = tmp.path().join("out");
    for s in ["fixations", "features"] {
        assert_ok(&stage(s, &data, &out, &[]));
    }
    assert_ok(&stage("cluster", &data, &out, &[]));
    let first: Vec<Vec<u8>> = ["clusters.json", "anova.csv", "heatmap.csv", "cluster_quality.csv"]
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap())
        .collect();
    assert_ok(&stage("cluster", &data, &out, &["--jobs", "1"]));
    for (i, f) in ["clusters.json", "anova.csv", "heatmap.csv", "cluster_quality.csv"]
        .iter()
        .enumerate()
    {
        assert_eq!(first[i], fs::read(out.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_gaze_directory_is_exit_two() {
    let (tmp, data) = fixture(3);
    fs::remove_dir_all(data.join("gaze")).unwrap();
    let o = stage("fixations", &data, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(p(&data.join("gaze"))), "{err}");
}

#[test]
fn malformed_gaze_log_is_exit_one() {
    let (tmp, data) = fixture(3);
    fs::write(data.join("gaze").join("001.csv"), "t_s,x_px,y_px,valid\n0.0,abc,1,1\n").unwrap();
    let o = stage("fixations", &data, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_api_key_is_a_config_error() {
    let (tmp, data) = fixture(12);
    let out = tmp.path().join("out");
    for s in ["fixations", "features", "cluster"] {
        assert_ok(&stage(s, &data, &out, &["--k-range", "2-3"]));
    }
    let o = run(&["report", "--data-dir", p(&data), "--out-dir", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("LLM_API_KEY"));
}

#[test]
fn bad_config_file_is_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, "{ \"clustering\": { \"k_min\": 5, \"k_max\": 2 } }").unwrap();
    let o = run(&["cluster", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["cluster", "--config", p(&tmp.path().join("absent.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_paths_resolve_against_config_file() {
    let (tmp, _) = fixture(12);
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{ "data_dir": "data", "out_dir": "results", "clustering": { "k_max": 3, "methods": ["kmeans"] } }"#,
    )
    .unwrap();
    let o = Command::new(BIN)
        .args(["pipeline", "--config", p(&cfg), "--mock-llm"])
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_ok(&o);
    assert!(tmp.path().join("results").join("report.md").is_file());
    let quality = fs::read_to_string(tmp.path().join("results").join("cluster_quality.csv")).unwrap();
    assert_eq!(quality.lines().count(), 2);
}

#[test]
fn single_method_flag() {
    let (tmp, data) = fixture(12);
    let out = tmp.path().join("out");
    for s in ["fixations", "features"] {
        assert_ok(&stage(s, &data, &out, &[]));
    }
    assert_ok(&stage(
        "cluster",
        &data,
        &out,
        &["--method", "spectral", "--k-range", "2..=4"],
    ));
    let quality = fs::read_to_string(out.join("cluster_quality.csv")).unwrap();
    assert!(quality.lines().nth(1).unwrap().starts_with("spectral,"));
    let sweep = fs::read_to_string(out.join("cluster_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
}
