use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kdewatch(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdewatch"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("KDEWATCH_OUTPUT_DIR")
        .output()
        .expect("spawn kdewatch")
}

fn ok(args: &[&str], out: &Path) {
    let o = kdewatch(args, out);
    assert!(
        o.status.success(),
        "kdewatch {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
        - 1
}

fn synth_into(dir: &Path) -> String {
    ok(&["synth", "--seed", "2026", "--anomaly-offset", "0.4"], dir);
    dir.join("series.csv").to_string_lossy().into_owned()
}

#[test]
fn detect_on_obvious_anomalies_scores_one() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    let out = tmp.path().join("detect");
    ok(&["detect", "--input", &series], &out);
    let r = report(&out);
    let m = &r["results"]["metrics"];
    assert!(m["n_anomalies"].as_u64().unwrap() > 0);
    assert_eq!(m["f1"].as_f64().unwrap(), 1.0, "{m}");
    assert_eq!(r["config"]["detector"]["n_in"], 10);
    assert_eq!(r["config"]["detector"]["kernel"]["bandwidth"], 0.05);
    assert_eq!(data_rows(&out.join("results.csv")), 1000);
}

#[test]
fn threshold_sweep_has_five_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    let out = tmp.path().join("sweep");
    ok(
        &[
            "sweep",
            "--input",
            &series,
            "--axis",
            "p_thres=1e-5,1e-4,1e-3,1e-2,1e-1",
        ],
        &out,
    );
    assert_eq!(data_rows(&out.join("sweep.csv")), 5);
    assert_eq!(report(&out)["results"]["sweep"]["cells"], 5);
}

#[test]
fn two_axis_sweep_is_a_full_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    let out = tmp.path().join("sweep");
    ok(
        &[
            "sweep",
            "--input",
            &series,
            "--axis",
            "sigma_kernel=0.03,0.05,0.08",
            "--axis",
            "perturbation=none,vth-15mv",
            "--trials",
            "2",
        ],
        &out,
    );
    assert_eq!(data_rows(&out.join("sweep.csv")), 6);
}

#[test]
fn digital_compare_error_is_small() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["digital-compare", "--bits", "8", "--lut-bits", "16"],
        tmp.path(),
    );
    let err = report(tmp.path())["results"]["max_abs_error"].as_f64().unwrap();
    assert!(err < 2f64.powi(-6), "max error {err}");
    assert_eq!(data_rows(&tmp.path().join("digital.csv")), 10 * 256);
}

#[test]
fn rmse_study_writes_table_and_curves() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["rmse-study", "--trials", "5", "--n-in-values", "5,50"],
        tmp.path(),
    );
    assert_eq!(data_rows(&tmp.path().join("rmse.csv")), 2);
    assert_eq!(data_rows(&tmp.path().join("curves.csv")), 256);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    let args = [
        "sweep",
        "--input",
        &series,
        "--noise-sigma",
        "0.02",
        "--trials",
        "3",
    ];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&args, &a);
    ok(&args, &b);
    for f in ["sweep.csv", "report.json"] {
        let (x, y) = (
            fs::read_to_string(a.join(f)).unwrap(),
            fs::read_to_string(b.join(f)).unwrap(),
        );
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn outputs_embed_the_seed_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "77"], tmp.path());
    let text = fs::read_to_string(tmp.path().join("series.csv")).unwrap();
    assert!(text.lines().any(|l| l == "# seed: 77"));
    assert!(text.lines().any(|l| l.starts_with("# config: {")));
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    for args in [
        vec!["detect", "--input", series.as_str(), "--p-thres", "0"],
        vec!["detect", "--input", "/no/such/file.csv"],
        vec!["detect", "--input", series.as_str(), "--no-such-flag"],
        vec!["sweep", "--input", series.as_str(), "--axis", "bogus=1,2"],
        vec!["synth", "--perturb-preset", "unknown"],
    ] {
        let o = kdewatch(&args, &tmp.path().join("x"));
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = kdewatch(
        &["detect", "--input", &series, "--p-thres", "0"],
        &tmp.path().join("x"),
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("--p-thres"));
}

#[test]
fn runtime_errors_exit_with_one_and_leave_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "value,is_anomaly\n0.1,0\nnot-a-number,0\n").unwrap();
    let out = tmp.path().join("out");
    let o = kdewatch(&["detect", "--input", bad.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 0);
}

#[test]
fn flag_overrides_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let series = synth_into(tmp.path());
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "n_in = 20\nsigma_kernel = 0.08\n").unwrap();
    let out = tmp.path().join("detect");
    ok(
        &[
            "detect",
            "--config",
            cfg.to_str().unwrap(),
            "--input",
            &series,
            "--n-in",
            "5",
        ],
        &out,
    );
    let detector = &report(&out)["config"]["detector"];
    assert_eq!(detector["n_in"], 5);
    assert_eq!(detector["kernel"]["bandwidth"], 0.08);
}

#[test]
fn directory_sweep_maps_reference_series() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    let shapes = [
        ("real_4", 8, 1439),
        ("real_6", 5, 1423),
        ("real_10", 13, 1439),
        ("real_15", 10, 1439),
        ("real_42", 44, 1440),
    ];
    for (name, anomalies, len) in shapes {
        let mut text = String::from("timestamp,value,is_anomaly\n");
        for i in 0..len {
            let anomalous = i % 29 == 3 && i / 29 < anomalies;
            let v = if anomalous { 9.0 } else { (i as f64 * 0.1).sin() };
            text.push_str(&format!("{i},{v},{}\n", u8::from(anomalous)));
        }
        fs::write(corpus.join(format!("{name}.csv")), text).unwrap();
    }
    let out = tmp.path().join("out");
    ok(&["sweep", "--input", corpus.to_str().unwrap()], &out);
    let r = report(&out);
    let names: Vec<_> = r["results"]["mapping"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names, ["real_4", "real_6", "real_10", "real_15", "real_42"]);
    for i in 1..=5 {
        assert_eq!(data_rows(&out.join(format!("sweep_ts{i}.csv"))), 5);
    }
}
