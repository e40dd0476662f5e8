//! Exit codes, messages and outputs of the `decolab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn decolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decolab")).args(args).env("DECOLAB_THREADS", "1").output().expect("the binary runs")
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn bell_deficit_is_one() {
    let o = decolab(&["measure", "--state", &fixture("states/bell.json"), "--measure", "deficit", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["measure"], "deficit");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-4, "{v}");
}

#[test]
fn classical_quantum_file_gives_zero_one_way_discord() {
    for m in ["delta_arrow", "deficit", "geometric", "min_entropy", "eg", "complementarity_vn", "complementarity_quad", "complementarity_min"] {
        for f in ["states/cq.json", "states/cq_not_cc.json", "states/cc.json"] {
            let o = decolab(&["measure", "--state", &fixture(f), "--measure", m, "--samples", "300", "--restarts", "8"]);
            assert_eq!(o.status.code(), Some(0), "{m} {f}: {}", stderr(&o));
            let v = json(&o)["value"].as_f64().unwrap();
            assert!(v <= 1e-5, "{m} on {f}: {v}");
        }
    }
}

#[test]
fn two_way_separates_cq_from_cc() {
    let value = |f: &str| {
        let o = decolab(&["measure", "--state", &fixture(f), "--measure", "two_way_vn", "--restarts", "8"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        json(&o)["value"].as_f64().unwrap()
    };
    assert!(value("states/cc.json") <= 1e-5);
    assert!(value("states/cq_not_cc.json") > 0.1);
}

#[test]
fn csv_report_has_header_and_row() {
    let o = decolab(&["measure", "--state", &fixture("states/bell.json"), "--measure", "geometric", "--format", "csv", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("measure,value,is_upper_bound,converged"));
    assert!(lines[1].starts_with("geometric,5.0000000000"), "{}", lines[1]);
}

#[test]
fn malformed_states_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write_temp(&dir, "trace.json", r#"{"dims":[2,2],"matrix":{"re":[[0.3,0,0,0],[0,0.2,0,0],[0,0,0.2,0],[0,0,0,0.2]]}}"#);
    let o = decolab(&["measure", "--state", trace.to_str().unwrap(), "--measure", "deficit"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("trace invariant") && msg.contains("trace.json.matrix"), "{msg}");

    let negative = write_temp(&dir, "neg.json", r#"{"dims":[2],"matrix":{"re":[[1.2,0],[0,-0.2]]}}"#);
    let o = decolab(&["measure", "--state", negative.to_str().unwrap(), "--measure", "deficit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("positivity"), "{}", stderr(&o));

    let syntax = write_temp(&dir, "syntax.json", "{\"dims\": [2, 2],\n  \"matrix\": [}");
    let o = decolab(&["measure", "--state", syntax.to_str().unwrap(), "--measure", "deficit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.json:2:"), "{}", stderr(&o));

    let single = write_temp(&dir, "single.json", r#"{"dims":[2],"matrix":{"re":[[1,0],[0,0]]}}"#);
    let o = decolab(&["measure", "--state", single.to_str().unwrap(), "--measure", "deficit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("two factors"), "{}", stderr(&o));
}

#[test]
fn unknown_names_exit_two() {
    assert_eq!(decolab(&["verify", "thm9"]).status.code(), Some(2));
    let o = decolab(&["measure", "--state", &fixture("states/bell.json"), "--measure", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown measure"));
}

#[test]
fn starved_optimizer_exits_three() {
    let o = decolab(&["measure", "--state", &fixture("states/cq.json"), "--measure", "deficit", "--restarts", "1", "--max-iters", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}

fn lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn verify_streams_reports_and_a_consistent_summary() {
    let o = decolab(&["verify", "thm1", "--count", "4", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let ls = lines(&o);
    assert_eq!(ls.len(), 4 * 3 + 1);
    let summary = &ls.last().unwrap()["summary"];
    assert_eq!(summary["reports"], 12);
    assert_eq!(summary["all_passed"], true);
    assert!(ls[..12].iter().all(|l| l["passed"] == true && l["suite"] == "thm1"));
}

#[test]
fn undersampled_class_average_fails_honestly() {
    let o = decolab(&["verify", "thm3", "--count", "30", "--samples", "10", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let ls = lines(&o);
    let failed = ls.iter().filter(|l| l["passed"] == false).count();
    assert!(failed > 0);
    assert!(ls.iter().filter(|l| l["claim"] == "thm3.phase_average").all(|l| l["passed"] == true));
    assert_eq!(ls.last().unwrap()["summary"]["failed"], failed);
}

#[test]
fn channel_suite_matches_binary_entropy() {
    let o = decolab(&["verify", "channels", "--count", "6", "--samples", "500", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let ls = lines(&o);
    let standard: Vec<_> = ls.iter().filter(|l| l["claim"] == "phase_flip.leaked_standard").collect();
    assert_eq!(standard.len(), 6);
    for l in standard {
        assert!(l["abs_gap"].as_f64().unwrap() < 1e-9);
    }

    let files: Vec<String> = (0..6).map(|i| fixture(&format!("channels/phase_flip_p0.{i}.json"))).collect();
    let mut args = vec!["verify", "channels", "--samples", "500"];
    for f in &files {
        args.extend(["--channel", f.as_str()]);
    }
    let o = decolab(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

fn csv_rows(o: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = stdout(o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn interferometer_scan_columns_agree() {
    let o = decolab(&["scan", "--family", "interferometer", "--grid", "0:1:5", "--samples", "10000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    assert_eq!(header[..4], ["v", "off_diagonal_sq", "half_quad_entropy_env", "half_mean_certainty"]);
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!((r[1] - r[2]).abs() < 1e-10);
        assert!((r[1] - r[3]).abs() <= 3.0 * r[4] + 1e-12, "{r:?}");
    }
}

#[test]
fn phase_flip_scan_leak_is_monotone() {
    let o = decolab(&["scan", "--family", "phase-flip", "--grid", "0,0.1,0.2,0.3,0.4,0.5", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    let leaked = header.iter().position(|h| h == "leaked_z").unwrap();
    let h_env = header.iter().position(|h| h == "h_z_env").unwrap();
    let reference = header.iter().position(|h| h == "one_minus_binary_entropy").unwrap();
    for w in rows.windows(2) {
        assert!(w[1][leaked] >= w[0][leaked]);
    }
    for r in &rows {
        assert!((r[h_env] - r[reference]).abs() < 1e-9);
    }
}

#[test]
fn scan_grids() {
    let o = decolab(&["scan", "--family", "phase-flip", "--grid", "0.25", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = decolab(&["scan", "--family", "phase-flip", "--grid", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid is empty"));
    let o = decolab(&["scan", "--family", "phase-flip", "--grid", "0:1:0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = decolab(&["scan", "--state", &fixture("states/bell.json"), "--quantity", "deficit,geometric", "--grid", "0,1", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    assert_eq!(header, ["t", "deficit", "geometric"]);
    assert!((rows[0][1] - 1.0).abs() < 1e-4 && rows[1][1].abs() < 1e-6);

    let o = decolab(&["scan", "--channel", &fixture("channels/phase_flip_p0.5.json"), "--grid", "0,1", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn random_states_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ens");
    let o = decolab(&["random", "--dims", "2,2", "--count", "3", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = out.join("state_0000.json");
    assert!(out.join("state_0002.json").exists());
    let o = decolab(&["measure", "--state", first.to_str().unwrap(), "--measure", "geometric", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = decolab(&["random", "--dims", "2,3", "--kind", "haar-pure", "--count", "2", "--seed", "4"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = decolab(&["random", "--dims", "2,0"]);
    assert_eq!(o.status.code(), Some(2));
}
