use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn lpw(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpw"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("LPW_THREADS")
        .output()
        .expect("lpw runs")
}

fn write_config(dir: &Path, v: &Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn zero_p_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "norm": { "p": 0.0 } }));
    let o = lpw(&["norm", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("norm.p"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (json!({ "grid": { "samples": 1000 } }), "grid.samples"),
        (json!({ "ceilings": { "equivalence": 0.5 } }), "ceilings.equivalence"),
        (json!({ "fixtures": { "holder_weights": ["pow:abc"] } }), "fixtures.holder_weights[0]"),
        (json!({ "suites": ["nope"] }), "suites"),
        (json!({ "corpus": { "size": 0 } }), "corpus.size"),
        (json!({ "weights": { "p": 1.0 } }), "weights.p"),
    ];
    for (v, field) in cases {
        let cfg = write_config(dir.path(), &v);
        let o = lpw(&["verify", "all", "--config", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2), "{v}");
        assert!(stderr(&o).contains(field), "{v}: {}", stderr(&o));
        assert!(!dir.path().join("out/report.json").exists());
    }
}

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"grid\": {\n    \"n\": 1,,\n  }\n}\n").unwrap();
    let o = lpw(&["verify", "all", "--config", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "grid": { "sampels": 4096 } }));
    let o = lpw(&["norm", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sampels"), "{}", stderr(&o));
}

#[test]
fn unknown_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["verify", "no_such_suite"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_suite"));
}

#[test]
fn zero_threads_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["verify", "partition", "--threads", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn self_equivalence_suite_gives_unit_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "suites": ["self_equivalence"], "corpus": { "size": 8 } }));
    let o = lpw(&["verify", "all", "--config", &cfg, "--threads", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("out/report.json"));
    let suites = r["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["min"], json!(1.0));
    assert_eq!(suites[0]["max"], json!(1.0));
    for p in suites[0]["series"][0]["points"].as_array().unwrap() {
        assert_eq!(p[1], json!(1.0));
    }
    let timings = read_json(&dir.path().join("out/timings.json"));
    assert_eq!(timings["threads"], json!(1));
}

#[test]
fn report_renders_single_suite_with_source_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["verify", "bmo"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let source = read_json(&out.join("report.json"));
    let first_table = std::fs::read_to_string(out.join("report.txt")).unwrap();

    let rendered = lpw(&["report"], dir.path());
    assert_eq!(rendered.status.code(), Some(0));
    let table = String::from_utf8(rendered.stdout).unwrap();
    assert_eq!(table, first_table);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cells: Vec<&str> = rows[0].split_whitespace().collect();
    assert_eq!(cells[0], "bmo");
    let s = &source["suites"][0];
    assert_eq!(cells[1], serde_json::to_string(&s["min"]).unwrap());
    assert_eq!(cells[2], serde_json::to_string(&s["max"]).unwrap());
    assert_eq!(cells[3], "pass");

    let csv = std::fs::read_to_string(out.join("csv/bmo.csv")).unwrap();
    let ratios = s["series"][0]["points"].as_array().unwrap().len();
    assert_eq!(csv.lines().count(), ratios + 1);
    assert!(csv.starts_with("series,ratio,label,value\n"));
}

#[test]
fn empty_report_renders_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["verify", "partition"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("out/report.json");
    let mut r = read_json(&path);
    r["suites"] = json!([]);
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, serde_json::to_string(&r).unwrap()).unwrap();
    let o = lpw(&["report", empty.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("suite"));
}

#[test]
fn malformed_report_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    std::fs::write(&p, "{ \"version\": 1, \"suites\": 3 }").unwrap();
    let o = lpw(&["report", p.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = lpw(&["report", dir.path().join("missing.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_suite_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // An impossible ceiling on the Calderón residual.
    let cfg = write_config(dir.path(), &json!({ "ceilings": { "calderon": 1e-300 }, "corpus": { "size": 4 } }));
    let o = lpw(&["verify", "calderon", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let r = read_json(&dir.path().join("out/report.json"));
    assert_eq!(r["pass"], json!(false));
}

#[test]
fn norm_accepts_infinite_q_and_echoes_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "norm": { "space": "B", "p": 2.0, "q": "inf", "weights": "pow:0.3" } }));
    let o = lpw(&["norm", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec = read_json(&dir.path().join("out/norm.json"));
    assert_eq!(rec["q"], json!("inf"));
    assert_eq!(rec["space"], json!("B"));
    assert!(rec["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_flag_changes_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let a = lpw(&["norm"], dir.path());
    let va = read_json(&dir.path().join("out/norm.json"))["value"].clone();
    let b = lpw(&["norm", "--seed", "7"], dir.path());
    let vb = read_json(&dir.path().join("out/norm.json"))["value"].clone();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(va, vb);
}

#[test]
fn decompose_writes_bands_and_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["decompose"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = dir.path().join("out/decompose");
    for k in -3..=8 {
        assert!(d.join(format!("band_k{k}.json")).exists(), "level {k}");
        assert!(d.join(format!("band_k{k}.bin")).exists(), "level {k}");
    }
    let lines = std::fs::read_to_string(d.join("coefficients.jsonl")).unwrap();
    assert!(lines.lines().count() > 0);
}

#[test]
fn weight_probes_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpw(&["weights", "ap"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ap = read_json(&dir.path().join("out/weights_ap.json"));
    // |x|^{1/2} has A_2 constant 1/(1 - 1/4) on origin cubes.
    assert!((ap["constant"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-6);

    let o = lpw(&["weights", "xclass"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let x = read_json(&dir.path().join("out/weights_xclass.json"));
    assert_eq!(x["fit"]["ordered"], json!(true));

    let o = lpw(&["weights", "rh"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rh = read_json(&dir.path().join("out/weights_rh.json"));
    assert_eq!(rh["ratios"].as_array().unwrap().len(), 20);
}
