use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use qcm_core::qstate::QuantumState;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fig(name: &str) -> String {
    root().join("figs").join(name).to_string_lossy().into_owned()
}

fn qcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcm"))
        .args(args)
        .env("QCM_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn asm_resolves_offsets() {
    let out = qcm(&["asm", &fig("fig3.qcm"), "-k", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["lines"][0]["text"], "jnz +2 x");
    assert_eq!(v["lines"][0]["label"], "l0");
    assert_eq!(v["lines"].as_array().unwrap().len(), 7);
    let pretty = qcm(&["asm", &fig("fig3.qcm"), "--format", "pretty"]);
    assert!(String::from_utf8_lossy(&pretty.stdout).contains("jnz +2 x"));
}

#[test]
fn usage_and_parse_errors() {
    let missing = qcm(&["asm", "no/such/file.qcm"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("cannot read"));
    assert_eq!(code(&qcm(&["frobnicate"])), 1);
    assert_eq!(code(&qcm(&["run"])), 1);

    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, ".registers a\nl: nop\nl: nop").unwrap();
    let dup = qcm(&["asm", file.path().to_str().unwrap()]);
    assert_eq!(code(&dup), 2);
    assert!(stderr(&dup).contains("duplicate label"));
}

#[test]
fn run_reaches_final_row() {
    let out = qcm(&["run", &fig("fig3.qcm"), "-k", "4", "--input", "x=3,y=0", "-t", "5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["pc"], 7);
    assert_eq!(terms[0]["br"], 1);
    assert_eq!(terms[0]["regs"]["x"], 4);
    assert_eq!(terms[0]["regs"]["y"], 0);
    assert_eq!(v["halted"], true);
    let state: QuantumState = serde_json::from_value(v).unwrap();
    assert_eq!(state.len(), 1);
}

#[test]
fn run_reports_domain_violation() {
    let out = qcm(&["run", &fig("fig7-expo.qcm"), "--input", "x=0,y=1", "-t", "10"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("multiplication by zero"));
}

#[test]
fn program_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qcm"))
        .args(["run", "-", "--input", "x=3", "-t", "5"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let source = std::fs::read_to_string(fig("fig3.qcm")).unwrap();
    child.stdin.take().unwrap().write_all(source.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["terms"][0]["regs"]["x"], 4);
}

#[test]
fn measure_walk_distribution() {
    let out = qcm(&[
        "measure",
        &fig("walk.qcm"),
        "-k",
        "4",
        "--input",
        "x=3,c=0,i=3",
        "-t",
        "31",
        "--registers",
        "x",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let want = [("0", 0.125), ("2", 0.625), ("4", 0.125), ("6", 0.125)];
    assert_eq!(v.as_object().unwrap().len(), want.len());
    for (k, p) in want {
        assert!((v[k].as_f64().unwrap() - p).abs() < 1e-9, "{k}");
    }
}

#[test]
fn seeded_output_is_byte_identical() {
    let args = [
        "measure",
        &fig("walk.qcm"),
        "--input",
        "x=3,i=3",
        "--registers",
        "x",
        "--samples",
        "20",
        "--seed",
        "11",
    ];
    let a = qcm(&args);
    let b = qcm(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["samples"].as_array().unwrap().len(), 20);
}

#[test]
fn br1_trace_keeps_only_br_one() {
    let out = qcm(&["trace", &fig("walk.qcm"), "--input", "x=3,i=3", "-t", "31", "--br1-only"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let snaps = v["snapshots"].as_array().unwrap();
    assert_eq!(snaps[0]["cycle"], 0);
    for s in &snaps[1..] {
        assert!(s["terms"].as_array().unwrap().iter().all(|t| t["br"] == 1));
    }
    let third_coin = snaps.iter().find(|s| s["cycle"] == 23).expect("cycle 23 kept");
    assert!(!third_coin["terms"]
        .as_array()
        .unwrap()
        .iter()
        .any(|t| t["regs"]["x"] == 3 && t["regs"]["c"] == 1));
}

#[test]
fn sync_failure_names_witnesses() {
    let out = qcm(&["sync", &fig("fig7-expo.qcm"), "-k", "4", "--fix", "x=2", "--vary", "y=1..2", "-t", "10"]);
    assert_eq!(code(&out), 4);
    let v = json(&out);
    assert_eq!(v["verdict"], "not_synchronized");
    let pcs: Vec<&Value> = v["witness"].as_array().unwrap().iter().map(|w| &w["pc"]).collect();
    assert_eq!(pcs, [8, 5]);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["verdict", "pc", "t", "witness", "unitary_deviation"]);
}

#[test]
fn sync_scan_lists_times() {
    let args = ["sync", &fig("fig8-expo.qcm"), "-k", "5", "--fix", "x=2,max=2", "--vary", "y=0..2", "--scan", "30"];
    let out = qcm(&args);
    assert_eq!(code(&out), 0);
    let times: Vec<u64> = json(&out)["times"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_u64().unwrap())
        .collect();
    assert_eq!(times, (21..=30).collect::<Vec<_>>());
    let at = qcm(&["sync", &fig("fig8-expo.qcm"), "--fix", "x=2,max=2", "--vary", "y=0..2", "-t", "21"]);
    assert_eq!(code(&at), 0);
    assert_eq!(json(&at)["verdict"], "synchronized");
    let never = qcm(&["sync", &fig("fig7-expo.qcm"), "-k", "5", "--fix", "x=2", "--vary", "y=1..2", "--scan", "50"]);
    assert_eq!(code(&never), 4);
}

#[test]
fn compare_majorana_and_expo() {
    let out = qcm(&["compare", &fig("majorana.qcm"), "--oracle", "majorana", "-k", "4", "--fix", "i=2", "-t", "21"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["match"], true);
    assert_eq!(v["compared"], 1);

    let full = qcm(&["compare", &fig("majorana.qcm"), "--oracle", "majorana", "--fix", "i=2", "--vary", "x=0..15"]);
    assert_eq!(code(&full), 0);
    assert_eq!(json(&full)["t"], 21);
    assert_eq!(json(&full)["compared"], 16);

    let expo = qcm(&["compare", &fig("fig8-expo.qcm"), "--oracle", "expo", "--fix", "x=2,max=2", "--vary", "y=0..2"]);
    assert_eq!(code(&expo), 0);
    assert_eq!(json(&expo)["t"], 21);

    let wrong = qcm(&["compare", &fig("majorana.qcm"), "--oracle", "majorana", "--fix", "i=2", "-t", "20"]);
    assert_eq!(code(&wrong), 4);
}

#[test]
fn compare_walks() {
    let hist = qcm(&["compare", &fig("walk.qcm"), "--oracle", "cwalk", "--fix", "i=3,x=3", "--history"]);
    assert_eq!(code(&hist), 0);
    let quantum = qcm(&["compare", &fig("walk.qcm"), "--oracle", "cwalk", "--fix", "i=3,x=3"]);
    assert_eq!(code(&quantum), 4);
    let hw = qcm(&["compare", &fig("walk.qcm"), "--oracle", "hwalk", "--fix", "i=2", "--vary", "x=2..13", "--vary", "c=0..1"]);
    assert_eq!(code(&hw), 0);
    let ci = qcm(&["compare", &fig("fig3.qcm"), "--oracle", "cond-inc", "--vary", "x=0..14", "--vary", "y=0..15"]);
    assert_eq!(code(&ci), 0);
}

#[test]
fn embed_modes() {
    let naive = qcm(&[
        "embed",
        &fig("fig1-classical.qcm"),
        "--mode",
        "naive",
        "--input-file",
        &fig("superpos_pc35.json"),
        "-t",
        "1",
    ]);
    assert_eq!(code(&naive), 0);
    assert!(json(&naive)["final_norm"].as_f64().unwrap() <= 1e-9);

    let history = qcm(&[
        "embed",
        &fig("fig1-classical.qcm"),
        "--mode",
        "history",
        "--input-file",
        &fig("superpos_eq3.json"),
        "-t",
        "3",
    ]);
    let v = json(&history);
    assert_eq!(v["verdict"]["verdict"], "entangled");
    assert_eq!(v["verdict"]["proportional"], false);
    assert!((v["final_norm"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let copy = qcm(&[
        "embed",
        &fig("fig1-classical.qcm"),
        "--mode",
        "history-copy",
        "--input-file",
        &fig("superpos_eq3.json"),
        "-t",
        "3",
    ]);
    let v = json(&copy);
    assert_eq!(v["residual_verdict"]["verdict"], "entangled");
    assert_eq!(v["residual"]["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn input_file_is_renormalized() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"amps":[{{"re":1,"im":0,"regs":{{"x":0,"y":3}}}},{{"re":-1,"im":0,"regs":{{"x":3}}}}]}}"#).unwrap();
    let out = qcm(&["run", &fig("fig3.qcm"), "--input-file", file.path().to_str().unwrap(), "-t", "5"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("renormalized"));
    let state: QuantumState = serde_json::from_value(json(&out)).unwrap();
    assert!((state.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn every_corpus_file_assembles_and_pretty_prints() {
    let programs = ["fig1-classical.qcm", "fig3.qcm", "fig7-expo.qcm", "fig8-expo.qcm", "walk.qcm", "majorana.qcm"];
    for p in programs {
        let out = qcm(&["asm", &fig(p), "-k", "4"]);
        assert_eq!(code(&out), 0, "{p}: {}", stderr(&out));
        let pretty = qcm(&["asm", &fig(p), "-k", "4", "--format", "pretty"]);
        assert_eq!(code(&pretty), 0);
    }
    let runs: [(&str, &str, &str); 5] = [
        ("fig3.qcm", "x=3", "5"),
        ("fig7-expo.qcm", "x=2,y=2", "12"),
        ("fig8-expo.qcm", "x=2,y=1,max=2", "21"),
        ("walk.qcm", "x=3,i=2", "22"),
        ("majorana.qcm", "x=5,i=1", "14"),
    ];
    for (p, input, t) in runs {
        for cmd in ["run", "trace", "measure"] {
            for format in ["json", "pretty"] {
                let out = qcm(&[cmd, &fig(p), "--input", input, "-t", t, "--format", format]);
                assert_eq!(code(&out), 0, "{cmd} {p}: {}", stderr(&out));
                assert!(!out.stdout.is_empty());
            }
        }
    }
}

#[test]
fn color_only_when_asked() {
    let args = ["sync", &fig("fig3.qcm"), "--vary", "x=0,3", "-t", "5", "--format", "pretty"];
    let plain = qcm(&args);
    assert!(!plain.stdout.contains(&0x1b));
    let colored = Command::new(env!("CARGO_BIN_EXE_qcm"))
        .args(args)
        .env("QCM_COLOR", "always")
        .output()
        .unwrap();
    assert!(colored.stdout.contains(&0x1b));
}
