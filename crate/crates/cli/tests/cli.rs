//! End-to-end runs of the `hiercc` binary: exit codes and output formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn hiercc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiercc")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hiercc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_example_passes_and_writes_report() {
    let dir = scratch("verify");
    let report = dir.join("report.json");
    let o = hiercc(&[
        "verify",
        "--k1",
        "3",
        "--k2",
        "2",
        "--n",
        "6",
        "--scheme",
        "both",
        "--mode",
        "exhaustive",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    let sweeps = json["sweeps"].as_array().unwrap();
    assert_eq!(sweeps.len(), 2);
    for s in sweeps {
        assert_eq!((s["attempted"].as_u64(), s["passed"].as_u64()), (Some(720), Some(720)));
        assert_eq!(s["mode"]["mode"], "exhaustive");
    }
    assert_eq!(sweeps[0]["rates"]["r2"], "37/30");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_instance_is_usage_error() {
    let o = hiercc(&["verify", "--k1", "2", "--k2", "1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("K2 must be at least 2"));
    assert_eq!(hiercc(&["verify", "--k1", "2", "--k2", "2", "--n", "3", "--prime", "2"]).status.code(), Some(2));
    assert_eq!(hiercc(&["verify", "--k1", "2", "--k2", "2", "--n", "5"]).status.code(), Some(2));
    assert_eq!(hiercc(&["verify", "--bogus"]).status.code(), Some(2));
}

#[test]
fn failing_sweep_exits_one_with_reproducers() {
    let dir = scratch("fail");
    let report = dir.join("r.json");
    let o = hiercc(&[
        "verify",
        "--k1",
        "1",
        "--k2",
        "3",
        "--n",
        "3",
        "--scheme",
        "1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("only validated for K1 >= 2"), "{err}");
    assert!(err.contains("published 1.16"), "{err}");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let failures = json["sweeps"][0]["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 6);
    assert_eq!(failures[0]["demand"], serde_json::json!([1, 2, 3]));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_supplies_instance_and_random_mode() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "k1 = 4\nk2 = 2\nn = 8\nmode = random\ntrials = 25\nseed = 5\nscheme = 2\n").unwrap();
    let r1 = dir.join("a.json");
    let r2 = dir.join("b.json");
    for r in [&r1, &r2] {
        let o = hiercc(&["verify", "--config", conf.to_str().unwrap(), "--report", r.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&r1).unwrap();
    assert_eq!(a, std::fs::read(&r2).unwrap(), "reports must be byte-identical");
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["sweeps"][0]["mode"], serde_json::json!({"mode": "random", "seed": 5, "trials": 25}));
    assert_eq!(json["sweeps"][0]["scheme"], "Second");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn raw_files_are_ingested() {
    let dir = scratch("files");
    let names: Vec<PathBuf> = (1..=3).map(|i| dir.join(format!("f{i}.bin"))).collect();
    std::fs::write(&names[0], b"hierarchical").unwrap();
    std::fs::write(&names[1], (0u8..=255).collect::<Vec<_>>()).unwrap();
    std::fs::write(&names[2], b"").unwrap();
    let list = names.iter().map(|p| p.to_str().unwrap()).collect::<Vec<_>>().join(",");
    let report = dir.join("r.json");
    let o = hiercc(&[
        "verify",
        "--k1",
        "2",
        "--k2",
        "2",
        "--n",
        "3",
        "--files",
        &list,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let sizes: Vec<u64> = json["files"].as_array().unwrap().iter().map(|f| f["bytes"].as_u64().unwrap()).collect();
    assert_eq!(sizes, [12, 256, 0]);
    // p = 3 needs 6 digits per byte; 256 bytes -> 1536 symbols -> 128 per subfile
    assert_eq!((json["prime"].as_u64(), json["symbols_per_byte"].as_u64()), (Some(3), Some(6)));
    assert_eq!(json["subfile_len"].as_u64(), Some(128));

    let short = hiercc(&["verify", "--k1", "2", "--k2", "2", "--n", "3", "--files", names[0].to_str().unwrap()]);
    assert_eq!(short.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn table_csv_and_json() {
    let o = hiercc(&["table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,k1,k2,scheme,m1_frac,m2_frac,r1_frac,r2_frac,rbar_frac,m1,m2,r1,r2,rbar,source\n"));
    assert!(text.contains("8,4,2,1,169/28,12/7,1/7,11/8,79/14,6.04,1.71,0.14,1.38,5.64,computed"));
    assert!(text.contains("3,1,3,1,2,1,1/2,4/3,11/6,2.00,1.00,0.50,1.33,1.83,measured"));
    assert!(!text.contains(",paper"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("paper-discrepancy: r2 published 1.16"));

    let o = hiercc(&["table", "--with-paper-baselines", "--row", "10,5,2", "--row", "4,1,1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4 + 8 + 1);
    let knmd = rows.iter().find(|r| r["scheme"] == "KNMD" && r["reference"] == "table II row 3").unwrap();
    assert_eq!(knmd["rbar"]["decimal"], "6.89");
    assert_eq!(rows.last().unwrap()["source"], "error");
}

#[test]
fn trace_and_points() {
    let o = hiercc(&["trace"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Y^1 = W^{12}_2 + W^{13}_3 + W^{14}_4 + W^{15}_5 + W^{16}_6"));
    assert!(text.contains("mirror 1 C: W^{12}_1\nmirror 1 C: W^{23}_2"));

    let o = hiercc(&["trace", "--demand", "1,1,2,2,3,3", "--n", "3", "--scheme", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("-W^{12}_1"));
    assert!(!text.contains("-- phase C"));

    let o = hiercc(&["points", "--k1", "3", "--k2", "2", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"corner (0,N)\",0,6,0,0,0,0.00,6.00,0.00,0.00,0.00,corner,as-stated-in-paper"));
    assert!(text.contains("scheme 2,12/5,73/30,1/5,1,16/5,2.40,2.43,0.20,1.00,3.20,computed,"));
}
