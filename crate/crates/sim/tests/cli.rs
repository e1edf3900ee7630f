use std::path::PathBuf;
use std::process::Command;

fn hutxo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hutxo"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hutxo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bench_writes_csv_with_mean_rows() {
    let out = scratch("map.csv");
    let st = hutxo()
        .args(["bench", "map", "--ops", "300", "--p", "0.5", "--threads", "0,2", "--reps", "2", "--seed", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "benchmark",
            "mode",
            "size",
            "threads",
            "seed",
            "rep",
            "wall_ms",
            "accepted",
            "rejected",
            "soft_conflict_pct",
            "ledger_bytes",
            "final_digest"
        ]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| &r[5] == "mean").count(), 2);
    assert!(rows.iter().all(|r| &r[0] == "map" && &r[4] == "4" && &r[7] == "301" && r[11] == rows[0][11]));
    assert!(rows.iter().filter(|r| &r[3] == "0").all(|r| r[9].is_empty()));
    assert!(rows.iter().filter(|r| &r[3] == "2").all(|r| !r[9].is_empty()));
}

#[test]
fn gen_then_run_replays_the_sequence() {
    let seq = scratch("registry.json");
    assert!(hutxo()
        .args(["gen", "registry", "--users", "5", "--out"])
        .arg(&seq)
        .status()
        .unwrap()
        .success());
    let out = hutxo().args(["run", "--threads", "2", "--seq"]).arg(&seq).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["stats"]["accepted"], 16);
    assert_eq!(report["stats"]["rejected"], 0);
    assert_eq!(report["stats"]["ticks"], 1);
}

#[test]
fn compile_emits_a_deployable_sequence() {
    let src = scratch("counter.hurf");
    std::fs::write(&src, "contract Counter { var n = 5; bump() { n = n + 1; } }").unwrap();
    let seq = scratch("counter.json");
    assert!(hutxo().args(["compile", "--hurf"]).arg(&src).arg("--out").arg(&seq).status().unwrap().success());
    let out = hutxo().args(["run", "--seq"]).arg(&seq).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["stats"]["accepted"], 1);
}

#[test]
fn bad_input_fails_cleanly() {
    let src = scratch("broken.hurf");
    std::fs::write(&src, "contract Broken { f( { } }").unwrap();
    let out = hutxo().args(["compile", "--hurf"]).arg(&src).args(["--out", "/dev/null"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.hurf"));
    let out = hutxo().args(["bench", "multisig", "--n", "3"]).output().unwrap();
    assert!(!out.status.success());
}
