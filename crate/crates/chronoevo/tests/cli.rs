use std::fs;
use std::process::Command;

fn chronoevo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chronoevo"))
}

#[test]
fn evolve_trace_and_stats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let genome = dir.path().join("best.json");
    let out = chronoevo()
        .args(["evolve", "--gate", "OR", "--inputs", "001,011", "--count", "0,1", "--mask", "WDtc"])
        .args(["--population", "400", "--elites", "20", "--generations", "3", "--workers", "1", "--out"])
        .arg(&genome)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gen    0"), "{stdout}");

    let traces = dir.path().join("trace");
    let out = chronoevo()
        .args(["trace", "--gate", "OR", "--count", "0,1", "--case", "FT", "--genome"])
        .arg(&genome)
        .arg("--out")
        .arg(&traces)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["spikes.csv", "arrivals.csv", "traces.csv"] {
        assert!(traces.join(f).exists(), "{f}");
    }

    let stats = dir.path().join("stats");
    let out = chronoevo().arg("stats").arg(&genome).arg("--out").arg(&stats).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stats.join("stats_summary.csv").exists());
    assert!(stats.join("stats_histograms.csv").exists());
}

#[test]
fn preset_feeds_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.json");
    let out = chronoevo().args(["preset", "semi-temporal", "--out"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&config).unwrap();
    assert!(text.contains("\"schema_version\": 1"));

    let results = dir.path().join("results");
    let out = chronoevo()
        .args(["grid", "--trials", "1", "--generations", "1", "--population", "50", "--elites", "5", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&results)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells = fs::read_to_string(results.join("cells.csv")).unwrap();
    assert!(cells.starts_with("cell,gate,encoding,mask"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = chronoevo().args(["evolve", "--inputs", "001"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("two comma-separated values"));
    let out = chronoevo().args(["preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
}
