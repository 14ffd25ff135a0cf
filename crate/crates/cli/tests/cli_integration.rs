//! End-to-end tests of the `spillover` binary: subcommand contracts, exit
//! codes, and output shapes on the bundled fixture.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spillover"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "pipeline", "ingest", "adf", "spillover", "rolling", "network", "regress", "quantreg",
        "sea",
    ] {
        let output = bin().args([sub, "--help"]).output().unwrap();
        assert!(output.status.success(), "{sub} --help failed");
        let text = String::from_utf8_lossy(&output.stdout);
        assert!(text.contains("--"), "{sub} help lists no flags");
    }
}

#[test]
fn ingest_reserializes_panel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clean.csv");
    run_ok(&[
        "ingest",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--winsorize",
        "0.01",
        "--output",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("year,Antverpia,"));
    assert_eq!(text.lines().count(), 222); // header + 221 years
}

#[test]
fn ingest_gap_exit_code_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let gappy = dir.path().join("gappy.csv");
    std::fs::write(&gappy, "year,a\n1700,1.0\n1702,1.2\n1703,1.3\n").unwrap();
    let out = dir.path().join("out.csv");
    let output = bin()
        .args([
            "ingest",
            "--panel",
            gappy.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("gap in year sequence at 1701"));

    // Lenient policy keeps the longest block.
    run_ok(&[
        "ingest",
        "--panel",
        gappy.to_str().unwrap(),
        "--gap-policy",
        "truncate",
        "--output",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("1702") && !text.contains("1700"));
}

#[test]
fn adf_writes_location_statistic_bound_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adf.csv");
    run_ok(&[
        "adf",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--lags",
        "10",
        "--difference",
        "--output",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("location,statistic,p_value\n"));
    assert_eq!(text.lines().count(), 7); // header + 6 locations
    // Differenced synthetic series are stationary.
    for line in text.lines().skip(1) {
        assert!(line.ends_with("<0.01"), "{line}");
    }
}

#[test]
fn spillover_window_produces_single_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let json = dir.path().join("table.json");
    let model = dir.path().join("model.json");
    run_ok(&[
        "spillover",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--winsorize",
        "0.01",
        "--window",
        "35",
        "--horizon",
        "10",
        "--order",
        "1",
        "--output",
        out.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "--emit-model",
        model.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("location,"));
    assert!(text.contains("To Others"));
    assert!(text.contains("From Others"));
    assert_eq!(text.lines().count(), 8); // header + 6 rows + from-others row
    assert!(json.exists() && model.exists());
}

#[test]
fn network_thresholds_table_to_graphml() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("table.json");
    run_ok(&[
        "spillover",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--output",
        dir.path().join("table.csv").to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    let graphml = dir.path().join("net.graphml");
    run_ok(&[
        "network",
        "--table",
        json.to_str().unwrap(),
        "--coords",
        fixture("coords.csv").to_str().unwrap(),
        "--retain",
        "0.2",
        "--highlight",
        "0.5",
        "--format",
        "graphml",
        "--output",
        graphml.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&graphml).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("edgedefault=\"directed\""));
    assert!(text.contains("<node id=\"Antverpia\">"));
    // The fixture's full-sample table has exactly four edges at or below
    // 0.2pp; the cutoff drops them from the complete 30-edge digraph.
    assert_eq!(text.matches("<edge ").count(), 26);

    let complete = dir.path().join("complete.graphml");
    run_ok(&[
        "network",
        "--table",
        json.to_str().unwrap(),
        "--retain",
        "0",
        "--highlight",
        "0",
        "--format",
        "graphml",
        "--output",
        complete.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&complete).unwrap();
    assert_eq!(text.matches("<edge ").count(), 30);
}

#[test]
fn network_rejects_unknown_format_with_config_exit() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("table.json");
    run_ok(&[
        "spillover",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--output",
        dir.path().join("t.csv").to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    let output = bin()
        .args([
            "network",
            "--table",
            json.to_str().unwrap(),
            "--format",
            "gexf",
            "--output",
            dir.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn rolling_then_regress_quantreg_sea() {
    let dir = tempfile::tempdir().unwrap();
    let rolling_dir = dir.path().join("rolling");
    run_ok(&[
        "rolling",
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--winsorize",
        "0.01",
        "--windows",
        "30..34",
        "--workers",
        "3",
        "--output-dir",
        rolling_dir.to_str().unwrap(),
    ]);
    for w in 30..=34 {
        assert!(rolling_dir.join(format!("window_{w}.csv")).exists());
    }
    let average = rolling_dir.join("average.csv");
    let text = std::fs::read_to_string(&average).unwrap();
    assert!(text.starts_with("year,value,n_windows\n"));

    let regress_dir = dir.path().join("regress");
    run_ok(&[
        "regress",
        "--index",
        average.to_str().unwrap(),
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--catalog",
        fixture("conflicts.csv").to_str().unwrap(),
        "--exclude",
        "1628..1648",
        "--output-dir",
        regress_dir.to_str().unwrap(),
    ]);
    let ols = std::fs::read_to_string(regress_dir.join("ols.csv")).unwrap();
    assert!(ols.contains("log(Fatalities)"));
    assert!(ols.contains("full_sample,excluding_ranges"));

    let quantreg_dir = dir.path().join("quantreg");
    run_ok(&[
        "quantreg",
        "--index",
        average.to_str().unwrap(),
        "--panel",
        fixture("panel.csv").to_str().unwrap(),
        "--catalog",
        fixture("conflicts.csv").to_str().unwrap(),
        "--quantiles",
        "0.25,0.5",
        "--bootstrap",
        "50",
        "--seed",
        "7",
        "--output-dir",
        quantreg_dir.to_str().unwrap(),
    ]);
    let qr = std::fs::read_to_string(quantreg_dir.join("quantreg_full.csv")).unwrap();
    assert!(qr.contains("q25,q50"));
    let coefs = std::fs::read_to_string(quantreg_dir.join("quantile_coefficients_full.csv")).unwrap();
    assert!(coefs.starts_with("tau,coefficient,lower,upper\n"));
    assert_eq!(coefs.lines().count(), 3);

    let sea_out = dir.path().join("sea.csv");
    run_ok(&[
        "sea",
        "--index",
        average.to_str().unwrap(),
        "--variant",
        "midpoint",
        "--spans",
        "1618..1648,1688..1697,1700..1721,1701..1714,1756..1762",
        "--n-boot",
        "500",
        "--seed",
        "11",
        "--output",
        sea_out.to_str().unwrap(),
    ]);
    let sea = std::fs::read_to_string(&sea_out).unwrap();
    assert!(sea.starts_with("lag,composite,band10_lo"));
    assert_eq!(sea.lines().count(), 12); // header + lags -5..=5
}

#[test]
fn pipeline_rejects_infeasible_window_before_computing() {
    // 14 locations with a 5-year window: rank-deficiency caught at
    // validation, exit code 2, no run directory outputs.
    let dir = tempfile::tempdir().unwrap();
    let mut panel = String::from("year");
    for j in 0..14 {
        panel.push_str(&format!(",c{j}"));
    }
    panel.push('\n');
    let mut state = 1u64;
    for year in 1700..1760 {
        panel.push_str(&year.to_string());
        for _ in 0..14 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            panel.push_str(&format!(",{}", (state >> 40) as f64 / 1e6));
        }
        panel.push('\n');
    }
    std::fs::write(dir.path().join("panel.csv"), panel).unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "output_dir = \"out\"\n[inputs]\npanel = \"panel.csv\"\n[rolling]\nwindows = [5]\n",
    )
    .unwrap();
    let output = bin()
        .args([
            "pipeline",
            "--config",
            dir.path().join("run.toml").to_str().unwrap(),
            "--output-dir",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("window 5 infeasible"), "{stderr}");
    assert!(stderr.contains("curse of dimensionality"), "{stderr}");
    assert!(!dir.path().join("out/rolling").exists());
}

#[test]
fn pipeline_marks_failed_stage_and_keeps_partials() {
    // A catalog whose only regional events carry zero fatalities empties the
    // regression design: the run aborts at that stage with the failure
    // marker present and earlier outputs retained.
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("panel.csv"), dir.path().join("panel.csv")).unwrap();
    std::fs::write(
        dir.path().join("bad_catalog.csv"),
        "name,region,start_year,end_year,fatalities\nGhost War,3,1700,1710,0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "output_dir = \"out\"\n[inputs]\npanel = \"panel.csv\"\ncatalog = \"bad_catalog.csv\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let output = bin()
        .args([
            "pipeline",
            "--config",
            dir.path().join("run.toml").to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("stage regression"), "{stderr}");
    assert!(out_dir.join("FAILED").exists());
    assert!(out_dir.join("rolling/average.csv").exists());
    assert!(!out_dir.join("manifest.json").exists());
}

#[test]
fn pipeline_manifest_lists_every_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    run_ok(&[
        "pipeline",
        "--config",
        fixture("run.toml").to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    let listed: std::collections::BTreeSet<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect();
    // Walk the run directory; every file except the manifest must be listed.
    let mut found = std::collections::BTreeSet::new();
    let mut stack = vec![out_dir.clone()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let entry = entry.unwrap();
            if entry.file_type().unwrap().is_dir() {
                stack.push(entry.path());
            } else {
                let rel = entry
                    .path()
                    .strip_prefix(&out_dir)
                    .unwrap()
                    .to_str()
                    .unwrap()
                    .replace('\\', "/");
                if rel != "manifest.json" {
                    found.insert(rel);
                }
            }
        }
    }
    assert_eq!(listed, found, "manifest does not match directory contents");
    assert!(listed.contains("sea/midpoint.csv"));
    assert!(listed.contains("network/snapshot_1648.graphml"));
}
