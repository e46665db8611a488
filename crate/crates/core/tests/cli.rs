use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_coarsekit");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("COARSEKIT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Space, net and graph of the radius-6 ball in Z² inside `dir`.
fn z2_graph(dir: &Path) {
    ok(
        dir,
        &[
            "space", "gen", "--kind", "zn", "--dims", "2", "--radius", "6", "-o", "s.json",
        ],
    );
    ok(dir, &["net", "build", "--eps", "1", "s.json", "-o", "n.json"]);
    ok(dir, &["rips", "build", "n.json", "-o", "g.json", "--edges", "e.csv"]);
}

#[test]
fn help_lists_every_subcommand_and_exit_code() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), &["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "space",
        "net",
        "rips",
        "partition",
        "control",
        "ponzi",
        "iso",
        "sobolev",
        "delta",
        "crosscheck",
        "pipeline",
    ] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
    assert!(text.contains("4 assertion failed"));
    assert!(text.contains("R,K*,feasible_at_cap,runtime"));
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run(dir.path(), &["net", "build", "s.json"])), 1);
    assert_eq!(
        code(&run(
            dir.path(),
            &["space", "gen", "--kind", "moebius", "--radius", "2"]
        )),
        1
    );
    assert_eq!(code(&run(dir.path(), &["control", "--rho", "affine:-1"])), 1);
}

#[test]
fn malformed_config_exits_1_with_message() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let out = run(dir.path(), &["pipeline", "--config", "bad.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed configuration"));

    std::fs::write(
        dir.path().join("extra.json"),
        r#"{"space":{"kind":"zn","dims":1,"radius":5},"eps":1,"colour":"red"}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["pipeline", "--config", "extra.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn io_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&run(dir.path(), &["net", "build", "--eps", "1", "missing.json"])),
        2
    );
    std::fs::write(dir.path().join("garbage.json"), "garbage").unwrap();
    assert_eq!(code(&run(dir.path(), &["space", "info", "garbage.json"])), 2);
}

#[test]
fn size_cap_exits_3_and_pipeline_keeps_partial_report() {
    let dir = TempDir::new().unwrap();
    let args = [
        "space",
        "gen",
        "--kind",
        "zn",
        "--dims",
        "2",
        "--radius",
        "30",
        "--max-points",
        "100",
    ];
    assert_eq!(code(&run(dir.path(), &args)), 3);

    let out = run(
        dir.path(),
        &[
            "pipeline",
            "--kind",
            "zn",
            "--dims",
            "2",
            "--radius",
            "30",
            "--eps",
            "1",
            "--max-points",
            "100",
            "--out-dir",
            "capped",
        ],
    );
    assert_eq!(code(&out), 3);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("capped/report.json")).unwrap()).unwrap();
    assert_eq!(report["status"]["state"], "failed");
    assert_eq!(report["status"]["stage"], "space");
    assert_eq!(report["status"]["exit_code"], 3);
}

#[test]
fn tampered_certificate_exits_4() {
    let dir = TempDir::new().unwrap();
    z2_graph(dir.path());
    ok(
        dir.path(),
        &[
            "ponzi",
            "sweep",
            "--rmin",
            "1",
            "--rmax",
            "3",
            "--step",
            "1",
            "g.json",
            "-o",
            "sw.csv",
            "--certificate",
            "c.json",
        ],
    );
    let out = ok(dir.path(), &["ponzi", "verify", "c.json", "g.json"]);
    assert_eq!(stdout_json(&out)["holds"], true);

    let path = dir.path().join("c.json");
    let mut cert: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let k = cert["k"].as_f64().unwrap();
    cert["k"] = Value::from(k / 2.0);
    std::fs::write(&path, cert.to_string()).unwrap();
    let out = run(dir.path(), &["ponzi", "verify", "c.json", "g.json"]);
    assert_eq!(code(&out), 4);
    let doc = stdout_json(&out);
    assert_eq!(doc["holds"], false);
    let failed: Vec<&Value> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["holds"] == false)
        .collect();
    assert!(!failed.is_empty());
    for c in failed {
        assert!(c["lhs"].is_number() && c["rhs"].is_number() && c["name"].is_string());
    }
}

#[test]
fn out_dir_env_var_sets_default_location_and_flag_overrides_it() {
    let dir = TempDir::new().unwrap();
    let env_dir = dir.path().join("from-env");
    std::fs::create_dir(&env_dir).unwrap();
    let status = Command::new(BIN)
        .args(["space", "gen", "--kind", "zn", "--radius", "4"])
        .current_dir(dir.path())
        .env("COARSEKIT_OUT_DIR", &env_dir)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(env_dir.join("space.json").is_file());
    assert!(!dir.path().join("space.json").exists());

    let flag_dir = dir.path().join("from-flag");
    std::fs::create_dir(&flag_dir).unwrap();
    let status = Command::new(BIN)
        .args([
            "--out-dir",
            "from-flag",
            "space",
            "gen",
            "--kind",
            "zn",
            "--radius",
            "4",
        ])
        .current_dir(dir.path())
        .env("COARSEKIT_OUT_DIR", &env_dir)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(flag_dir.join("space.json").is_file());

    let status = Command::new(BIN)
        .args([
            "pipeline", "--kind", "zn", "--radius", "12", "--eps", "1", "--stages", "net,rips",
        ])
        .current_dir(dir.path())
        .env("COARSEKIT_OUT_DIR", &env_dir)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(env_dir.join("report.json").is_file() && env_dir.join("sweep.csv").is_file());
}

#[test]
fn pipeline_without_a_sweep_writes_a_header_only_csv() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "pipeline",
            "--kind",
            "zn",
            "--radius",
            "12",
            "--eps",
            "1",
            "--stages",
            "net,rips,partition",
            "--out-dir",
            "o",
        ],
    );
    let csv = std::fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    assert_eq!(csv, "R,K*,feasible_at_cap,runtime\n");
}

#[test]
fn pipeline_sweep_rows_match_the_report() {
    let dir = TempDir::new().unwrap();
    let out = ok(
        dir.path(),
        &[
            "pipeline",
            "--kind",
            "zn",
            "--radius",
            "30",
            "--eps",
            "1",
            "--rmin",
            "5",
            "--rmax",
            "25",
            "--step",
            "5",
            "--stages",
            "net,rips,ponzi",
            "--threads",
            "2",
            "--out-dir",
            "o",
        ],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip_while(|l| *l != "R,K*")
        .skip(1)
        .take_while(|l| l.contains(','))
        .map(|l| {
            let (r, k) = l.split_once(',').unwrap();
            (r.parse().unwrap(), k.parse().unwrap())
        })
        .collect();
    assert_eq!(
        rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        vec![5.0, 10.0, 15.0, 20.0, 25.0]
    );
    assert!(text.contains("growth: affine-needed"));

    let mut reader = csv::Reader::from_path(dir.path().join("o/sweep.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["R", "K*", "feasible_at_cap", "runtime"]);
    let file_rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows, file_rows);

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["status"]["state"], "complete");
    for c in report["checks"].as_array().unwrap() {
        assert!(c["stage"].is_string() && c["name"].is_string() && c["holds"].is_boolean());
        assert!(c.get("lhs").is_some() && c.get("rhs").is_some());
    }
}

#[test]
fn dumped_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = ok(
        dir.path(),
        &[
            "pipeline",
            "--kind",
            "tree",
            "--radius",
            "6",
            "--eps",
            "1",
            "--dump-config",
        ],
    );
    std::fs::write(dir.path().join("run.json"), &out.stdout).unwrap();
    let again = ok(dir.path(), &["pipeline", "--config", "run.json", "--dump-config"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn edge_csv_matches_the_graph_document() {
    let dir = TempDir::new().unwrap();
    z2_graph(dir.path());
    let graph = coarsekit::io::read_graph(&dir.path().join("g.json")).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("e.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["p", "q", "dist"]);
    let mut count = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let (p, q, d): (usize, usize, f64) = (
            rec[0].parse().unwrap(),
            rec[1].parse().unwrap(),
            rec[2].parse().unwrap(),
        );
        assert!(p < q);
        let (i, j) = (graph.vertex(p).unwrap(), graph.vertex(q).unwrap());
        assert!(graph.are_adjacent(i, j));
        assert_eq!(d, graph.space().dist(p, q));
        count += 1;
    }
    assert_eq!(count, graph.edge_count());
}

#[test]
fn report_commands_print_a_checked_envelope() {
    let dir = TempDir::new().unwrap();
    z2_graph(dir.path());
    for args in [
        vec!["partition", "check", "--eps", "1", "s.json", "n.json"],
        vec!["control", "--rho", "power:0.5,1.5"],
        vec!["sobolev", "--method", "exact", "--margin", "4", "g.json"],
        vec!["crosscheck", "--margin", "4", "g.json"],
    ] {
        let doc = stdout_json(&ok(dir.path(), &args));
        assert_eq!(doc["tool"], "coarsekit");
        assert_eq!(doc["holds"], true);
        assert!(
            !doc["checks"].as_array().unwrap().is_empty(),
            "{args:?} reports no checks"
        );
    }
    let iso = stdout_json(&ok(dir.path(), &["iso", "--mode", "exact", "--margin", "4", "g.json"]));
    assert_eq!(iso["result"]["method"], "exact");
    assert!(iso["result"]["value"].as_f64().unwrap() > 0.0);
}

/// Every shell block of the README, run in order in one directory with the
/// binary first on PATH. Cargo invocations are skipped.
#[test]
fn readme_shell_examples_run() {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let mut script = String::from("set -e\n");
    let mut in_block = false;
    for line in readme.lines() {
        match (in_block, line.trim()) {
            (false, "```sh") => in_block = true,
            (true, "```") => in_block = false,
            (true, l) if !l.starts_with("cargo ") && !l.is_empty() => {
                script.push_str(l);
                script.push('\n');
            }
            _ => {}
        }
    }
    assert!(script.lines().filter(|l| l.contains("coarsekit ")).count() >= 15);
    let dir = TempDir::new().unwrap();
    let bin_dir = Path::new(BIN).parent().unwrap();
    let path = format!("{}:{}", bin_dir.display(), std::env::var("PATH").unwrap_or_default());
    let out = Command::new("sh")
        .arg("-c")
        .arg(&script)
        .current_dir(dir.path())
        .env("PATH", path)
        .env_remove("COARSEKIT_OUT_DIR")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "README script failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "z2-sweep.csv",
        "z2-cert.json",
        "delta.json",
        "runs/report.json",
        "partial/sweep.csv",
        "p5.json",
    ] {
        assert!(dir.path().join(f).is_file(), "README run did not produce {f}");
    }
}
