use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdl")).args(args).env_remove("FDL_BUDGET").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(out)))
}

const PAIR: &[&str] = &["--lambda", "0.4", "--delta", "0.05"];

#[test]
fn phi_example() {
    let out = fdl(&["phi", "--matrix", "[[0.4,0],[0,0.05]]", "--s", "1.5", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], "fdl.phi.v1");
    assert!((v["result"]["phi"].as_f64().unwrap() - 0.08944272).abs() < 1e-8);
}

#[test]
fn qdim_brackets_closed_form() {
    let mut args = vec!["qdim", "--pair", "theorem1", "--p", "0.5", "--q", "2", "--tol", "1e-4", "--json"];
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    let (lo, hi) = (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
    assert!(lo <= 0.7564708 && 0.7564708 <= hi && hi - lo <= 1e-4);
    assert_eq!(r["resolved"], true);
}

#[test]
fn unresolved_bracket_exits_3_with_partial_result() {
    let mut args =
        vec!["qdim", "--pair", "perturbed", "--k", "4", "--p", "0.5", "--q", "2", "--max-depth", "4", "--json"];
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["status"], "unresolved");
    let upper = v["result"]["upper"].as_f64().unwrap();
    assert!(upper <= 0.70875, "{upper}");
}

#[test]
fn budget_from_environment() {
    let mut args =
        vec!["pressure", "--pair", "theorem1", "--s", "0.7", "--q", "2", "--p", "0.5", "--depth", "12", "--json"];
    args.extend_from_slice(PAIR);
    let out = Command::new(env!("CARGO_BIN_EXE_fdl")).args(&args).env("FDL_BUDGET", "64").output().unwrap();
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["status"], "budget_exceeded");
    assert_eq!(v["result"]["depth"], 6);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["depth"], 12);
}

#[test]
fn lsr_example_collapses() {
    let mut args = vec!["lsr", "--pair", "perturbed", "--k", "4", "--nmax", "20", "--json"];
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    let (lo, hi) = (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
    assert!((lo - 0.1414214).abs() < 1e-7);
    assert!(hi - lo <= 1e-6);
}

#[test]
fn discontinuity_scan_table() {
    let mut args = vec!["discontinuity-scan", "--p", "0.5", "--q", "2", "--k", "2,4,8,16"];
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,matrix_distance,rq_upper_perturbed,rq_exact_diagonal,gap"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[2] <= 0.7087345 + 1e-6);
        assert!((r[3] - 0.7564708).abs() <= 1e-4);
        assert!(r[4] >= 0.0477);
    }
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!((rows[0][1] - 0.30614674589207186).abs() < 1e-15);
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("scan.csv");
    let mut args = vec!["discontinuity-scan", "--p", "0.5", "--q", "2", "--k", "2,3", "--json", "--out"];
    args.push(csv_path.to_str().unwrap());
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    let rows = json(&out)["result"]["rows"].as_array().unwrap().clone();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    for (row, line) in rows.iter().zip(csv.lines().skip(1)) {
        let cells: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for (i, key) in ["k", "matrix_distance", "rq_upper_perturbed", "rq_exact_diagonal", "gap"].iter().enumerate() {
            assert_eq!(row[key].as_f64().unwrap().to_bits(), cells[i].to_bits(), "{key}");
        }
    }
}

#[test]
fn hypothesis_failure_exits_2() {
    let out = fdl(&["discontinuity-scan", "--lambda", "0.4", "--delta", "0.3", "--p", "0.5", "--q", "2", "--k", "2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let unknown = write("a.json", r#"{"schema": "fdl.qdim.v1", "pair": "theorem1", "lamda": 0.4}"#);
    let no_schema = write("b.json", r#"{"pair": "theorem1"}"#);
    let wrong = write("c.json", r#"{"schema": "fdl.sdim.v1"}"#);
    for p in [&unknown, &no_schema, &wrong] {
        let out = fdl(&["--config", p.to_str().unwrap(), "qdim", "--q", "2"]);
        assert_eq!(code(&out), 2, "{}", p.display());
    }
    assert_eq!(code(&fdl(&["qdim", "--pair", "theorem1"])), 2);
    assert_eq!(code(&fdl(&["qdim", "--no-such-flag"])), 2);
    assert_eq!(code(&fdl(&["phi", "--matrix", "[[1,2],[3]]", "--s", "1"])), 2);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    std::fs::write(
        &path,
        r#"{"schema": "fdl.qdim.v1", "pair": "theorem1", "lambda": 0.4, "delta": 0.05, "p": 0.5, "q": 3, "tol": 1e-3}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let from_file = json(&fdl(&["--config", cfg, "qdim", "--json"]));
    assert_eq!(from_file["result"]["tol"], 1e-3);
    let overridden = json(&fdl(&["--config", cfg, "qdim", "--q", "2", "--json"]));
    let lo = overridden["result"]["lower"].as_f64().unwrap();
    let hi = overridden["result"]["upper"].as_f64().unwrap();
    assert!(lo <= 0.7564708 && 0.7564708 <= hi);
}

fn run_chaos(path: &Path, seed: &str) -> Output {
    fdl(&[
        "chaos",
        "--matrix",
        "[[0.4,0],[0,0.4]]",
        "--matrix",
        "[[0.4,0],[0,0.4]]",
        "--translations",
        "[[0,0],[0.6,0]]",
        "--p",
        "0.5",
        "--count",
        "50000",
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ])
}

#[test]
fn chaos_and_moments_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    assert_eq!(code(&run_chaos(&a, "11")), 0);
    assert_eq!(code(&run_chaos(&b, "11")), 0);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(&bytes[..4], b"FDLS");

    let csv = dir.path().join("m.csv");
    let out = fdl(&[
        "moments",
        "--samples",
        a.to_str().unwrap(),
        "--q",
        "2",
        "--r-exp",
        "4,5,6,7,8",
        "--out",
        csv.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let slope = v["result"]["estimate"]["slope"].as_f64().unwrap();
    assert!((slope - 0.7565).abs() < 0.1, "{slope}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,M,occupied,log_r,log_M\n0.0625,"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn reruns_are_byte_identical() {
    let mut scan = vec!["discontinuity-scan", "--p", "0.5", "--q", "2", "--k", "2,4", "--json"];
    scan.extend_from_slice(PAIR);
    let mut lsr = vec!["lsr", "--pair", "perturbed", "--k", "3", "--nmax", "10", "--json"];
    lsr.extend_from_slice(PAIR);
    let mut witness = vec!["witness", "--pair", "perturbed", "--k", "4", "--nmax", "30"];
    witness.extend_from_slice(PAIR);
    for args in [&scan, &lsr, &witness] {
        let a = fdl(args);
        let b = fdl(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let mut threaded = lsr.clone();
    threaded.extend_from_slice(&["--threads", "1"]);
    let mut wide = lsr.clone();
    wide.extend_from_slice(&["--threads", "4"]);
    assert_eq!(fdl(&threaded).stdout, fdl(&wide).stdout);
}

#[test]
fn witness_csv() {
    let mut args = vec!["witness", "--pair", "perturbed", "--k", "4", "--nmax", "10"];
    args.extend_from_slice(PAIR);
    let out = fdl(&args);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("n,value,log_value\n1,"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 10.0);
    assert!((last[1] - 0.16817928305074295).abs() < 1e-12);
}

#[test]
fn resist_and_sdim() {
    let out = fdl(&[
        "resist",
        "--matrix",
        "[[2,1],[0,0.5]]",
        "--matrix",
        "[[0.7648,-0.6442],[0.6442,0.7648]]",
        "--c",
        "0.1",
        "--eps",
        "0.3",
        "--rate",
        "1.2",
        "--nmax",
        "8",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["rows"].as_array().unwrap().len(), 8);

    let out = fdl(&["sdim", "--matrix", "[[0.4,0],[0,0.4]]", "--matrix", "[[0.4,0],[0,0.4]]", "--json"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    let root = 0.5f64.ln() / 0.4f64.ln();
    assert!(r["lower"].as_f64().unwrap() <= root && root <= r["upper"].as_f64().unwrap());
}
