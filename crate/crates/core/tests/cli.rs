use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sparse_ctrl::bounds::{undirected_bound, BoundParams};
use sparse_ctrl::graphs::{read_dense_csv, BinaryAdjacency};
use sparse_ctrl::montecarlo::{SweepRow, CSV_VERSION_LINE, SWEEP_CSV_HEADER};
use sparse_ctrl::sparsity::SupportFamily;
use tempfile::TempDir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-ctrl-lab"))
        .args(args)
        .env_remove("SPARSE_CTRL_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn generate_matches_golden_file_and_is_deterministic() {
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/er_directed_n8_p0.3_seed7.txt")).unwrap();
    let args = ["generate", "--model", "er-directed", "--n", "8", "--p", "0.3", "--seed", "7"];
    let a = lab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(String::from_utf8(a.stdout.clone()).unwrap(), golden);
    assert_eq!(lab(&args).stdout, a.stdout);
    let other = lab(&["generate", "--model", "er-directed", "--n", "8", "--p", "0.3", "--seed", "8"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn generate_seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sparse-ctrl-lab"))
        .args(["generate", "--model", "er-directed", "--n", "8", "--p", "0.3"])
        .env("SPARSE_CTRL_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let golden = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/er_directed_n8_p0.3_seed7.txt")).unwrap();
    assert_eq!(out.stdout, golden);
}

#[test]
fn generate_rejects_bad_arguments() {
    assert_eq!(code(&lab(&["generate", "--model", "er-undirected", "--n", "5", "--p", "1.5", "--seed", "1"])), 2);
    assert_eq!(code(&lab(&["generate", "--model", "er-undirected", "--n", "5", "--p", "0.5"])), 2);
    assert_eq!(code(&lab(&["generate", "--model", "small-world", "--n", "5", "--p", "0.5", "--seed", "1"])), 2);
}

#[test]
fn generate_writes_consistent_side_files() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("g.txt");
    let dense = dir.path().join("a.csv");
    let weights = dir.path().join("w.txt");
    let out = lab(&[
        "generate", "--model", "power-law", "--n", "20", "--alpha", "2.5", "--seed", "3",
        "-o", path_str(&edges), "--dense", path_str(&dense), "--weights-out", path_str(&weights),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let adj = BinaryAdjacency::read_edge_list(fs::read(&edges).unwrap().as_slice()).unwrap();
    assert!(!adj.is_directed());
    let a = read_dense_csv(fs::read(&dense).unwrap().as_slice()).unwrap();
    assert!(fs::read_to_string(&dense).unwrap().starts_with(CSV_VERSION_LINE));
    for i in 0..20 {
        let sum: f64 = a.row(i).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12 || (sum == 0.0 && adj.degree(i) == 0));
        for j in 0..20 {
            assert_eq!(a[(i, j)] > 0.0, adj.get(i, j));
        }
    }
    let w = fs::read_to_string(&weights).unwrap();
    assert_eq!(w.lines().filter(|l| !l.starts_with('#')).count(), 20);
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let full = dir.path().join("full.txt");
    let empty = dir.path().join("empty.txt");
    for (p, path) in [("1", &full), ("0", &empty)] {
        let out = lab(&["generate", "--model", "er-undirected", "--n", "6", "--p", p, "--seed", "1", "-o", path_str(path)]);
        assert_eq!(code(&out), 0);
    }
    let yes = lab(&["check", "--graph", path_str(&full), "--s", "1"]);
    assert_eq!(code(&yes), 0);
    let verdict: serde_json::Value = serde_json::from_slice(&yes.stdout).unwrap();
    assert_eq!(verdict["controllable"], true);

    let structured = lab(&["check", "--graph", path_str(&full), "--family", "block", "--s", "2", "--m", "2"]);
    assert_eq!(code(&structured), 0);

    let no = lab(&["check", "--graph", path_str(&empty), "--s", "2", "--strategy", "exhaustive"]);
    assert_eq!(code(&no), 1);
    let verdict: serde_json::Value = serde_json::from_slice(&no.stdout).unwrap();
    assert_eq!(verdict["controllable"], false);

    let bad = write(&dir, "bad.txt", "6 0\n0 9\n");
    assert_eq!(code(&lab(&["check", "--graph", &bad, "--s", "1"])), 2);
    assert_eq!(code(&lab(&["check", "--graph", "/nonexistent/graph.txt", "--s", "1"])), 2);
}

#[test]
fn check_accepts_dense_matrix_and_explicit_family() {
    let dir = TempDir::new().unwrap();
    // nilpotent shift: controllable exactly through the last coordinate
    let m = write(&dir, "m.csv", "0,1,0\n0,0,1\n0,0,0\n");
    let last = write(&dir, "last.txt", "{3}\n");
    let first = write(&dir, "first.txt", "{1}\n");
    assert_eq!(code(&lab(&["check", "--matrix", &m, "--explicit", &last, "--s", "1"])), 0);
    assert_eq!(code(&lab(&["check", "--matrix", &m, "--explicit", &first, "--s", "1"])), 1);
    assert_eq!(code(&lab(&["check", "--matrix", &m, "--explicit", &first, "--s", "2"])), 2);
}

#[test]
fn bound_rows_equal_library_values() {
    let out = lab(&["bound", "--n", "12", "--family", "piecewise", "--s", "4", "--m", "2", "--p", "0.25,0.5", "--big-c", "2", "--small-c", "0.5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
    assert_eq!(lines.next(), Some("model,N,s,p,family,C,c,q,raw_q,valid"));
    let f = SupportFamily::piecewise(12, 4, 2).unwrap();
    let params = BoundParams::new(2.0, 0.5).unwrap();
    for (line, p) in lines.zip([0.25, 0.5]) {
        let cells: Vec<&str> = line.split(',').collect();
        let r = undirected_bound(&f, p, &params).unwrap();
        assert_eq!(cells[0], "undirected");
        assert_eq!(cells[3].parse::<f64>().unwrap(), p);
        assert_eq!(cells[7].parse::<f64>().unwrap(), r.q);
        assert_eq!(cells[8].parse::<f64>().unwrap(), r.raw_q);
        assert_eq!(cells[9].parse::<bool>().unwrap(), r.valid);
    }
    assert_eq!(code(&lab(&["bound", "--n", "12", "--s", "2", "--p", "1.2"])), 2);
}

#[test]
fn qtable_lists_every_t() {
    let out = lab(&["qtable", "--n", "6", "--family", "block", "--s", "4", "--m", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    // three blocks of length 2, two chosen
    assert_eq!(rows, [
        "block,6,4,2,0,1,1",
        "block,6,4,2,1,6,6",
        "block,6,4,2,2,15,15",
        "block,6,4,2,3,12,20",
        "block,6,4,2,4,3,15",
    ]);
}

#[test]
fn sweep_writes_header_and_resumes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let base = ["sweep", "--model", "er-undirected", "--n", "8", "--family", "unconstrained,piecewise", "--s", "2", "--trials", "50", "--seed", "5"];
    let mut first: Vec<&str> = base.to_vec();
    first.extend(["--param", "0.3", "-o", path_str(&out)]);
    assert_eq!(code(&lab(&first)), 0);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_VERSION_LINE);
    assert_eq!(lines[1], SWEEP_CSV_HEADER);
    assert_eq!(lines.len(), 4);

    let mut second: Vec<&str> = base.to_vec();
    second.extend(["--param", "0.3,0.6", "-o", path_str(&out)]);
    assert_eq!(code(&lab(&second)), 0);
    let resumed = fs::read_to_string(&out).unwrap();
    assert!(resumed.starts_with(&text));
    let rows: Vec<SweepRow> = resumed.lines().skip(2).map(|l| SweepRow::from_csv(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.trials == 50 && (0.0..=1.0).contains(&r.p_hat)));
    assert_eq!(rows.iter().filter(|r| r.p_or_alpha == 0.6).count(), 2);
}

#[test]
fn sweep_reads_config_file_and_emits_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "grid.cfg", "# small grid\nmodel = er-directed\nn = 6\nparam = 0.5\nfamily = block\ns = 2\nm = 2\ntrials = 20\nseed = 9\nformat = json\n");
    let out = lab(&["sweep", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<SweepRow> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].m, Some(2));
    assert_eq!(rows[0].trials, 20);

    // a flag overrides the file
    let out = lab(&["sweep", "--config", &cfg, "--trials", "10"]);
    let rows: Vec<SweepRow> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[0].trials, 10);
}

#[test]
fn sweep_rejects_empty_grid_and_missing_seed() {
    assert_eq!(code(&lab(&["sweep", "--model", "er-undirected", "--family", "unconstrained", "--s", "1", "--param", "0.5", "--seed", "1"])), 2);
    assert_eq!(code(&lab(&["sweep", "--model", "er-undirected", "--n", "6", "--family", "unconstrained", "--s", "1", "--param", "0.5"])), 2);
}

#[test]
fn design_round_trip_and_failures() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.txt");
    assert_eq!(code(&lab(&["generate", "--model", "er-undirected", "--n", "5", "--p", "1", "--seed", "2", "-o", path_str(&graph)])), 0);
    let x0 = write(&dir, "x0.csv", "0.1\n-0.4\n0.3\n0.9\n0.0\n");
    let xf = write(&dir, "xf.csv", "1,0.5,-0.25,0,2\n");
    let plan = dir.path().join("plan.csv");
    let summary = dir.path().join("summary.json");
    let out = lab(&[
        "design", "--graph", path_str(&graph), "--s", "2", "--x0", &x0, "--xf", &xf, "--tol", "1e-9",
        "--plan-out", path_str(&plan), "--summary-out", path_str(&summary),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["feasible"], true);
    assert!(s["residual_norm"].as_f64().unwrap() <= 1e-9);

    // replay the plan: complete graph on 5 nodes, unit weights
    let phi = nalgebra::DMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { 0.25 });
    let mut inputs = vec![nalgebra::DVector::<f64>::zeros(5); 5];
    for line in fs::read_to_string(&plan).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let k: usize = cells[0].parse().unwrap();
        let i: usize = cells[1].parse().unwrap();
        inputs[k - 1][i - 1] = cells[2].parse().unwrap();
    }
    assert!(inputs.iter().all(|u| u.iter().filter(|v| **v != 0.0).count() <= 2));
    let mut x = nalgebra::DVector::from_vec(vec![0.1, -0.4, 0.3, 0.9, 0.0]);
    for u in &inputs {
        x = &phi * x + u;
    }
    let target = nalgebra::DVector::from_vec(vec![1.0, 0.5, -0.25, 0.0, 2.0]);
    assert!((x - target).norm() <= 1e-9);

    // no dynamics and one input per step cannot hit a two-node target
    let zero = write(&dir, "zero.csv", "0,0,0\n0,0,0\n0,0,0\n");
    let z0 = write(&dir, "z0.csv", "0\n0\n0\n");
    let zf = write(&dir, "zf.csv", "1\n1\n0\n");
    let out = lab(&["design", "--matrix", &zero, "--s", "1", "--x0", &z0, "--xf", &zf]);
    assert_eq!(code(&out), 1);

    let out = lab(&["design", "--matrix", &zero, "--s", "1", "--x0", "/nonexistent.csv", "--xf", &zf]);
    assert_eq!(code(&out), 2);
}
