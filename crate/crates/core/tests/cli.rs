use std::path::Path;
use std::process::{Command, Output};

use sn_disc::io::{parse_document, read_solution, read_sweep_csv, Document};
use sn_disc::radial::lambda_of;
use sn_disc::variational::nehari_energy;

fn sn_disc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sn-disc")).args(args).output().unwrap()
}

fn sn_disc_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sn-disc")).args(args).env(key, value).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_both_writes_two_profiles_and_their_distance() {
    let out = sn_disc(&["solve", "--radius", "2", "--method", "both", "--grid", "1024"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let Document::Bundle(bundle) = parse_document(&out.stdout).unwrap() else {
        panic!("expected a bundle");
    };
    assert_eq!(bundle.solutions.len(), 2);
    assert_eq!(bundle.solutions[0].method.to_string(), "shooting");
    assert_eq!(bundle.solutions[1].method.to_string(), "nehari");
    let (a, b) = (bundle.solutions[0].profile().unwrap(), bundle.solutions[1].profile().unwrap());
    assert_eq!(bundle.uniform_distance, a.uniform_distance(&b).unwrap());
    assert!(bundle.relative_distance <= 1e-3, "{}", bundle.relative_distance);
}

#[test]
fn grid_refinement_changes_c_r_by_less_than_1e_4() {
    let c = |grid: &str| {
        let out = sn_disc(&["solve", "--radius", "2", "--grid", grid]);
        assert_eq!(code(&out), 0);
        match parse_document(&out.stdout).unwrap() {
            Document::Single(d) => d.c_r,
            Document::Bundle(_) => panic!("expected one solution"),
        }
    };
    let (coarse, fine) = (c("1024"), c("4096"));
    assert!((coarse / fine - 1.0).abs() <= 1e-4, "{coarse} vs {fine}");
}

#[test]
fn solution_file_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["shooting", "nehari"] {
        let path = dir.path().join(format!("{method}.json"));
        let out = sn_disc(&["solve", "--radius", "4", "--method", method, "--grid", "2048", "--out", path_str(&path)]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
        let doc = read_solution(&path).unwrap();
        let state = doc.to_state().unwrap();
        assert_eq!(state.profile.values(), doc.phi.as_slice());
        assert_eq!(doc.n, 2048);
        assert_eq!(doc.r.len(), 2049);
        assert_eq!(doc.config.n, 2048);
        assert_eq!(nehari_energy(&state.profile).unwrap(), doc.c_r);
        assert!((lambda_of(&state.profile) / doc.lambda - 1.0).abs() <= 1e-12);
        // and writing it again gives the same bytes
        let again = sn_disc_bytes(&doc);
        assert_eq!(again, std::fs::read(&path).unwrap());
    }
}

fn sn_disc_bytes(doc: &sn_disc::io::SolutionDoc) -> Vec<u8> {
    sn_disc::io::to_json_bytes(doc).unwrap()
}

#[test]
fn identical_runs_give_identical_bytes() {
    for method in ["shooting", "nehari", "both"] {
        let args = ["solve", "--radius", "3", "--method", method, "--grid", "512", "--seed", "7"];
        let (a, b) = (sn_disc(&args), sn_disc(&args));
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{method}");
    }
    let threads = |n: &str| sn_disc_env(&["sweep", "--radii", "2,4,8", "--grid", "512"], "SN_DISC_THREADS", n);
    let (one, four) = (threads("1"), threads("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn default_ladder_has_five_decreasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = sn_disc(&["sweep", "--grid", "1024", "--out", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("R,c_R,norm_sq,lambda,amp0,residual,method"));
    assert!(!text.contains('\r'));
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 5);
    for (row, r) in rows.iter().zip([4.0, 8.0, 16.0, 32.0, 64.0]) {
        assert!(row.is_ok() && (row.radius / r - 1.0).abs() < 1e-8);
    }
    let c: Vec<f64> = rows.iter().map(|r| r.c_r.unwrap()).collect();
    assert!(c.windows(2).all(|w| w[1] < w[0]), "{c:?}");
}

#[test]
fn single_radius_sweep_matches_solve() {
    for method in ["shooting", "nehari"] {
        let sweep = sn_disc(&["sweep", "--radii", "2:2:geometric:1", "--method", method, "--grid", "512"]);
        assert_eq!(code(&sweep), 0);
        let rows = read_sweep_csv(sweep.stdout.as_slice()).unwrap();
        assert_eq!(rows.len(), 1);
        let solve = sn_disc(&["solve", "--radius", "2", "--method", method, "--grid", "512"]);
        let Document::Single(doc) = parse_document(&solve.stdout).unwrap() else { panic!() };
        let state = doc.to_state().unwrap();
        let row = &rows[0];
        assert_eq!(row.radius, doc.radius);
        assert_eq!(row.c_r, Some(doc.c_r));
        assert_eq!(row.lambda, Some(doc.lambda));
        assert_eq!(row.residual, Some(doc.residual_l2));
        assert_eq!(row.amp0, Some(doc.phi[0]));
        assert_eq!(row.norm_sq, Some(state.norm_sq()));
        assert_eq!(row.method.to_string(), method);
    }
}

#[test]
fn sweep_with_both_methods_interleaves_rows() {
    let out = sn_disc(&["sweep", "--radii", "2,4", "--method", "both", "--grid", "512", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    let tags: Vec<String> = rows.iter().map(|r| r["method"].as_str().unwrap().to_string()).collect();
    assert_eq!(tags, ["shooting", "nehari", "shooting", "nehari"]);
}

#[test]
fn bad_input_exits_with_2() {
    for args in [
        vec!["solve"],
        vec!["solve", "--radius", "abc"],
        vec!["solve", "--radius", "2", "--radii", "1:2:geometric:2"],
        vec!["solve", "--radius", "0"],
        vec!["solve", "--radius", "2", "--grid", "8"],
        vec!["solve", "--radius", "2", "--method", "euler"],
        vec!["sweep", "--radii", ""],
        vec!["sweep", "--radii", "4:2:geometric:x"],
        vec!["sweep", "--radii", "4,2"],
        vec!["verify", "--tolerance-scale", "-1"],
        vec!["frobnicate"],
    ] {
        let out = sn_disc(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = sn_disc_env(&["sweep", "--radii", "2"], "SN_DISC_THREADS", "many");
    assert_eq!(code(&out), 2);
    assert_eq!(code(&sn_disc(&["--help"])), 0);
}

#[test]
fn nonconvergence_exits_with_3() {
    let out = sn_disc(&["solve", "--radius", "2", "--method", "nehari", "--grid", "256", "--max-iter", "2"]);
    assert_eq!(code(&out), 3);
    let sweep = sn_disc(&["sweep", "--radii", "2,4", "--method", "nehari", "--grid", "256", "--max-iter", "2"]);
    assert_eq!(code(&sweep), 3);
    let rows = read_sweep_csv(sweep.stdout.as_slice()).unwrap();
    assert!(rows.iter().all(|r| !r.is_ok() && r.c_r.is_none()));
}

#[test]
fn unwritable_output_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.json");
    let out = sn_disc(&["solve", "--radius", "2", "--grid", "256", "--out", path_str(&path)]);
    assert_eq!(code(&out), 4);
}

#[test]
fn verify_reports_failures_with_measured_values() {
    let out = sn_disc(&["verify", "--quick", "--tolerance-scale", "1e-30"]);
    assert_eq!(code(&out), 5);
    let text = String::from_utf8(out.stdout).unwrap();
    let fail = text.lines().find(|l| l.starts_with("FAIL bessel_zero")).expect(&text);
    assert!(fail.contains("measured") && fail.contains("tolerance"));
}

#[test]
fn quick_verify_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = sn_disc(&["verify", "--quick", "--out", path_str(&path)]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 20);
    let checks: Vec<serde_json::Value> = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert!(!checks.iter().any(|c| c["name"] == "oracle_halving_h_R_over_64"));
}

#[test]
fn oracle_table_lists_every_function() {
    let out = sn_disc(&["oracle", "--quick", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row["cells_per_radius"], 32);
        if row["function"] != "half_disc" {
            assert!(row["rel_error"].as_f64().unwrap() <= 0.02);
        }
    }
    let csv = sn_disc(&["oracle", "--cells", "16"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("function,R,cells_per_radius,h,radial,grid,rel_error\n"));
}
