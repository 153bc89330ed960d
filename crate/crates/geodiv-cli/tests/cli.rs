//! End-to-end tests of the `geodiv` binary: every subcommand, the pinned
//! CSV schemas, exit codes, and config-file semantics.

use std::f64::consts::PI;
use std::process::{Command, Output};

fn geodiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geodiv"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

const RUN_HEADER: &str = "k,au,av,bu,bv,len_VA,len_VB,alpha,beta,raw_alpha,raw_beta,\
                          int_ABA,int_ABV,eps,res_eq1,res_eq2";
const CLASSIFY_HEADER: &str = "surface,u,v,K,k1,k2,p,q,alpha_inf_theory,beta_inf_theory,\
                               alpha_inf_emp,beta_inf_emp,kind_limits,kind_oracle,agree";

/// Final alpha (last row) and final beta (last complete row) of a trace.
fn final_angles(csv: &str) -> (f64, f64) {
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert!(rows.len() >= 2, "trace has at least one complete row");
    let alpha: f64 = rows.last().unwrap()[7].parse().unwrap();
    let beta: f64 = rows[rows.len() - 2][8].parse().unwrap();
    (alpha, beta)
}

#[test]
fn plane_run_hits_the_bisection_limit() {
    let out = geodiv(&[
        "run",
        "--surface",
        "plane",
        "--mu",
        "1.0471975512",
        "--p-const",
        "1",
        "--q-const",
        "1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let csv = stdout_str(&out);
    assert_eq!(csv.lines().next().unwrap(), RUN_HEADER);
    let (alpha, beta) = final_angles(&csv);
    assert!((alpha - 2.0 * PI / 9.0).abs() < 1e-9, "alpha = {alpha}");
    assert!((beta - 2.0 * PI / 9.0).abs() < 1e-9, "beta = {beta}");
}

#[test]
fn sphere_run_matches_the_equilateral_limits() {
    let out = geodiv(&[
        "run",
        "--surface",
        "sphere",
        "--radius",
        "1",
        "--mu",
        "1.5707963268",
        "--p-const",
        "1",
        "--q-const",
        "1",
        "--a1",
        "0.2",
        "--alpha1",
        "0.7853981634",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let (alpha, beta) = final_angles(&stdout_str(&out));
    assert!((alpha - PI / 6.0).abs() < 1e-5, "alpha = {alpha}");
    assert!((beta - PI / 6.0).abs() < 1e-5, "beta = {beta}");
}

#[test]
fn saddle_corollary2_run_matches_the_reference_limits() {
    let out = geodiv(&[
        "run",
        "--surface",
        "saddle",
        "--mu",
        "1.5707963268",
        "--pq",
        "corollary2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let (alpha, beta) = final_angles(&stdout_str(&out));
    assert!((alpha - 17.0 * PI / 70.0).abs() < 1e-4, "alpha = {alpha}");
    assert!((beta - PI / 70.0).abs() < 1e-4, "beta = {beta}");
}

#[test]
fn csv_runs_are_bit_identical_and_match_the_out_file() {
    let args = [
        "run",
        "--surface",
        "torus",
        "--vertex-u",
        "0.7",
        "--vertex-v",
        "0.2",
        "--a1",
        "0.2",
        "--conv-tol",
        "1e-8",
    ];
    let first = geodiv(&args);
    let second = geodiv(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr_str(&first));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let mut with_out: Vec<&str> = args.to_vec();
    let path_str = path.to_str().unwrap();
    with_out.extend_from_slice(&["--out", path_str]);
    let third = geodiv(&with_out);
    assert_eq!(code(&third), 0);
    assert!(
        third.stdout.is_empty(),
        "--out diverts the trace from stdout"
    );
    assert_eq!(std::fs::read(&path).unwrap(), first.stdout);
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "# equal divisions on the plane\nsurface = plane\nmu = 1.5707963267948966\n\
         p-const = 1\nq-const = 1\n",
    )
    .unwrap();
    let path_str = path.to_str().unwrap();

    let from_file = geodiv(&["run", "--config", path_str]);
    assert_eq!(code(&from_file), 0, "stderr: {}", stderr_str(&from_file));
    let (alpha, _) = final_angles(&stdout_str(&from_file));
    assert!((alpha - (PI - PI / 2.0) / 3.0).abs() < 1e-9);

    // Same file, but the flag narrows the vertex angle to 2pi/3.
    let overridden = geodiv(&["run", "--config", path_str, "--mu", "2.0943951023931953"]);
    assert_eq!(code(&overridden), 0);
    let (alpha, _) = final_angles(&stdout_str(&overridden));
    assert!(
        (alpha - (PI - 2.0 * PI / 3.0) / 3.0).abs() < 1e-9,
        "alpha = {alpha}"
    );
}

#[test]
fn dump_config_round_trips_through_a_file() {
    let dumped = geodiv(&[
        "run",
        "--surface",
        "ellipsoid",
        "--semi-a",
        "2",
        "--vertex-u",
        "1.2",
        "--vertex-v",
        "0.3",
        "--mu",
        "0.9",
        "--a1",
        "0.125",
        "--alpha1",
        "0.6",
        "--pq",
        "corollary2",
        "--dump-config",
    ]);
    assert_eq!(code(&dumped), 0, "stderr: {}", stderr_str(&dumped));
    let text = stdout_str(&dumped);
    assert!(text.contains("surface = ellipsoid"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dumped.cfg");
    std::fs::write(&path, &text).unwrap();
    let reloaded = geodiv(&["run", "--config", path.to_str().unwrap(), "--dump-config"]);
    assert_eq!(code(&reloaded), 0);
    assert_eq!(stdout_str(&reloaded), text);
}

#[test]
fn classify_reference_points_agree_with_the_sign_oracle() {
    let cases = [
        ("cylinder", "0", "0", "parabolic"),
        ("sphere", "0.7853981634", "0", "elliptic"),
        ("saddle", "0", "0", "hyperbolic"),
    ];
    for (surface, u, v, kind) in cases {
        let out = geodiv(&[
            "classify",
            "--surface",
            surface,
            "--u",
            u,
            "--v",
            v,
            "--mu",
            "1.5707963268",
        ]);
        assert_eq!(code(&out), 0, "{surface}: {}", stderr_str(&out));
        let csv = stdout_str(&out);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CLASSIFY_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], surface);
        assert_eq!(row[12], kind, "{surface} kind_limits");
        assert_eq!(row[13], kind, "{surface} kind_oracle");
        assert_eq!(row[14], "true");
        // Theoretical mode leaves the empirical columns unset.
        assert_eq!(row[10], "NaN");
        assert_eq!(row[11], "NaN");
    }
}

#[test]
fn empirical_classification_agrees_on_the_sphere() {
    let out = geodiv(&[
        "classify",
        "--surface",
        "sphere",
        "--u",
        "1.1",
        "--v",
        "0.4",
        "--empirical",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let csv = stdout_str(&out);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[12], "elliptic");
    assert_eq!(row[14], "true");
    let alpha_theory: f64 = row[8].parse().unwrap();
    let alpha_emp: f64 = row[10].parse().unwrap();
    assert!((alpha_emp - alpha_theory).abs() < 1e-5);
}

#[test]
fn gbcheck_separates_fine_coarse_and_degenerate_triangles() {
    let spherical = [
        "--surface",
        "sphere",
        "--u1",
        "1.5707963267948966",
        "--v1",
        "0",
        "--u2",
        "1.5707963267948966",
        "--v2",
        "0.39269908169872414",
        "--u3",
        "1.1780972450961724",
        "--v3",
        "0",
    ];
    let mut fine: Vec<&str> = vec!["gbcheck"];
    fine.extend_from_slice(&spherical);
    let out = geodiv(&fine);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("residual = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-6, "residual = {residual}");

    // A step comparable to the curvature radius leaves a visible residual.
    let wide = [
        "gbcheck",
        "--surface",
        "sphere",
        "--u1",
        "1.5707963267948966",
        "--v1",
        "0",
        "--u2",
        "1.5707963267948966",
        "--v2",
        "1.2",
        "--u3",
        "0.6",
        "--v3",
        "0",
        "--step",
        "0.05",
    ];
    let out = geodiv(&wide);
    assert_eq!(code(&out), 4, "stderr: {}", stderr_str(&out));
    assert!(stderr_str(&out).contains("exceeds"));

    let degenerate = [
        "gbcheck",
        "--surface",
        "plane",
        "--u1",
        "0",
        "--v1",
        "0",
        "--u2",
        "1",
        "--v2",
        "0",
        "--u3",
        "2",
        "--v3",
        "0",
    ];
    let out = geodiv(&degenerate);
    assert_eq!(code(&out), 1);
}

#[test]
fn gallery_lists_and_describes_surfaces() {
    let out = geodiv(&["gallery"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 7);
    for name in [
        "plane",
        "sphere",
        "cylinder",
        "torus",
        "saddle",
        "ellipsoid",
        "monkey-saddle",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{name}:"))),
            "missing {name}"
        );
    }

    let out = geodiv(&["gallery", "--surface", "torus"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.contains("domain: u in"));
    assert!(text.contains("cos(u)"), "K sign regions described: {text}");

    let out = geodiv(&["gallery", "--surface", "pseudosphere"]);
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("unknown surface"));
}

#[test]
fn bad_inputs_exit_with_code_one() {
    let unknown = geodiv(&["run", "--surface", "helicoid"]);
    assert_eq!(code(&unknown), 1);

    let conflict = geodiv(&[
        "run",
        "--surface",
        "plane",
        "--pq",
        "bisection",
        "--p-const",
        "1",
        "--q-const",
        "1",
    ]);
    assert_eq!(code(&conflict), 1);
    assert!(stderr_str(&conflict).contains("not both"));

    let outside = geodiv(&[
        "run",
        "--surface",
        "sphere",
        "--vertex-u",
        "9",
        "--vertex-v",
        "0",
    ]);
    assert_eq!(code(&outside), 1);

    let missing = geodiv(&["classify", "--surface", "sphere"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr_str(&missing).contains("--u"));
}

#[test]
fn iteration_cap_exits_two_but_still_writes_the_trace() {
    let out = geodiv(&[
        "run",
        "--surface",
        "plane",
        "--mu",
        "1.0471975512",
        "--p-const",
        "1",
        "--q-const",
        "1",
        "--max-iters",
        "3",
    ]);
    assert_eq!(code(&out), 2);
    let csv = stdout_str(&out);
    assert_eq!(
        csv.lines().count(),
        5,
        "header + 3 complete rows + final partial row"
    );
    assert!(stderr_str(&out).contains("no convergence"));
}
