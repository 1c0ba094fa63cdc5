use std::path::PathBuf;
use std::process::{Command, Output};

fn system(name: &str) -> String {
    format!("{}/../../systems/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kneadlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kneadlab-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn determinant_of_two_three_system() {
    let o = run(&["determinant", &system("blind_past_a"), "-M", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 - 2t\n");
}

#[test]
fn determinant_decimal_rendering() {
    let o = run(&["determinant", &system("blind_past_a"), "-M", "3", "--decimal", "2"]);
    assert_eq!(stdout(&o), "1.00 - 2.00t\n");
}

#[test]
fn matrix_json_is_exact() {
    let o = run(&["matrix", &system("blind_past_a"), "-M", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["command"], "matrix");
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["rows"], serde_json::json!([[["-1", "2"], ["1", "0"], ["0", "0"]], [["0", "0"], ["-1", "0"], ["1", "-2"]]]));
}

#[test]
fn verify_tent_identities() {
    let o = run(&["verify", &system("tent"), "-m", "12", "-M", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all residuals zero"));
}

#[test]
fn compare_conjugate_kneading() {
    let o = run(&["compare", &system("blind_future_a"), &system("blind_future_b"), "-m", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "kneading equal to depth 10\n");
}

#[test]
fn compare_map_failure_exits_one() {
    let o = run(&["compare", &system("blind_future_a"), &system("blind_future_b"), "-m", "10", "--map", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("but 3/4 > 1/2 in B"), "{}", stdout(&o));
    assert!(stderr(&o).contains("check failed"));
}

#[test]
fn compare_family_with_conjugate() {
    let o = run(&["compare", &system("family"), &system("family_conjugate"), "-m", "8", "--map", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn separability_failure_exits_one() {
    let o = run(&["separability", &system("blind_past_a"), "-m", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("past: NOT separated"));
}

#[test]
fn overlap_doubling_is_exact() {
    let o = run(&["overlap", &system("doubling"), "-M", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("r = 1/2 (closed form)"), "{out}");
    assert!(out.contains("p = 1/2 (tail bound 1/8589934592)"), "{out}");
    assert!(out.contains("U1 on [1/2, 1]: 2 x - 1"), "{out}");
}

#[test]
fn linearize_residual_limit() {
    let args = ["linearize", &system("skewed_tent"), "-m", "10", "-M", "12", "--grid", "20"];
    let ok = run(&[&args[..], &["--max-residual", "0.05"]].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let tight = run(&[&args[..], &["--max-residual", "0"]].concat());
    assert_eq!(tight.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    let missing = run(&["entropy", "/nonexistent/system.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"branches": [{"domain": ["1", "0"], "affine": {"slope": "2", "intercept": "0"}}]}"#).unwrap();
    let o = run(&["entropy", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(run(&["entropy", bad.to_str().unwrap()]).status.code(), Some(2));

    let tent = system("tent");
    for args in [
        vec!["entropy", &tent, "--tol", "0"],
        vec!["entropy", &tent, "--tol", "abc"],
        vec!["entropy", &tent, "-m", "0"],
        vec!["measure", &tent, "--interval", "1/2"],
        vec!["itinerary", &tent, "--point", "7"],
        vec!["overlap", &tent],
        vec!["compare", &tent, &system("doubling")],
        vec!["nonsense"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn out_directory_files_follow_schemas() {
    let dir = scratch("out");
    let d = dir.to_str().unwrap();
    let cases: [(&[&str], &str, &str); 7] = [
        (&["determinant", &system("tent"), "-M", "4"], "determinant.csv", "power,coefficient"),
        (&["matrix", &system("tent"), "-M", "4"], "matrix.csv", "row,column,power,coefficient"),
        (&["entropy", &system("tent"), "-m", "6", "-M", "6"], "growth.csv", "level,laps,boundary_c1,boundary_c2,boundary_c3"),
        (&["itinerary", &system("tent"), "-m", "3"], "itinerary.csv", "point,value,word,address"),
        (&["measure", &system("tent"), "-m", "8", "--grid", "5"], "phi.csv", "x,phi"),
        (&["linearize", &system("tent"), "-m", "8", "-M", "8", "--grid", "5"], "residuals.csv", "branch,x,residual"),
        (&["overlap", &system("doubling"), "-M", "4"], "itineraries.csv", "index,alpha,beta"),
    ];
    for (args, file, header) in cases {
        let o = run(&[args, &["--out", d]].concat());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let csv = std::fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(csv.lines().next(), Some(header), "{file}");
        assert!(csv.lines().count() > 1, "{file}");
        let json = std::fs::read_to_string(dir.join(format!("{}.json", args[0]))).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["command"], args[0]);
    }
    let o = run(&["verify", &system("tent"), "-m", "6", "-M", "6", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("verify.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("check,detail,residual,ok"));
    assert_eq!(csv.lines().count(), 9);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn output_is_deterministic() {
    let args = ["entropy", &system("skewed_tent"), "-m", "10", "-M", "10", "--json", "--threads", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
