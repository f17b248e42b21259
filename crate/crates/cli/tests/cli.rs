use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wedderburn::{generalized_reduce, Matrix, Tolerances};
use wedderburn_cli::io::{read_matrix, to_matrix_market};

fn wedderburn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wedderburn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn shift() -> Matrix {
    Matrix::from_fn(4, 4, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
}

fn write(dir: &Path, name: &str, m: &Matrix) {
    std::fs::write(dir.join(name), to_matrix_market(m)).unwrap();
}

#[test]
fn reduce_shift_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.mtx", &shift());
    std::fs::write(dir.path().join("x.csv"), "1\n1\n1\n0\n").unwrap();
    let out = wedderburn(&["reduce", "a.mtx", "--x", "x.csv", "--out", "b.mtx"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let b = read_matrix(&dir.path().join("b.mtx"), None).unwrap();
    let twice = Matrix::from_rows(&[
        [0.0, 1.0, -1.0, -1.0],
        [0.0, -1.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 2.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
    .unwrap();
    assert!((&b.scale(2.0) - &twice).max_abs() < 1e-12);

    let r = report(&out);
    assert_eq!(r["ranks"]["a"], 3);
    assert_eq!(r["ranks"]["m"], 1);
    assert_eq!(r["ranks"]["b"], 2);
    assert_eq!(r["passed"], true);
}

#[test]
fn written_result_is_the_computed_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = Matrix::from_rows(&[[1.0, 2.0, 1.0], [2.0, 3.0, 2.0], [1.0, 1.0, 2.0]]).unwrap();
    let x = Matrix::from_rows(&[[0.3], [-1.7], [2.0]]).unwrap();
    let y = Matrix::from_rows(&[[1.0, 0.5], [0.1, -2.0], [0.0, 1e-3]]).unwrap();
    write(dir.path(), "a.mtx", &a);
    write(dir.path(), "x.mtx", &x);
    write(dir.path(), "y.mtx", &y);
    for out_name in ["b.mtx", "b.csv"] {
        let out = wedderburn(&["reduce", "a.mtx", "--x", "x.mtx", "--y", "y.mtx", "--out", out_name], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let expected = generalized_reduce(&a, &x, &y, &Tolerances::default()).unwrap().b;
        assert_eq!(read_matrix(&dir.path().join(out_name), None).unwrap(), expected);
    }
}

#[test]
fn wedderburn_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = wedderburn(&["check", "wedderburn", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["residuals"]["max_rank_deviation"], 0.0);
    assert_eq!(r["counts"]["trials"], 200);
    assert_eq!(r["rng"], "ChaCha8");
}

#[test]
fn y_augment_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = wedderburn(&["check", "y-augment", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert!(r["residuals"]["max_scaled_b_change"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn same_seed_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let out = wedderburn(&["check", "all", "--trials", "20", "--seed", "11"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("wall_time_ms");
        r
    };
    assert_eq!(run(), run());
}

#[test]
fn json_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.mtx", &Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0]]).unwrap());
    let out = wedderburn(&["pinv", "a.mtx", "--json", "r.json", "--out", "p.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["command"], "pinv");
    assert_eq!(r["ranks"]["a"], 1);
    let p = read_matrix(&dir.path().join("p.csv"), None).unwrap();
    assert_eq!(p, Matrix::from_rows(&[[0.5, 0.0], [0.0, 0.0]]).unwrap());
}

#[test]
fn missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = wedderburn(&["pinv", "nope.mtx"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_header_exits_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.mtx"), "%%MatrixMarket matrix array complex general\n1 1\n1\n").unwrap();
    let out = wedderburn(&["pinv", "a.mtx"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("only real"), "{err}");
}

#[test]
fn usage_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(wedderburn(&["reduce", "a.mtx"], dir.path()).status.code(), Some(1));
    assert_eq!(wedderburn(&["pinv", "a.mtx", "--tol", "-1"], dir.path()).status.code(), Some(1));
}

#[test]
fn rank_deficient_decomposition_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.mtx", &Matrix::identity(2));
    std::fs::write(dir.path().join("x.csv"), "1\n0\n").unwrap();
    let out = wedderburn(&["decompose", "a.mtx", "--x", "x.csv", "--y", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["passed"], false);
}

#[test]
fn meetjoin_of_coordinate_projections() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p.mtx", &Matrix::from_diagonal(3, 3, &[1.0, 1.0, 0.0]));
    write(dir.path(), "q.mtx", &Matrix::from_diagonal(3, 3, &[0.0, 1.0, 1.0]));
    let out = wedderburn(&["meetjoin", "p.mtx", "q.mtx", "--out", "j.mtx", "--meet-out", "m.mtx"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_matrix(&dir.path().join("j.mtx"), None).unwrap(), Matrix::identity(3));
    assert_eq!(
        read_matrix(&dir.path().join("m.mtx"), None).unwrap(),
        Matrix::from_diagonal(3, 3, &[0.0, 1.0, 0.0])
    );
}
