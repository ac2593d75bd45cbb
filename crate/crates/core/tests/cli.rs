use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-calculus")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--bogus"]).status.code(), Some(1));
}

#[test]
fn spectrum_of_line_step() {
    let o = run(&["spectrum", "--model", "line", "--m", "2", "--h", "1", "--values", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_column(&stdout(&o), 1), vec![-1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn laplacian_of_quadratic_interior() {
    let o = run(&["laplacian", "--model", "line", "--m", "6", "--h", "0.5", "--function", "x^2"]);
    assert_eq!(o.status.code(), Some(0));
    let values = csv_column(&stdout(&o), 1);
    assert_eq!(values.len(), 6);
    for v in &values[1..5] {
        assert!((v + 2.0).abs() < 1e-12, "{values:?}");
    }
}

#[test]
fn hodge_splits_off_the_mean() {
    let o = run(&["hodge", "--model", "circle", "--m", "4", "--h", "1", "--values", "1,2,3,6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for h in csv_column(&text, 3) {
        assert!((h - 3.0).abs() < 1e-12);
    }
    let exact: f64 = csv_column(&text, 1).iter().sum();
    assert!(exact.abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_one() {
    let conflicting = run(&["spectrum", "--model", "line", "--m", "2", "--h", "1", "--values", "0,1", "--function", "x"]);
    assert_eq!(conflicting.status.code(), Some(1));
    let wrong_len = run(&["spectrum", "--model", "circle", "--m", "4", "--h", "1", "--values", "0,1"]);
    assert_eq!(wrong_len.status.code(), Some(1));
    let missing = run(&["model", "--spec", "/nonexistent/lattice.json"]);
    assert_eq!(missing.status.code(), Some(1));
    let bad_fn = run(&["converge", "--model", "circle", "--kind", "derivative", "--function", "sin(w)", "--levels", "1"]);
    assert_eq!(bad_fn.status.code(), Some(1));
}

#[test]
fn subdivide_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let fine = dir.path().join("fine.json");
    let o = run(&["subdivide", "--shape", "polygon", "--n", "3", "--levels", "1", "--out", fine.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fine).unwrap()).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(doc["maximal"].as_array().unwrap().len(), 6);

    let again = run(&["subdivide", "--complex", fine.to_str().unwrap(), "--levels", "1"]);
    assert_eq!(again.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(doc["maximal"].as_array().unwrap().len(), 12);
}

#[test]
fn converge_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let summary = dir.path().join("summary.json");
    let o = run(&[
        "converge",
        "--model",
        "circle",
        "--kind",
        "laplacian",
        "--function",
        "sin(x)",
        "--second",
        "-sin(x)",
        "--levels",
        "4",
        "--out",
        table.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&table).unwrap();
    assert!(csv.starts_with("level,h,error,rate_cum\n"));
    assert_eq!(csv.lines().count(), 6);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["passed"], true);
    assert!((s["rate"].as_f64().unwrap() - 2.0).abs() < 0.2);
}

#[test]
fn converge_reads_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"model": "circle", "kind": "stencil", "function": "sin(x)", "levels": 3}"#).unwrap();
    let o = run(&["converge", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 5);

    fs::write(&config, r#"{"model": "circle", "colour": "blue"}"#).unwrap();
    assert_eq!(run(&["converge", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn torus_model_is_hermitian() {
    let o = run(&["model", "--torus", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let mut entries = std::collections::HashMap::new();
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (r, c): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        entries.insert((r, c), (f[2].parse::<f64>().unwrap(), f[3].parse::<f64>().unwrap()));
    }
    assert!(!entries.is_empty());
    for (&(r, c), &(re, im)) in &entries {
        let (re_t, im_t) = entries[&(c, r)];
        assert!((re - re_t).abs() < 1e-15 && (im + im_t).abs() < 1e-15);
    }
}
