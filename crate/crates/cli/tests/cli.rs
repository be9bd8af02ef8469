use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cayley-spectra"));
    cmd.env_remove("CAYLEY_SPECTRA_SEED");
    cmd
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "status {:?}, stderr {}", out.status, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header plus data rows, with the `#` metadata lines dropped.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no JSON record in {stderr}"));
    serde_json::from_str(line).unwrap()
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn spectrum_contains_the_adjacency_levels() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["spectrum", "--model", "adjacency", "--out", "spec.csv"], dir.path()));
    let text = fs::read_to_string(dir.path().join("spec.csv")).unwrap();
    assert!(text.starts_with("# cayley-spectra "));
    let (header, rows) = csv_rows(&text);
    assert_eq!(&header[..4], ["cluster_index", "eigenvalue", "multiplicity", "irrep_label"]);
    let eig = column(&header, "eigenvalue");
    let mult = column(&header, "multiplicity");
    let r5 = 5f64.sqrt();
    let expected = [
        (-2.0, 1),
        ((5.0 - r5) / 4.0, 3),
        ((5.0 + r5) / 4.0, 3),
        ((1.0 + 21f64.sqrt()) / 4.0, 4),
        ((1.0 + 13f64.sqrt()) / 4.0, 5),
    ];
    for (value, m) in expected {
        let row = rows
            .iter()
            .find(|r| (r[eig].parse::<f64>().unwrap() - value).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no eigenvalue near {value}"));
        assert_eq!(row[mult], m.to_string());
    }
    let total: usize = rows.iter().map(|r| r[mult].parse::<usize>().unwrap()).sum();
    assert_eq!(total, 60);
}

#[test]
fn irreps_put_ag_at_minus_two() {
    let dir = tempfile::tempdir().unwrap();
    let (header, rows) = csv_rows(&ok(&run(&["irreps", "--model", "adjacency"], dir.path())));
    let (eig, label) = (column(&header, "eigenvalue"), column(&header, "irrep_label"));
    let ag: Vec<&Vec<String>> = rows.iter().filter(|r| r[label] == "Ag").collect();
    assert_eq!(ag.len(), 1);
    assert!((ag[0][eig].parse::<f64>().unwrap() + 2.0).abs() < 1e-9);
    assert!(rows.iter().all(|r| !r[label].is_empty()));
    assert!(header.contains(&"chi_15C2".to_string()));
}

#[test]
fn pairings_are_integral_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let (header, rows) = csv_rows(&ok(&run(&["pairings"], dir.path())));
    let err = column(&header, "max_rounding_error");
    let n_cols: Vec<usize> = ["n_Ag", "n_T1g", "n_T2g", "n_Gg", "n_Hg"].iter().map(|c| column(&header, c)).collect();
    for r in &rows {
        assert!(r[err].parse::<f64>().unwrap() < 1e-6);
        let n: Vec<i64> = n_cols.iter().map(|&k| r[k].parse().unwrap()).collect();
        assert_eq!(n.iter().sum::<i64>(), 1, "{n:?}");
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| vec!["flow", "--pairs", "Ag-Hg,Gg-Gg", "--samples", "41", "--out-dir", out];
    ok(&run(&args("a"), dir.path()));
    ok(&run(&args("b"), dir.path()));
    let mut threaded = vec!["--threads", "1"];
    threaded.extend(args("c"));
    ok(&run(&threaded, dir.path()));

    let strip = |files: Vec<(String, Vec<u8>)>, dir: &str| -> Vec<(String, String)> {
        // out_dir is part of the recorded config
        files.into_iter().map(|(n, b)| (n, String::from_utf8(b).unwrap().replace(&format!("\"{dir}\""), "\"DIR\""))).collect()
    };
    let a = strip(files_in(&dir.path().join("a")), "a");
    assert_eq!(a.len(), 5);
    assert_eq!(a, strip(files_in(&dir.path().join("b")), "b"));
    assert_eq!(a, strip(files_in(&dir.path().join("c")), "c"));

    let first = ok(&run(&["spectrum", "--model", "random", "--seed", "3"], dir.path()));
    assert_eq!(first, ok(&run(&["spectrum", "--model", "random", "--seed", "3"], dir.path())));
    assert_ne!(first, ok(&run(&["spectrum", "--model", "random", "--seed", "4"], dir.path())));
}

#[test]
fn unknown_flag_is_a_usage_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--out", "spec.csv", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "usage");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());

    let out = run(&["nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_files_are_schema_checked() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"flow": {"sigma": 0.1}}"#).unwrap();
    let out = run(&["--config", "bad.json", "flow", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(error_record(&out)["error"]["message"].as_str().unwrap().contains("sigma"));
    assert!(!dir.path().join("o").exists());

    fs::write(dir.path().join("top.json"), r#"{"seeds": 3}"#).unwrap();
    assert_eq!(run(&["--config", "top.json", "spectrum"], dir.path()).status.code(), Some(2));

    fs::write(dir.path().join("good.json"), r#"{"spectrum": {"model": "squared:Hg"}}"#).unwrap();
    let text = ok(&run(&["--config", "good.json", "spectrum"], dir.path()));
    assert!(text.contains(r#""model":"squared:Hg""#));
    let (header, rows) = csv_rows(&text);
    let (eig, label) = (column(&header, "eigenvalue"), column(&header, "irrep_label"));
    assert!(rows[0][eig].parse::<f64>().unwrap().abs() < 1e-9);
    assert_eq!(rows[0][label], "Hg");
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"seed": 21}"#).unwrap();
    let seed_line = |args: &[&str], env: Option<&str>| {
        let mut cmd = bin();
        cmd.args(args).current_dir(dir.path());
        if let Some(e) = env {
            cmd.env("CAYLEY_SPECTRA_SEED", e);
        }
        ok(&cmd.output().unwrap()).lines().find(|l| l.starts_with("# seed:")).unwrap().to_string()
    };
    assert_eq!(seed_line(&["spectrum"], None), "# seed: 7");
    assert_eq!(seed_line(&["spectrum"], Some("11")), "# seed: 11");
    assert_eq!(seed_line(&["--config", "c.json", "spectrum"], Some("11")), "# seed: 21");
    assert_eq!(seed_line(&["--config", "c.json", "spectrum", "--seed", "5"], Some("11")), "# seed: 5");

    let mut cmd = bin();
    let out = cmd.args(["spectrum"]).env("CAYLEY_SPECTRA_SEED", "x").current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // a pose on a 2-fold axis, oriented about that axis, has a stabilizer
    let out = run(&["molecule", "--seed", "0,0,1,0,0,1,0.3", "--out-dir", "m"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"]["kind"], "numeric");
}

#[test]
fn molecule_writes_architecture_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["molecule", "--sweep", "0.1:2:20", "--out-dir", "m"], dir.path()));
    let arch: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m/architecture.json")).unwrap()).unwrap();
    assert_eq!(arch["metadata"]["command"], "molecule");
    let sites = arch["architecture"]["sites"].as_array().unwrap();
    assert_eq!(sites.len(), 60);
    assert_eq!(sites[0]["orientation"].as_array().unwrap().len(), 9);
    let (header, rows) = csv_rows(&fs::read_to_string(dir.path().join("m/sweep.csv")).unwrap());
    assert_eq!(header.len(), 61);
    assert_eq!(rows.len(), 20);
    let svg = fs::read_to_string(dir.path().join("m/sweep.svg")).unwrap();
    assert!(svg.contains(r#"width="1000" height="600""#));
}

#[test]
fn truncation_outputs_mark_the_closing() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["truncate", "--irrep", "Gg", "--samples", "60", "--out-dir", "t"], dir.path()));
    let (header, rows) = csv_rows(&fs::read_to_string(dir.path().join("t/summary.csv")).unwrap());
    assert_eq!(rows.len(), 1);
    let t_c: f64 = rows[0][column(&header, "t_c")].parse().unwrap();
    assert!(t_c > 3.0 && t_c < std::f64::consts::PI + 1e-3);
    let (header, rows) = csv_rows(&fs::read_to_string(dir.path().join("t/truncate_Gg.csv")).unwrap());
    assert_eq!(header.len(), 63);
    assert_eq!(rows.len(), 60);
    let svg = fs::read_to_string(dir.path().join("t/truncate_Gg.svg")).unwrap();
    assert!(svg.contains("<!--\ncayley-spectra"));
    assert!(svg.contains("t_c = "));
}

#[test]
fn graph_and_group_exports() {
    let dir = tempfile::tempdir().unwrap();
    let dot = ok(&run(&["graph"], dir.path()));
    // one arrow per vertex and generator (C5, C2)
    assert_eq!(dot.matches(" -> ").count(), 120);
    let json: serde_json::Value = serde_json::from_str(&ok(&run(&["graph", "--format", "json"], dir.path()))).unwrap();
    assert_eq!(json["graph"]["edges"].as_array().unwrap().len(), 90);
    let group: serde_json::Value = serde_json::from_str(&ok(&run(&["group"], dir.path()))).unwrap();
    assert_eq!(group["group"]["order"], 60);
    assert_eq!(run(&["graph", "--group", "oh"], dir.path()).status.code(), Some(2));
}

#[test]
fn help_documents_columns_and_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let top = ok(&run(&["--help"], dir.path()));
    assert!(top.contains("flow --perturb disorder --width 1.0"));
    assert!(top.contains("CAYLEY_SPECTRA_SEED"));
    let spectrum = ok(&run(&["spectrum", "--help"], dir.path()));
    assert!(spectrum.contains("cluster_index, eigenvalue, multiplicity, irrep_label"));
    let flow = ok(&run(&["flow", "--help"], dir.path()));
    assert!(flow.contains("pair_label, irrep_a, irrep_b, crossing_lambda, min_gap"));
}
