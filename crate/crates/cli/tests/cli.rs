use std::path::Path;
use std::process::{Command, Output};

fn sparselab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparselab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn table(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn concentration_csv_header_and_rows() {
    let o = sparselab(&["concentration", "--alpha", "0.5", "--k-min", "10", "--k-max", "12", "--trials", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# sparselab "));
    let lines = table(&text);
    assert_eq!(lines[0], "alpha,k,seed,opnorm,bound,exceed");
    assert_eq!(lines.len(), 1 + 3 * 4);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        let (opnorm, bound): (f64, f64) = (cells[3].parse().unwrap(), cells[4].parse().unwrap());
        assert_eq!(cells[5] == "true", opnorm > bound);
    }
}

#[test]
fn domination_run_reports_ratios() {
    let o = sparselab(&[
        "domination", "--operator", "random-hilbert", "--alpha", "0.3", "--r", "1.5", "--n", "4096", "--trials", "20",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["provenance"]["experiment"], "domination");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    for (t, row) in rows.iter().enumerate() {
        assert_eq!(row["trial"], t);
        let ratio = row["ratio"].as_f64().unwrap();
        assert!(ratio.is_finite() && ratio >= 0.0);
    }
    assert!(doc["sup_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_experiment_is_usage_error() {
    assert_eq!(sparselab(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"frobnicate\"\n").unwrap();
    let o = sparselab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frobnicate"));
}

#[test]
fn invalid_parameter_is_usage_error() {
    assert_eq!(sparselab(&["opnorm", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(sparselab(&["wnorm", "--weight", "b=1"]).status.code(), Some(2));
    assert_eq!(sparselab(&["opnorm", "--k-min", "9", "--k-max", "3"]).status.code(), Some(2));
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("interp.toml");
    std::fs::write(&cfg, "experiment = \"interp\"\nalpha = 0.5\nr = 1.75\n").unwrap();
    let o = sparselab(&["interp", "--alpha", "0.9", "--r", "1.95", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["provenance"]["settings"]["alpha"], 0.5);
    // r0 = 3/2, θ(7/4) = 6/7, so η = 3/14 − 1/14
    assert!((doc["r0"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((doc["eta"].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-12);

    let via_run = sparselab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout(&via_run), stdout(&o));
}

#[test]
fn config_and_subcommand_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "experiment = \"badset\"\n").unwrap();
    assert_eq!(sparselab(&["opnorm", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = sparselab(&[
            "scale-bounds", "--alpha", "0.5", "--k-min", "5", "--k-max", "6", "--trials", "8", "--seed", "7", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(Path::new(&path)).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn osc_decay_columns() {
    let o = sparselab(&["osc-decay", "--phase", "d=2", "--k-min", "3", "--k-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines = table(&text);
    assert_eq!(lines[0], "k,norm,fitted_eta");
    let norms: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(norms.len(), 3);
    assert!(norms.windows(2).all(|w| w[1] < w[0]));
}
