use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RAYLEIGH: &str = r#"{"kind": "rayleigh", "mean_power_db": 0}"#;
const LOG_LOGISTIC: &str = r#"{"kind": "log_logistic"}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lowsnr(args: &[&str]) -> Run {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_lowsnr"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn users(dir: &Path, name: &str, specs: &[&str]) -> String {
    write(dir, name, &format!("{{\"users\": [{}]}}", specs.join(",")))
        .to_str()
        .unwrap()
        .to_string()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn of_kind(&self, kind: &str) -> Vec<usize> {
        let k = self.col("kind");
        (0..self.rows.len())
            .filter(|&i| self.rows[i][k] == kind)
            .collect()
    }
}

#[test]
fn single_sweep_reports_every_budget() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH]);
    let run = lowsnr(&["single", "--spec", &spec, "--budget-db", "0:-60:13"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    assert_eq!(csv.rows.len(), 13);
    for i in 0..13 {
        assert_eq!(csv.num(i, "budget_db"), -5.0 * i as f64);
        let ratio = csv.num(i, "c_onoff_nats") / csv.num(i, "c_csit_nats");
        assert!((csv.num(i, "eta") - ratio).abs() < 1e-15);
    }
    // eta dips while the water level is still small and climbs once the
    // budget falls below about -20 dB.
    let etas: Vec<f64> = (4..13).map(|i| csv.num(i, "eta")).collect();
    assert!(etas.windows(2).all(|w| w[1] >= w[0]), "{etas:?}");
    assert!(csv.num(4, "eta") < csv.num(0, "eta"));
}

#[test]
fn bits_divide_every_rate_by_ln2() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH]);
    let nats = Csv::parse(&lowsnr(&["single", "--spec", &spec, "--budget-db", "0,-30"]).stdout);
    let bits = Csv::parse(
        &lowsnr(&[
            "single",
            "--spec",
            &spec,
            "--budget-db",
            "0,-30",
            "--unit",
            "bits",
        ])
        .stdout,
    );
    for name in ["c_csit", "c_onoff", "c_asymptotic", "c_csir", "c_awgn"] {
        for row in 0..2 {
            let n = nats.num(row, &format!("{name}_nats"));
            let b = bits.num(row, &format!("{name}_bits"));
            assert!(
                (b - n / std::f64::consts::LN_2).abs() <= 1e-15 * b,
                "{name}"
            );
        }
    }
    assert_eq!(nats.num(1, "eta"), bits.num(1, "eta"));
}

#[test]
fn infinite_mean_gain_has_no_finite_static_baseline() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "l.json", &[LOG_LOGISTIC]);
    let run = lowsnr(&["single", "--spec", &spec, "--budget-db", "-20"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    assert!(csv.num(0, "c_awgn_nats").is_infinite());
    assert!(csv.num(0, "c_csit_nats").is_finite());
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let one = users(dir.path(), "one.json", &[RAYLEIGH]);
    let two = users(dir.path(), "two.json", &[RAYLEIGH, RAYLEIGH]);
    let broken = write(dir.path(), "bad.json", "{\"kind\": \"weibull\"}");
    let missing = dir.path().join("missing.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["single", "--spec", &one, "--budget-db", ""],
        vec!["single", "--spec", broken.to_str().unwrap()],
        vec!["single", "--spec", missing.to_str().unwrap()],
        vec!["single"],
        vec!["single", "--spec", &two],
        vec!["mac-region", "--spec", &one],
        vec!["mac-region", "--spec", &two, "--budget-db", "0,-10,-20"],
        vec!["bc-region", "--spec", &two, "--grid", "1"],
        vec!["bc-region", "--spec", &two, "--budget-db", "0,-10"],
        vec!["eta-sweep", "--spec", &one],
        vec!["sepup", "--spec", &one],
        vec!["single", "--spec", &one, "--unit", "hartleys"],
    ];
    for args in &cases {
        let run = lowsnr(args);
        assert_eq!(run.code, 2, "{args:?}: {}", run.stderr);
        assert!(!run.stderr.is_empty());
    }
    let run = lowsnr(&["mac-region", "--spec", &one]);
    assert!(run.stderr.contains("K >= 2"), "{}", run.stderr);
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "l.json", &[LOG_LOGISTIC]);
    let run = lowsnr(&["single", "--spec", &spec, "--budget-db=-3000"]);
    assert_eq!(run.code, 3, "{}", run.stderr);
    assert!(run.stderr.contains("numerical failure"));
}

#[test]
fn mac_region_at_unit_budget() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&["mac-region", "--spec", &spec, "--budget-db", "0"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    assert_eq!(csv.header, ["R1_nats", "R2_nats", "kind"]);
    let corner = csv
        .of_kind("rectangle")
        .iter()
        .map(|&i| csv.num(i, "R1_nats"))
        .fold(0.0, f64::max);
    let onoff = csv.num(csv.of_kind("onoff")[0], "R1_nats");
    assert!((onoff / corner - 0.90).abs() <= 0.03, "{}", onoff / corner);
    for kind in ["tdma", "sumrate"] {
        assert_eq!(csv.of_kind(kind).len(), 1, "{kind}");
    }
    assert_eq!(csv.of_kind("awgn_pentagon").len(), 5);
    assert_eq!(csv.of_kind("csir").len(), 5);
    // At unit budget the static AWGN sum rate ln 3 splits into corners ln 2 and ln 1.5.
    let pent: Vec<f64> = csv
        .of_kind("awgn_pentagon")
        .iter()
        .map(|&i| csv.num(i, "R1_nats"))
        .collect();
    assert!(pent.iter().any(|r| (r - 2f64.ln()).abs() < 1e-15));
    assert!(pent.iter().any(|r| (r - 1.5f64.ln()).abs() < 1e-15));
}

#[test]
fn mac_region_with_unequal_budgets_is_asymmetric() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&["mac-region", "--spec", &spec, "--budget-db=-40,-30"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    assert!(csv.of_kind("tdma").is_empty());
    let i = csv.of_kind("sumrate")[0];
    assert!(csv.num(i, "R2_nats") > 5.0 * csv.num(i, "R1_nats"));
}

#[test]
fn three_user_json_carries_constraint_lists() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r3.json", &[RAYLEIGH, RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&[
        "mac-region",
        "--spec",
        &spec,
        "--budget-db=-10",
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["columns"][3], "kind");
    let constraints = v["constraints"].as_array().unwrap();
    let awgn: Vec<_> = constraints
        .iter()
        .filter(|c| c["kind"] == "awgn_pentagon")
        .collect();
    assert_eq!(awgn.len(), 7);
    let csir: Vec<_> = constraints.iter().filter(|c| c["kind"] == "csir").collect();
    assert_eq!(csir.len(), 7);
}

#[test]
fn bc_rayleigh_timesharing_is_nearly_optimal() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&[
        "bc-region",
        "--spec",
        &spec,
        "--budget-db=-70",
        "--grid",
        "21",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    let (dual, ts) = (csv.of_kind("bc_dual"), csv.of_kind("timeshare"));
    assert_eq!((dual.len(), ts.len()), (21, 21));
    let mid = 10;
    assert_eq!(csv.num(dual[mid], "alpha1"), 0.5);
    let gap = csv.num(dual[mid], "R1_nats") / csv.num(ts[mid], "R1_nats");
    assert!(gap > 1.0 && gap < 1.07, "{gap}");
}

#[test]
fn bc_log_logistic_timesharing_is_strictly_inside() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "l.json", &[LOG_LOGISTIC, LOG_LOGISTIC]);
    let run = lowsnr(&[
        "bc-region",
        "--spec",
        &spec,
        "--budget-db=-70",
        "--grid",
        "11",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    let (dual, ts) = (csv.of_kind("bc_dual"), csv.of_kind("timeshare"));
    let gap = csv.num(dual[5], "R1_nats") / csv.num(ts[5], "R1_nats");
    assert!((gap - 2f64.sqrt()).abs() < 0.01, "{gap}");
    for (&d, &t) in dual.iter().zip(&ts).skip(1).take(9) {
        assert!(csv.num(t, "R1_nats") < csv.num(d, "R1_nats"));
        assert!(csv.num(t, "R2_nats") < csv.num(d, "R2_nats"));
    }
}

#[test]
fn bc_grid_of_two_gives_the_corners() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&[
        "bc-region",
        "--spec",
        &spec,
        "--budget-db=-30",
        "--grid",
        "2",
    ]);
    let csv = Csv::parse(&run.stdout);
    for kind in ["bc_dual", "timeshare"] {
        let rows = csv.of_kind(kind);
        assert_eq!(rows.len(), 2);
        assert_eq!(csv.num(rows[0], "R1_nats"), 0.0);
        assert_eq!(csv.num(rows[1], "R2_nats"), 0.0);
    }
}

#[test]
fn eta_sweep_rises_past_the_minus_ten_db_anchor() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&["eta-sweep", "--spec", &spec, "--budget-db", "0:-60:13"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    let etas: Vec<f64> = (0..13).map(|i| csv.num(i, "eta")).collect();
    assert!(etas.windows(2).all(|w| w[1] >= w[0]), "{etas:?}");
    assert!(etas[2] >= 0.94, "{}", etas[2]);
    let one = Csv::parse(&lowsnr(&["eta-sweep", "--spec", &spec, "--budget-db=-10"]).stdout);
    assert_eq!(one.rows.len(), 1);
    assert_eq!(one.num(0, "eta"), etas[2]);
}

#[test]
fn sepup_regions_nest_as_budgets_shrink() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let run = lowsnr(&["sepup", "--spec", &spec, "--budget-db=-20,-40,-60"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = Csv::parse(&run.stdout);
    let corners: Vec<f64> = csv
        .of_kind("rectangle")
        .iter()
        .map(|&i| csv.num(i, "S1_nats_per_joule"))
        .collect();
    let per_budget: Vec<f64> = corners
        .chunks(3)
        .map(|c| c.iter().cloned().fold(0.0, f64::max))
        .collect();
    assert!(per_budget.windows(2).all(|w| w[1] > w[0]), "{per_budget:?}");
    let onoff: Vec<f64> = csv
        .of_kind("onoff")
        .iter()
        .map(|&i| csv.num(i, "S1_nats_per_joule"))
        .collect();
    assert!(onoff.windows(2).all(|w| w[1] > w[0]), "{onoff:?}");
}

#[test]
fn sepup_at_unit_budget_equals_the_rates() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH]);
    let s = Csv::parse(&lowsnr(&["sepup", "--spec", &spec, "--budget-db", "0"]).stdout);
    let m = Csv::parse(&lowsnr(&["mac-region", "--spec", &spec, "--budget-db", "0"]).stdout);
    for kind in ["rectangle", "sumrate", "onoff"] {
        for (&i, &j) in s.of_kind(kind).iter().zip(&m.of_kind(kind)) {
            assert_eq!(s.num(i, "S1_nats_per_joule"), m.num(j, "R1_nats"));
            assert_eq!(s.num(i, "S2_nats_per_joule"), m.num(j, "R2_nats"));
        }
    }
    let b = Csv::parse(
        &lowsnr(&[
            "sepup",
            "--spec",
            &spec,
            "--budget-db",
            "0",
            "--unit",
            "bits",
        ])
        .stdout,
    );
    let i = b.of_kind("onoff")[0];
    let n = s.num(s.of_kind("onoff")[0], "S1_nats_per_joule");
    assert!((b.num(i, "S1_bits_per_joule") - n / std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn output_files_are_byte_stable() {
    let dir = TempDir::new().unwrap();
    let spec = users(dir.path(), "r.json", &[RAYLEIGH, RAYLEIGH, RAYLEIGH]);
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("out{i}.csv"));
            let run = lowsnr(&[
                "mac-region",
                "--spec",
                &spec,
                "--budget-db=-20",
                "--seed",
                "9",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(run.code, 0, "{}", run.stderr);
            assert!(run.stdout.is_empty());
            std::fs::read(out).unwrap()
        })
        .collect();
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn validate_passes_on_defaults() {
    let run = lowsnr(&["validate"]);
    assert_eq!(run.code, 0, "{}\n{}", run.stdout, run.stderr);
    let csv = Csv::parse(&run.stdout);
    assert_eq!(csv.header, ["criterion", "title", "passed", "detail"]);
    let passed = csv.col("passed");
    assert!(csv.rows.iter().all(|r| r[passed] == "true"));
}

#[test]
fn validate_names_the_first_failure_under_tight_tolerances() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", r#"{"dual_route_rel": 1e-18}"#);
    let run = lowsnr(&[
        "validate",
        "--spec",
        t.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("criterion 3"), "{}", run.stderr);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["rows"][2][2], false);
    assert_eq!(v["rows"][0][2], true);
}

#[test]
fn validate_rejects_missing_or_unknown_configs() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.json");
    assert_eq!(
        lowsnr(&["validate", "--spec", missing.to_str().unwrap()]).code,
        2
    );
    let odd = write(dir.path(), "odd.json", r#"{"no_such_tolerance": 1}"#);
    assert_eq!(
        lowsnr(&["validate", "--spec", odd.to_str().unwrap()]).code,
        2
    );
}
