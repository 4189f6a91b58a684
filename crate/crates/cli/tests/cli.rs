use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use urcwet_core::{eps_closed_form, BlockAllocation, SystemParams};

const BASE: &str = "\
m = 3
eta = 0.5
p_d_dbm = 30
d = 12
alpha = 3
kappa = 1e3
sigma2_d_dbm = -110
t_c = 3e-6
k_bits = 216
";

struct Scenario {
    dir: tempfile::TempDir,
}

impl Scenario {
    fn new(extra: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.conf"), format!("{BASE}{extra}")).unwrap();
        Self { dir }
    }

    fn raw(text: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.conf"), text).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_urcwet"))
            .arg("--config")
            .arg(self.path("s.conf"))
            .args(args)
            .output()
            .unwrap()
    }
}

fn records(bytes: &[u8]) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

fn field<'a>(header: &csv::StringRecord, row: &'a csv::StringRecord, name: &str) -> &'a str {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    &row[i]
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn eval_reports_every_evaluator() {
    let s = Scenario::new("n = 300\nv = 3000\nmc_samples = 200000\n");
    let out = s.run(&["eval"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = records(&out.stdout);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    for col in ["eps_mc", "eps_quad_exact", "eps_quad_lin", "eps_closed", "eps_asymptotic"] {
        let x: f64 = field(&h, row, col).parse().unwrap();
        assert!(x > 0.0 && x < 1.0, "{col} = {x}");
    }
    let closed: f64 = field(&h, row, "eps_closed").parse().unwrap();
    let lin: f64 = field(&h, row, "eps_quad_lin").parse().unwrap();
    assert!(((closed - lin) / lin).abs() < 1e-6);
    assert_eq!(field(&h, row, "delta"), "3300");
    assert_eq!(field(&h, row, "nu").parse::<f64>().unwrap(), 3000.0 / 3300.0);
}

#[test]
fn eval_values_round_trip_exactly() {
    let s = Scenario::new("mc_samples = 0\n");
    let out = s.run(&["eval", "--v", "2000", "--n", "250"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = records(&out.stdout);
    let direct = eps_closed_form(&SystemParams::reference(), &BlockAllocation::new(2000, 250, 216).unwrap())
        .unwrap()
        .value;
    assert_eq!(field(&h, &rows[0], "eps_closed").parse::<f64>().unwrap(), direct);
    assert_eq!(field(&h, &rows[0], "eps_mc"), "");
}

#[test]
fn equal_seeds_give_identical_monte_carlo() {
    let s = Scenario::new("n = 300\nv = 1500\nmc_samples = 100000\nseed = 5\n");
    let a = s.run(&["eval"]);
    let b = s.run(&["eval", "--jobs", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let c = s.run(&["eval", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn missing_key_exits_2_and_names_it() {
    let s = Scenario::raw(&BASE.replace("m = 3\n", ""));
    let out = s.run(&["eval", "--v", "10", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`m`"));
}

#[test]
fn config_errors_exit_2() {
    for bad in ["colour = red\n", "p_d_w = 1\n", "eta\n", "eta = 2\n"] {
        let text = if bad == "eta = 2\n" {
            BASE.replace("eta = 0.5", "eta = 2")
        } else {
            format!("{BASE}{bad}")
        };
        let out = Scenario::raw(&text).run(&["eval", "--v", "10", "--n", "100"]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    let s = Scenario::new("");
    let out = s.run(&["eval", "--v", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`n`"));
    let out = Command::new(env!("CARGO_BIN_EXE_urcwet"))
        .args(["--config", "/nonexistent/x.conf", "validate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_grid_exits_2() {
    let s = Scenario::new("grid_n =\n");
    assert_eq!(s.run(&["validate"]).status.code(), Some(2));
}

#[test]
fn validate_small_grid_passes() {
    let s = Scenario::new("grid_m = 1, 3\ngrid_k = 96\ngrid_n = 300\ngrid_eps = 0.1, 1e-4\nmc_samples = 100000\n");
    let out_path = s.path("v.csv");
    let out = s.run(&["validate", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = records(&read(&out_path));
    let cols: Vec<&str> = h.iter().collect();
    for c in [
        "m",
        "k",
        "n",
        "v",
        "eps_mc",
        "mc_stderr",
        "eps_quad_exact",
        "eps_quad_lin",
        "eps_closed",
        "log10_ratio_closed_vs_exact",
        "flags",
    ] {
        assert!(cols.contains(&c), "{c}");
    }
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let ratio: f64 = field(&h, r, "log10_ratio_closed_vs_exact").parse().unwrap();
        assert!(ratio.abs() < 0.1);
        assert!(!field(&h, r, "flags").contains("identity_fail"));
    }
}

#[test]
fn infeasible_sweep_exits_1() {
    let s = Scenario::new("eps_target = 1e-5\nn_min = 100\nn_max = 110\nv_max = 20\ncertify = false\n");
    let out_path = s.path("k.csv");
    let out = s.run(&["sweep", "--mode", "min_delay_vs_k", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let (h, rows) = records(&read(&out_path));
    assert_eq!(field(&h, &rows[0], "feasible"), "false");
}

#[test]
fn unknown_mode_is_a_usage_error() {
    let s = Scenario::new("eps_target = 1e-3\n");
    assert_eq!(s.run(&["sweep", "--mode", "nonsense"]).status.code(), Some(2));
}

#[test]
fn delay_vs_n_sweep_shape() {
    let s = Scenario::new("eps_targets = 1e-3, 1e-5\nn_min = 100\nn_max = 2000\nn_step = 50\n");
    let out_path = s.path("d.csv");
    let out = s.run(&["sweep", "--mode", "delay_vs_n", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = records(&read(&out_path));
    assert_eq!(rows.len(), 2 * 39);
    for target in ["1.0000000000000000e-3", "1.0000000000000001e-5"] {
        let curve: Vec<(u64, u64)> = rows
            .iter()
            .filter(|r| field(&h, r, "eps_target") == target && field(&h, r, "feasible") == "true")
            .map(|r| (field(&h, r, "n").parse().unwrap(), field(&h, r, "delta").parse().unwrap()))
            .collect();
        let (imin, _) = curve.iter().enumerate().min_by_key(|(_, (_, d))| *d).unwrap();
        assert!(imin > 0 && imin + 1 < curve.len(), "minimum must be interior");
        assert!(curve[..imin].windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(curve[imin..].windows(2).all(|w| w[1].1 >= w[0].1));
    }
}

#[test]
fn fixed_power_curve_sits_above_adaptive() {
    let s = Scenario::new("delta_list = 600, 1800\n");
    let a = s.path("a.csv");
    let f = s.path("f.csv");
    assert_eq!(s.run(&["sweep", "--mode", "eps_vs_delta", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(
        s.run(&["sweep", "--mode", "fixed_power_vs_delta", "--out", f.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let (ha, ra) = records(&read(&a));
    let (hf, rf) = records(&read(&f));
    for (x, y) in ra.iter().zip(&rf) {
        let adaptive: f64 = field(&ha, x, "eps_star").parse().unwrap();
        let fixed: f64 = field(&hf, y, "eps_star").parse().unwrap();
        assert!(fixed > adaptive);
    }
}

#[test]
fn output_key_and_flag_precedence() {
    let s = Scenario::new("delta_list = 500\n");
    let cfg_out = s.path("from_config.csv");
    std::fs::write(
        s.path("s.conf"),
        format!("{BASE}delta_list = 500\noutput = {}\n", cfg_out.display()),
    )
    .unwrap();
    assert_eq!(s.run(&["sweep", "--mode", "eps_vs_delta"]).status.code(), Some(0));
    assert!(cfg_out.exists());
    let flag_out = s.path("from_flag.csv");
    s.run(&["sweep", "--mode", "eps_vs_delta", "--out", flag_out.to_str().unwrap()]);
    assert_eq!(read(&cfg_out), read(&flag_out));
}
