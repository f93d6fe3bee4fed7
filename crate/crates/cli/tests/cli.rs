use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bilateral"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rd_config(lambda: &str, extra: &str) -> String {
    format!(
        "[plant]\nclass = \"reaction-diffusion\"\nhalf_length = 1.0\nlambda = {lambda}\n\n\
         [solver]\nnodes = 81\n\n[simulation]\nhorizon = 0.5\ndt = 1e-3\nu0 = \"sin(pi*(x + 1)/2)\"\n{extra}"
    )
}

/// Parses a kernel CSV into `(x, xi, K)` rows.
fn kernel_rows(path: PathBuf) -> Vec<[f64; 3]> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["x", "xi", "K"]);
    r.deserialize::<(f64, f64, f64)>()
        .map(|row| {
            let (a, b, c) = row.unwrap();
            [a, b, c]
        })
        .collect()
}

#[test]
fn explicit_kernel_diagonal() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "rd.toml", &rd_config("5", ""));
    let o = run(&["kernel", cfg.to_str().unwrap(), "--method", "explicit", "--class", "reaction-diffusion", "--out", "k"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = kernel_rows(tmp.path().join("k/kernel_K.csv"));
    let diag: Vec<_> = rows.iter().filter(|r| r[0] == r[1]).collect();
    assert_eq!(diag.len(), 81);
    for r in diag {
        assert!((r[2] + 2.5 * r[0]).abs() < 1e-12, "{r:?}");
    }
    let report = json(tmp.path().join("k/report.json"));
    assert_eq!(report["provenance"], "explicit");
    assert!(report["boundary_residuals"]["diagonal"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["config"]["solver"]["method"], "explicit");
}

#[test]
fn zero_lambda_gives_zero_kernel() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "rd.toml", &rd_config("0", ""));
    let o = run(&["kernel", cfg.to_str().unwrap(), "--out", "k"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(kernel_rows(tmp.path().join("k/kernel_K.csv")).iter().all(|r| r[2] == 0.0));
}

#[test]
fn runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "rd.toml", &rd_config("\"5 + 3*sin(2*x)\"", ""));
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        assert_eq!(code(&run(&["kernel", cfg.to_str().unwrap(), "--out", "k"], tmp.path())), 0);
        assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", "s"], tmp.path())), 0);
        let files = ["k/kernel_K.csv", "k/kernel_K.json", "k/gains.csv", "k/report.json", "s/trajectory.csv", "s/summary.json"];
        snapshots.push(files.map(|f| fs::read(tmp.path().join(f)).unwrap()));
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn open_loop_grows_closed_loop_decays() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "rd.toml", &rd_config("12", ""));
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["simulate", c, "--open-loop", "--out", "open"], tmp.path())), 0);
    let open = json(tmp.path().join("open/summary.json"));
    assert_eq!(open["summary"]["grows"], true);
    assert_eq!(open["control"], "open-loop");

    assert_eq!(code(&run(&["simulate", c, "--closed-loop", "--target-check", "--out", "closed"], tmp.path())), 0);
    let closed = json(tmp.path().join("closed/summary.json"));
    assert_eq!(closed["summary"]["decays"], true);
    assert!(closed["target_check"]["max_boundary_residual"].as_f64().unwrap() < 1e-6);

    let mut r = csv::Reader::from_path(tmp.path().join("closed/trajectory.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["t", "x", "field", "value"]);
    assert_eq!(r.records().count(), closed["times"].as_array().unwrap().len() * 81);
}

#[test]
fn zero_initial_condition_stays_zero() {
    let tmp = TempDir::new().unwrap();
    let text = rd_config("12", "").replace("u0 = \"sin(pi*(x + 1)/2)\"", "u0 = 0");
    let cfg = write(tmp.path(), "rd.toml", &text);
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--out", "z"], tmp.path())), 0);
    let s = json(tmp.path().join("z/summary.json"));
    for key in ["U1", "U2"] {
        assert!(s["actuators"][key].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    }
    let mut r = csv::Reader::from_path(tmp.path().join("z/trajectory.csv")).unwrap();
    assert!(r.deserialize::<(f64, f64, String, f64)>().all(|row| row.unwrap().3 == 0.0));
}

#[test]
fn embedded_config_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    let hyp = "[plant]\nclass = \"hyperbolic\"\nhalf_length = 1.0\nc1 = 0.2\nc2 = \"1 + 0.5*x\"\nc3 = 0.8\nc4 = -0.1\n\
               [solver]\nnodes = 61\n[simulation]\nhorizon = 2.2\nu0 = \"sin(pi*(x + 1)/2)\"\nv0 = \"1 + x^2\"\n";
    let cfg = write(tmp.path(), "hyp.toml", hyp);
    assert_eq!(code(&run(&["simulate", cfg.to_str().unwrap(), "--target-check", "--out", "a"], tmp.path())), 0);
    let summary = json(tmp.path().join("a/summary.json"));
    let embedded = toml::to_string(&summary["config"]).unwrap();
    let again = write(tmp.path(), "embedded.toml", &embedded);
    assert_eq!(code(&run(&["simulate", again.to_str().unwrap(), "--out", "b"], tmp.path())), 0);
    assert_eq!(
        fs::read(tmp.path().join("a/trajectory.csv")).unwrap(),
        fs::read(tmp.path().join("b/trajectory.csv")).unwrap()
    );
    let rerun = json(tmp.path().join("b/summary.json"));
    assert_eq!(rerun["norms"], summary["norms"]);
    assert_eq!(rerun["target_check"], summary["target_check"]);
    let sup = summary["target_check"]["transformed_sup"].as_array().unwrap();
    assert!(sup.last().unwrap().as_f64().unwrap() < 1e-3 * sup[0].as_f64().unwrap());
}

#[test]
fn wave_closed_loop_from_config() {
    let tmp = TempDir::new().unwrap();
    let wave = "[plant]\nclass = \"wave\"\nhalf_length = 1.0\nlambda = 0.5\n\
                [solver]\nnodes = 101\nmethod = \"explicit\"\n\
                [simulation]\nhorizon = 2.5\nu0 = \"0.2*sin(pi*x) + 0.1\"\nut0 = \"cos(pi*x/2)\"\n";
    let cfg = write(tmp.path(), "wave.toml", wave);
    let o = run(&["simulate", cfg.to_str().unwrap(), "--target-check", "--out", "w"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(tmp.path().join("w/summary.json"));
    assert_eq!(s["fields"], serde_json::json!(["u", "w", "v"]));
    let sup = s["norms"]["sup"].as_array().unwrap();
    assert!(sup.last().unwrap().as_f64().unwrap() < 1e-3 * sup[0].as_f64().unwrap());

    let o = run(&["kernel", cfg.to_str().unwrap(), "--method", "numeric", "--out", "k"], tmp.path());
    assert_eq!(code(&o), 0);
    let report = json(tmp.path().join("k/report.json"));
    assert!(report["series_ledger"]["max_ratio"].as_f64().unwrap() <= 1.0);
    for c in ["uu", "uv", "vu", "vv"] {
        assert!(tmp.path().join(format!("k/kernel_{c}.csv")).exists());
    }
}

#[test]
fn tabulated_coefficient() {
    let tmp = TempDir::new().unwrap();
    let mut table = String::from("x,lambda\n");
    for k in 0..=20 {
        let x = -1.0 + 0.1 * k as f64;
        table.push_str(&format!("{x},{}\n", 4.0 + x));
    }
    write(tmp.path(), "lambda.csv", &table);
    let cfg = write(tmp.path(), "rd.toml", &rd_config("{ table = \"lambda.csv\" }", ""));
    let o = run(&["kernel", cfg.to_str().unwrap(), "--out", "k"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(tmp.path().join("k/report.json"));
    assert!(report["boundary_residuals"]["diagonal"].as_f64().unwrap() < 1e-6);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    let unknown = write(p, "unknown.toml", &rd_config("5", "colour = \"red\"\n"));
    assert_eq!(code(&run(&["kernel", unknown.to_str().unwrap()], p)), 2);
    let missing = write(p, "missing.toml", "[plant]\nclass = \"hyperbolic\"\nhalf_length = 1.0\nc1 = 0\n");
    assert_eq!(code(&run(&["kernel", missing.to_str().unwrap()], p)), 2);
    assert_eq!(code(&run(&["kernel", "does-not-exist.toml"], p)), 2);

    let variable = write(p, "var.toml", &rd_config("\"1 + x\"", ""));
    let o = run(&["kernel", variable.to_str().unwrap(), "--method", "explicit"], p);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&run(&["kernel", variable.to_str().unwrap(), "--class", "wave"], p)), 2);

    let stiff = write(p, "stiff.toml", &rd_config("12", "").replace("[solver]\nnodes = 81", "[solver]\nnodes = 81\nmax_iter = 2"));
    assert_eq!(code(&run(&["kernel", stiff.to_str().unwrap()], p)), 3);

    let diverge = "[plant]\nclass = \"reaction-diffusion\"\nhalf_length = 1.0\nlambda = 39\n\
                   [solver]\nnodes = 21\n[simulation]\ncontrol = \"open-loop\"\nhorizon = 20.0\ndt = 0.05\nu0 = \"sin(pi*(x + 1)/2)\"\n";
    let diverge = write(p, "diverge.toml", diverge);
    assert_eq!(code(&run(&["simulate", diverge.to_str().unwrap(), "--out", "d"], p)), 4);
}

#[test]
fn compare_crossover_and_edge_cases() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    let o = run(&["compare", "--delta-min", "0.5", "--delta-max", "5", "--samples", "10", "--out", "a"], p);
    assert_eq!(code(&o), 0);
    let s = json(p.join("a/effort.json"));
    let star = s["crossover"]["literal"].as_f64().unwrap();
    assert!((1.5..=2.5).contains(&star));
    assert!(s["crossover"]["shifted"].is_null());
    let mut r = csv::Reader::from_path(p.join("a/effort.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["delta", "J1_literal", "J1_shifted", "J2"]);
    assert_eq!(r.records().count(), 10);

    let o = run(&["compare", "--delta-min", "0.1", "--delta-max", "0.2", "--out", "b"], p);
    assert_eq!(code(&o), 3);
    assert!(p.join("b/effort.csv").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("not found"));

    let o = run(&["compare", "--samples", "1", "--out", "c"], p);
    assert_eq!(code(&o), 0);
    let s = json(p.join("c/effort.json"));
    assert_eq!(s["crossover_attempted"], false);
    assert_eq!(s["points"], 1);

    assert_eq!(code(&run(&["compare", "--delta-min", "3", "--delta-max", "2"], p)), 2);
}
