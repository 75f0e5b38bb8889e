use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cornerq"));
    c.env_remove("CORNERQ_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cornerq")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        let w = Work { dir: tempfile::tempdir().unwrap() };
        fs::write(w.path("cfg.json"), r#"{"N_terms": 512}"#).unwrap();
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }

    fn build(&self, psi: &str, phi_n: &str, out: &str) -> Output {
        run(&["--config", &self.p("cfg.json"), "build", "--psi", psi, "--phi-n", phi_n, "--out", &self.p(out)])
    }

    fn cmd(&self, args: &[&str]) -> Output {
        let cfg = self.p("cfg.json");
        let mut all = vec!["--config", cfg.as_str()];
        all.extend_from_slice(args);
        run(&all)
    }
}

fn coeffs(v: &Value, key: &str) -> Vec<f64> {
    v[key].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn table1_command() {
    let w = Work::new();
    let o = run(&["table1", "--kmax", "20", "--out", &w.p("t.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.json("t.json");
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 21 * 2 * 4);

    let o = run(&["table1", "--kmax", "0", "--out", &w.p("t0.json")]);
    assert_eq!(code(&o), 0);

    assert_eq!(code(&run(&["table1", "--kmax"])), 2);
    assert_eq!(code(&run(&["table1", "--kmax", "ten"])), 2);
    assert_eq!(code(&run(&["table1", "--bogus"])), 2);
}

#[test]
fn build_examples() {
    let w = Work::new();
    let o = w.build("pi/4*cos(phi)", "-pi/4", "a.json");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = w.json("a.json");
    assert_eq!(a["omega1_terms"], 512);
    assert!(coeffs(&a, "v1").is_empty() && coeffs(&a, "v2").is_empty());

    let o = w.build("pi/4*cos(phi)+1", "-pi/4", "b.json");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = w.json("b.json");
    let v2 = coeffs(&b, "v2");
    // the constant mode f_0 = 1/π carries data 1
    assert_eq!(v2.len(), 1);
    assert!((v2[0] - std::f64::consts::PI).abs() < 1e-12);

    let o = w.build("cos(phi)", "-pi/4", "c.json");
    assert_eq!(code(&o), 3);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("nu_M(psi)") && out.contains("nu_N(phi_N) - phi_N"), "{out}");
    assert!(stderr(&o).contains("nu_M(psi)"));
    assert!(!w.path("c.json").exists());

    assert_eq!(code(&w.build("cos(phi", "-pi/4", "d.json")), 2);
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4*q", "d.json")), 2);
}

#[test]
fn verify_outcomes() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)+1", "-pi/4", "s.json")), 0);
    let o = w.cmd(&["verify", &w.p("s.json"), "--out", &w.p("r.json"), "--csv", &w.p("r.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.json("r.json");
    assert_eq!(r["pass"], true);
    let header = fs::read_to_string(w.path("r.csv")).unwrap();
    assert!(header.starts_with("region,rho,phi,alpha,theta,condition,residual\n"));

    // too few terms of the particular solution
    let mut edited = w.json("s.json");
    edited["omega1_terms"] = Value::from(2);
    fs::write(w.path("e.json"), edited.to_string()).unwrap();
    let o = w.cmd(&["verify", &w.p("e.json"), "--out", &w.p("re.json")]);
    assert_eq!(code(&o), 1);
    let re = w.json("re.json");
    let p3m = re["residuals"]["conditions"].as_array().unwrap().iter().find(|c| c["condition"] == "P3M").unwrap();
    assert_eq!(p3m["pass"], false);

    let zero = r#"{"omega1_terms":0,"v1":[],"v2":[],"data":{"psi":"0","phiN":"0"},
        "tolerances":{"constraint":1e-8,"mode_cap":128,"tail":1e-10,"drop_below":1e-14}}"#;
    fs::write(w.path("z.json"), zero).unwrap();
    let o = w.cmd(&["verify", &w.p("z.json"), "--out", &w.p("rz.json")]);
    assert_eq!(code(&o), 1);
    let rz = w.json("rz.json");
    let p3m = rz["residuals"]["conditions"].as_array().unwrap().iter().find(|c| c["condition"] == "P3M").unwrap();
    assert!((p3m["sup"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    assert_eq!(code(&w.cmd(&["verify", &w.p("missing.json")])), 2);
    fs::write(w.path("junk.json"), "{not json").unwrap();
    assert_eq!(code(&w.cmd(&["verify", &w.p("junk.json")])), 2);
    assert_eq!(code(&w.cmd(&["verify", &w.p("s.json"), "--delta", "-1"])), 2);
}

#[test]
fn act_transforms() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4", "s.json")), 0);

    let o = w.cmd(&["act", &w.p("s.json"), "--boost", "z:0", "--out", &w.p("id.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(w.json("id.json"), w.json("s.json"));

    assert_eq!(code(&w.cmd(&["act", &w.p("s.json"), "--lambda", "--out", &w.p("l1.json")])), 0);
    assert_eq!(code(&w.cmd(&["act", &w.p("l1.json"), "--lambda", "--out", &w.p("l2.json")])), 0);
    assert_eq!(w.json("l2.json")["transforms"].as_array().unwrap().len(), 2);
    for (f, csv) in [("s.json", "a.csv"), ("l2.json", "b.csv")] {
        let o = w.cmd(&["sample", &w.p(f), "--grid", "9x9", "--slice", "alpha=0.4,theta=2", "--out", &w.p(csv)]);
        assert_eq!(code(&o), 0);
    }
    let (a, b) = (csv_rows(&w.path("a.csv")), csv_rows(&w.path("b.csv")));
    for (ra, rb) in a.iter().zip(&b) {
        let (x, y): (f64, f64) = (ra[4].parse().unwrap(), rb[4].parse().unwrap());
        assert!((x - y).abs() < 1e-12);
    }

    for bad in ["z:2.5", "q:1", "z", "z:abc", "z:inf"] {
        let o = w.cmd(&["act", &w.p("s.json"), "--boost", bad, "--out", &w.p("x.json")]);
        assert_eq!(code(&o), 2, "{bad}");
    }
    assert_eq!(code(&w.cmd(&["act", &w.p("s.json"), "--out", &w.p("x.json")])), 2);
    assert_eq!(code(&w.cmd(&["act", &w.p("s.json"), "--lambda", "--rotate", "x:1", "--out", &w.p("x.json")])), 2);
}

#[test]
fn boosted_solution_verifies() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4", "s.json")), 0);
    assert_eq!(code(&w.cmd(&["act", &w.p("s.json"), "--boost", "z:0.5", "--out", &w.p("b.json")])), 0);
    let o = w.cmd(&["verify", &w.p("b.json"), "--out", &w.p("r.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = w.json("r.json");
    assert_eq!(r["residuals"]["pass"], true);
    assert_eq!(r["corner_applicable"], false);
}

#[test]
fn gauss_bonnet_command() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4", "s.json")), 0);
    let o = w.cmd(&["gauss-bonnet", &w.p("s.json"), "--out", &w.p("g.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = w.json("g.json");
    let four_pi2 = 4.0 * std::f64::consts::PI.powi(2);
    assert!((g["corner"].as_f64().unwrap() / four_pi2 - 1.0).abs() < 1e-3);
    assert!((g["expected"].as_f64().unwrap() - four_pi2).abs() < 1e-12);
}

#[test]
fn sample_dumps() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4", "s.json")), 0);
    let args = ["sample", "--grid", "100x100", "--slice", "alpha=0.3,theta=1"];
    let o = w.cmd(&[args[0], &w.p("s.json"), args[1], args[2], args[3], args[4], "--out", &w.p("a.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(w.path("a.csv")).unwrap();
    assert!(text.starts_with("rho,phi,alpha,theta,omega,Qtilde,Ttilde,Utilde\n"));
    let rows = csv_rows(&w.path("a.csv"));
    assert_eq!(rows.len(), 100 * 100);
    for r in &rows {
        assert_eq!(r.len(), 8);
        for v in r.iter().filter(|v| !v.is_empty()) {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
    let u: Vec<&Vec<String>> = rows.iter().filter(|r| !r[7].is_empty()).collect();
    assert_eq!(u.len(), 1);
    assert!((u[0][7].parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-6);

    // identical inputs give identical bytes
    let o = w.cmd(&[args[0], &w.p("s.json"), args[1], args[2], args[3], args[4], "--out", &w.p("b.csv")]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(w.path("a.csv")).unwrap(), fs::read(w.path("b.csv")).unwrap());

    // a boosted field has an exclusion band around the corner for T
    assert_eq!(code(&w.cmd(&["act", &w.p("s.json"), "--boost", "x:0.5", "--out", &w.p("bx.json")])), 0);
    let o = w.cmd(&["sample", &w.p("bx.json"), "--grid", "40x40", "--slice", "alpha=0,theta=0", "--out", &w.p("c.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&w.path("c.csv"));
    let near: Vec<&Vec<String>> = rows
        .iter()
        .filter(|r| r[0].parse::<f64>().unwrap() == 1.0)
        .filter(|r| (r[1].parse::<f64>().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 0.04)
        .collect();
    assert!(!near.is_empty());
    assert!(near.iter().all(|r| r[6].is_empty()));

    let zero = r#"{"omega1_terms":0,"v1":[],"v2":[],"data":{"psi":"0","phiN":"0"},
        "tolerances":{"constraint":1e-8,"mode_cap":128,"tail":1e-10,"drop_below":1e-14}}"#;
    fs::write(w.path("z.json"), zero).unwrap();
    let o = w.cmd(&["sample", &w.p("z.json"), "--grid", "10x10", "--slice", "alpha=0,theta=0", "--out", &w.p("z.csv")]);
    assert_eq!(code(&o), 0);
    for r in csv_rows(&w.path("z.csv")) {
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
        if !r[5].is_empty() {
            assert_eq!(r[5].parse::<f64>().unwrap(), 0.0);
        }
    }

    for bad in ["alpha=1", "alpha=1;theta=2", "alpha=x,theta=0"] {
        let o = w.cmd(&["sample", &w.p("s.json"), "--slice", bad]);
        assert_eq!(code(&o), 2, "{bad}");
    }
    assert_eq!(code(&w.cmd(&["sample", &w.p("s.json"), "--grid", "1x10"])), 2);
}

#[test]
fn config_and_threads() {
    let w = Work::new();
    assert_eq!(code(&w.build("pi/4*cos(phi)", "-pi/4", "s.json")), 0);
    fs::write(w.path("bad.json"), r#"{"residual": {"delta": 0}}"#).unwrap();
    let o = run(&["--config", &w.p("bad.json"), "verify", &w.p("s.json")]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["--config", &w.p("nope.json"), "table1"])), 2);

    let o = bin().env("CORNERQ_THREADS", "zero").args(["table1", "--kmax", "1"]).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .env("CORNERQ_THREADS", "2")
        .args(["table1", "--kmax", "3", "--out", &w.p("t.json")])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);

    fs::write(w.path("paths.json"), format!(r#"{{"N_terms": 512, "output": {{"report": "{}"}}}}"#, w.p("auto.json")))
        .unwrap();
    let o = run(&["--config", &w.p("paths.json"), "verify", &w.p("s.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(w.json("auto.json")["pass"], true);
}
