use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use cornerq::conformal::parse_axis;
use cornerq::verify::{curvatures, verify_field};
use cornerq::{
    build_solution, gauss_bonnet, verify_table1, BoundaryData, Config, ConfElement, Error, FdScheme, Solution,
    Table1Grid,
};

mod sample;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONSTRAINT: u8 = 3;

/// Conformal metrics on the half 4-ball with prescribed boundary curvatures.
#[derive(Parser, Debug)]
#[command(name = "cornerq", version, about)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the boundary-operator table of the biharmonic basis.
    Table1 {
        #[arg(long, default_value_t = 20)]
        kmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a solution from Neumann data on both faces.
    Build {
        /// Data on the round face, in the variable `phi`.
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        /// Data on the flat face, in the variable `r`.
        #[arg(long = "phi-n", allow_hyphen_values = true)]
        phi_n: String,
        /// Terms of the truncated particular solution.
        #[arg(long)]
        terms: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residuals, Gauss-Bonnet and corner checks of a solution file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-node residuals as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Append a conformal transformation to a solution file.
    Act(ActArgs),
    /// Gauss-Bonnet terms of a solution file.
    GaussBonnet {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the field and its curvatures on a (rho, phi) slice.
    Sample {
        file: PathBuf,
        /// Grid size as RxP.
        #[arg(long, default_value = "50x50")]
        grid: String,
        /// Slice direction as alpha=A,theta=T.
        #[arg(long, default_value = "alpha=0,theta=0")]
        slice: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("transform").required(true).args(["boost", "rotate", "lambda"])))]
struct ActArgs {
    file: PathBuf,
    /// Boost as axis:rapidity, for example z:0.5.
    #[arg(long, allow_hyphen_values = true)]
    boost: Option<String>,
    /// Rotation as axis:angle.
    #[arg(long, allow_hyphen_values = true)]
    rotate: Option<String>,
    /// The inversion swapping the two faces.
    #[arg(long)]
    lambda: bool,
    #[arg(long)]
    out: PathBuf,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(Error::Constraint { .. }) => EXIT_CONSTRAINT,
            _ => EXIT_USAGE,
        };
        Failure { code, err }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Config::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Config::default(),
    };
    let threads = config.resolved_threads()?;
    // a second global init (e.g. in tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    match cli.command {
        Command::Table1 { kmax, out } => table1(kmax, out.as_deref()),
        Command::Build { psi, phi_n, terms, out } => build(&config, &psi, &phi_n, terms, &out),
        Command::Verify { file, delta, out, csv } => verify(&config, &file, delta, out, csv),
        Command::Act(args) => act(&args),
        Command::GaussBonnet { file, out } => gauss_bonnet_cmd(&config, &file, out),
        Command::Sample { file, grid, slice, out } => sample_cmd(&config, &file, &grid, &slice, out),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn load_solution(path: &Path) -> anyhow::Result<Solution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Solution::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn status(pass: bool) -> u8 {
    if pass {
        0
    } else {
        EXIT_VERIFY
    }
}

fn table1(kmax: u32, out: Option<&Path>) -> CmdResult {
    let report = verify_table1(kmax, &Table1Grid::default(), &FdScheme::default())?;
    write_output(out, &to_json(&report)?)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "FAIL k={} {:?} {}: analytic {:e}, fd {:e}",
            c.k, c.family, c.operator, c.analytic_sup, c.fd_sup
        );
    }
    eprintln!("table1 k<={kmax}: {}", if report.pass { "pass" } else { "FAIL" });
    Ok(status(report.pass))
}

fn build(config: &Config, psi: &str, phi_n: &str, terms: Option<u32>, out: &Path) -> CmdResult {
    let data = BoundaryData::from_expressions(psi, phi_n)?;
    let measured = data.measure_constraints();
    println!("nu_M(psi)                = {:.16e}", measured.nu_m_psi);
    println!("nu_N(phi_N) - phi_N      = {:.16e}", measured.nu_n_phi_minus_phi);
    println!("expected                 = {:.16e}", std::f64::consts::FRAC_PI_4);
    let terms = terms.unwrap_or(config.n_terms);
    let sol = build_solution(&data, terms)?;
    if let Some(c) = &sol.checks {
        println!("tail(v1)                 = {:e}", c.tail_v1);
        println!("tail(v2)                 = {:e}", c.tail_v2);
        println!("sup |mu_M omega - psi|   = {:e}", c.mu_m_residual);
        println!("sup |mu_N omega - phi_N| = {:e}", c.mu_n_residual);
        println!("omega on the corner      = {:e}", c.sigma_value);
    }
    println!("modes: v1 {}, v2 {}", sol.v1.len(), sol.v2.len());
    fs::write(out, sol.to_json()?).with_context(|| format!("writing {}", out.display()))?;
    Ok(0)
}

fn verify(config: &Config, file: &Path, delta: Option<f64>, out: Option<PathBuf>, csv: Option<PathBuf>) -> CmdResult {
    let sol = load_solution(file)?;
    let mut rc = config.residual.clone();
    if let Some(d) = delta {
        if d.is_nan() || d <= 0.0 {
            return Err(anyhow!("--delta must be positive").into());
        }
        rc.delta = d;
    }
    let field = sol.field()?;
    let report = verify_field(&field, &rc, &config.gauss_bonnet, &config.checks)?;
    let out = out.or_else(|| config.output.report.clone());
    write_output(out.as_deref(), &to_json(&report)?)?;
    if let Some(path) = csv.or_else(|| config.output.csv.clone()) {
        fs::write(&path, report.residuals.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    for c in &report.residuals.conditions {
        eprintln!(
            "{:<4} sup {:.3e} (tol {:.1e}) {}",
            c.condition,
            c.sup,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    eprintln!("gauss-bonnet {}", if report.gauss_bonnet_pass { "pass" } else { "FAIL" });
    if report.corner_applicable {
        eprintln!("corner {}", if report.corner_pass { "pass" } else { "FAIL" });
    }
    Ok(status(report.pass))
}

fn parse_pair(spec: &str, what: &str) -> anyhow::Result<(usize, f64)> {
    let (axis, value) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("--{what} expects axis:value, got '{spec}'"))?;
    let axis = parse_axis(axis)?;
    let value: f64 = value.trim().parse().with_context(|| format!("bad number in --{what} '{spec}'"))?;
    if !value.is_finite() {
        return Err(anyhow!("--{what} value must be finite"));
    }
    Ok((axis, value))
}

/// Largest rapidity accepted by `act`; beyond it finite differences of the
/// transformed field lose too much accuracy.
const MAX_RAPIDITY: f64 = 2.0;

fn act(args: &ActArgs) -> CmdResult {
    let sol = load_solution(&args.file)?;
    let element = if let Some(spec) = &args.boost {
        let (axis, s) = parse_pair(spec, "boost")?;
        if s.abs() > MAX_RAPIDITY {
            return Err(anyhow!("rapidity {s} is outside [-{MAX_RAPIDITY}, {MAX_RAPIDITY}]").into());
        }
        ConfElement::boost(axis, s)?
    } else if let Some(spec) = &args.rotate {
        let (axis, a) = parse_pair(spec, "rotate")?;
        ConfElement::rotation(axis, a)?
    } else {
        ConfElement::lambda()
    };
    let mut next = sol;
    for t in element.to_specs() {
        next = next.with_transform(t);
    }
    fs::write(&args.out, next.to_json()?).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

fn gauss_bonnet_cmd(config: &Config, file: &Path, out: Option<PathBuf>) -> CmdResult {
    let sol = load_solution(file)?;
    let g = gauss_bonnet(&sol.field()?, &config.gauss_bonnet)?;
    write_output(out.as_deref(), &to_json(&g)?)?;
    let pass = g.closes(&config.checks);
    eprintln!("total {:.16e}, expected {:.16e}: {}", g.total, g.expected, if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

fn sample_cmd(config: &Config, file: &Path, grid: &str, slice: &str, out: Option<PathBuf>) -> CmdResult {
    let (nr, np) = sample::parse_grid(grid)?;
    let (alpha, theta) = sample::parse_slice(slice)?;
    let sol = load_solution(file)?;
    let field = sol.field()?;
    let curv = curvatures(&field, &config.residual.fd.with_band(config.residual.delta));
    let rows = sample::sample_slice(&field, &curv, nr, np, alpha, theta);
    let text = sample::to_csv(&rows);
    match out.or_else(|| config.output.csv.clone()) {
        Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}
