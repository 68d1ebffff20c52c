//! `myfd`: command-line access to the divergence, conjugate, transport and
//! Moreau-Yosida solvers, the Gaussian potential experiment and the
//! acceptance suite.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 input error, 3 solver failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use myfd::acceptance;
use myfd::conjugate::{conjugate, solve_gamma, SolverConfig};
use myfd::estimator::{estimate_divergence, gaussian_experiment, AscentConfig, AscentMethod, GaussianParams};
use myfd::measures::{exact_divergence, DiscreteMeasure, FiniteMetricSpace, MeasureFile};
use myfd::moreau_yosida::{check_optimality_structure, my_dual, my_primal, Alpha, MYConfig, MYParams};
use myfd::transport::w1_distance;
use myfd::{Catalog, Error, Generator};

#[derive(Parser)]
#[command(name = "myfd", version, about = "f-divergences, tight conjugates, W1 and Moreau-Yosida divergences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact divergence, variational estimate and their gap.
    Divergence(DivergenceArgs),
    /// Optimal shift, value and gradient of the tight conjugate.
    Conjugate(ConjugateArgs),
    /// Moreau-Yosida divergence by the primal and dual routes.
    My(MyArgs),
    /// Learned vs closed-form potential for two discretized Gaussians.
    Gaussian(GaussianArgs),
    /// Runs the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Gradient,
    Newton,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct Ascent {
    /// Ascent method; `newton` is the tuned default.
    #[arg(long, value_enum, default_value = "newton")]
    method: Method,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Newton tolerance of the inner shift solve.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Ascent {
    fn config(&self) -> AscentConfig {
        let mut cfg = match self.method {
            Method::Newton => AscentConfig::tuned(),
            Method::Gradient => AscentConfig {
                method: AscentMethod::Gradient,
                ..AscentConfig::default()
            },
        };
        if let Some(n) = self.iters {
            cfg.iterations = n;
        }
        if let Some(lr) = self.lr {
            cfg.learning_rate = lr;
        }
        if let Some(tol) = self.tol {
            cfg.conjugate.tol = tol;
        }
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Args)]
struct DivergenceArgs {
    #[arg(long)]
    phi: String,
    /// Measure file of the first argument.
    #[arg(long)]
    mu: PathBuf,
    /// Measure file of the reference measure.
    #[arg(long)]
    nu: PathBuf,
    #[command(flatten)]
    ascent: Ascent,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConjugateArgs {
    #[arg(long)]
    phi: String,
    /// Potential: comma-separated values or a file holding a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    /// Reference measure: a measure file or comma-separated weights.
    #[arg(long)]
    nu: String,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MyArgs {
    #[arg(long)]
    phi: String,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    /// Exponent, a positive number or `inf`.
    #[arg(long, default_value = "1")]
    alpha: String,
    #[arg(long)]
    lambda: Option<f64>,
    /// Radius of the `W1` ball; required for `alpha = inf`.
    #[arg(long)]
    beta: Option<f64>,
    /// Target duality gap of the barrier solvers.
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance of the optimality-structure report.
    #[arg(long, default_value_t = 1e-2)]
    structure_tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GaussianArgs {
    #[arg(long)]
    phi: String,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    mu1: f64,
    #[arg(long, default_value_t = 0.3)]
    sigma1: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    mu2: f64,
    #[arg(long, default_value_t = 0.6)]
    sigma2: f64,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    #[command(flatten)]
    ascent: Ascent,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run only criteria whose key contains this string (or whose id equals it).
    #[arg(long)]
    filter: Option<String>,
    /// Corrupt the conjugate table of this generator before running.
    #[arg(long)]
    perturb: Option<String>,
    #[command(flatten)]
    output: Output,
}

/// Failure categories mapped onto exit codes.
enum Failure {
    Input(String),
    Solver(String),
    Suite,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Divergence(a) => cmd_divergence(&a),
        Command::Conjugate(a) => cmd_conjugate(&a),
        Command::My(a) => cmd_my(&a),
        Command::Gaussian(a) => cmd_gaussian(&a),
        Command::Selftest(a) => cmd_selftest(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path) -> CliResult<(FiniteMetricSpace, DiscreteMeasure)> {
    Ok(MeasureFile::from_json(&read(path)?)?.into_parts()?)
}

/// Loads `μ` and `ν`, which must live on the same space.
fn load_pair(mu: &Path, nu: &Path) -> CliResult<(FiniteMetricSpace, DiscreteMeasure, DiscreteMeasure)> {
    let (space, mu) = load_measure(mu)?;
    let (other, nu) = load_measure(nu)?;
    if !space.approx_eq(&other, 1e-12) {
        return Err(Failure::Input("mu and nu are defined on different spaces".into()));
    }
    Ok((space, mu, nu))
}

fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("invalid number `{}`", s.trim())))
        })
        .collect()
}

/// A file holding a JSON array, or a comma-separated list.
fn load_vector(arg: &str) -> CliResult<Vec<f64>> {
    let path = Path::new(arg);
    if path.is_file() {
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{arg}: {e}")))
    } else {
        parse_list(arg)
    }
}

/// A measure file, or a comma-separated list of weights.
fn load_weights(arg: &str) -> CliResult<Vec<f64>> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(load_measure(path)?.1.into_weights())
    } else {
        Ok(DiscreteMeasure::probability(parse_list(arg)?)?.into_weights())
    }
}

fn emit(output: &Output, json: &impl Serialize, csv: impl FnOnce() -> String) -> CliResult<()> {
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).expect("results serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn cmd_divergence(a: &DivergenceArgs) -> CliResult<()> {
    let catalog = Catalog::standard();
    let spec = catalog.by_name(&a.phi)?;
    let (_, mu, nu) = load_pair(&a.mu, &a.nu)?;
    let exact = exact_divergence(&spec, &mu, &nu)?;
    let est = estimate_divergence(&spec, mu.weights(), nu.weights(), &a.ascent.config())?;
    let gap = exact - est.estimate;
    let out = json!({
        "generator": spec.name(),
        "exact": exact,
        "estimate": est.estimate,
        "gap": gap,
        "iterations": est.iterations,
        "potential": est.f,
    });
    emit(&a.output, &out, || {
        format!("generator,exact,estimate,gap,iterations\n{},{exact},{},{gap},{}\n", spec.name(), est.estimate, est.iterations)
    })
}

fn cmd_conjugate(a: &ConjugateArgs) -> CliResult<()> {
    let catalog = Catalog::standard();
    let spec = catalog.by_name(&a.phi)?;
    let f = load_vector(&a.f)?;
    let nu = load_weights(&a.nu)?;
    let mut cfg = SolverConfig::default();
    if let Some(tol) = a.tol {
        cfg.tol = tol;
    }
    if let Some(n) = a.iters {
        cfg.max_iter = n;
    }
    let c = conjugate(&spec, &f, &nu, &cfg)?;
    // Where a closed form exists, report the Newton shift next to it.
    let comparison = match spec.closed_form_gamma {
        Some(closed) if spec.newton_applicable => {
            let newton = solve_gamma(&spec, &f, &nu, &SolverConfig { use_closed_form: false, ..cfg })?;
            let closed = closed(&f, &nu);
            Some(json!({
                "closed_form": closed,
                "newton": newton.gamma,
                "diff": (closed - newton.gamma).abs(),
            }))
        }
        _ => None,
    };
    let out = json!({
        "generator": spec.name(),
        "gamma": c.gamma.gamma,
        "value": c.value,
        "gradient": c.gradient,
        "gamma_gradient": c.gamma.grad,
        "solver": c.gamma.method.tag(),
        "converged": c.gamma.converged,
        "iterations": c.gamma.iterations,
        "residual": c.gamma.residual,
        "at_bound": c.gamma.at_bound,
        "gamma_comparison": comparison,
    });
    emit(&a.output, &out, || {
        let mut s = String::from("index,f,nu,gradient,gamma_gradient\n");
        for i in 0..f.len() {
            let _ = writeln!(s, "{i},{},{},{},{}", f[i], nu[i], c.gradient[i], c.gamma.grad[i]);
        }
        s
    })
}

fn cmd_my(a: &MyArgs) -> CliResult<()> {
    let catalog = Catalog::standard();
    let spec = catalog.by_name(&a.phi)?;
    let alpha: Alpha = a.alpha.parse()?;
    let params = MYParams::from_parts(a.lambda, alpha, a.beta)?;
    let (space, mu, nu) = load_pair(&a.mu, &a.nu)?;
    let mut cfg = MYConfig::default();
    if let Some(tol) = a.tol {
        cfg.tol = tol;
    }
    let primal = my_primal(&spec, &space, &mu, &nu, &params, &cfg)?;
    let dual = my_dual(&spec, &space, &mu, &nu, &params, &cfg)?;
    let w1 = w1_distance(&space, mu.weights(), nu.weights())?;
    let structure = if primal.xi_star.is_some() && dual.f_star.is_some() {
        Some(check_optimality_structure(&spec, &space, &mu, &nu, &params, &primal, &dual, a.structure_tol)?)
    } else {
        None
    };
    let gap = if primal.value == dual.value { 0.0 } else { (primal.value - dual.value).abs() };
    let out = json!({
        "generator": spec.name(),
        "params": params,
        "w1": w1,
        "primal": primal,
        "dual": dual,
        "gap": gap,
        "structure": structure,
    });
    emit(&a.output, &out, || {
        let mut s = String::from("route,value,converged,iterations,method,point\n");
        let _ = writeln!(
            s,
            "primal,{},{},{},{},{}",
            primal.value,
            primal.converged,
            primal.iterations,
            primal.method,
            join(primal.xi_star.as_deref().unwrap_or_default())
        );
        let _ = writeln!(
            s,
            "dual,{},{},{},{},{}",
            dual.value,
            dual.converged,
            dual.iterations,
            dual.method,
            join(dual.f_star.as_deref().unwrap_or_default())
        );
        s
    })
}

fn cmd_gaussian(a: &GaussianArgs) -> CliResult<()> {
    let spec = Catalog::standard().by_name(&a.phi)?;
    let params = GaussianParams::new(a.mu1, a.sigma1, a.mu2, a.sigma2, a.grid_n)?;
    let report = gaussian_experiment(&spec, &params, &a.ascent.config())?;
    emit(&a.output, &report, || report.to_csv())
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<()> {
    let mut catalog = Catalog::standard();
    if let Some(name) = &a.perturb {
        let generator: Generator = name.parse()?;
        catalog.perturb(generator);
    }
    let report = acceptance::run(&catalog, a.filter.as_deref())?;
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    emit(&a.output, &report, || {
        let mut s = String::from("id,key,pass,checks,worst\n");
        for c in &report.criteria {
            let _ = writeln!(s, "{},{},{},{},{}", c.id, c.key, c.pass, c.checks, c.worst);
        }
        s
    })?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Suite)
    }
}
