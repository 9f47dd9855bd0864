//! `gnlab`: one subcommand per lab module, JSON or CSV out.
//!
//! Exit codes: 0 success, 2 bad input or violated precondition, 3 numerical
//! failure.

mod cache;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use gnlab::harness::{growth_experiment, regression_suite, RatioRow, SuiteOptions, SuiteRow};
use gnlab::norms::{norm, NormFamily, NormSpec};
use gnlab::param_checker::{check_theorem, parse_rational, rat_to_f64, GNProblem};
use gnlab::spectral::io::{load_field, save_field};
use gnlab::spectral::{Field, Grid};
use gnlab::testfuncs::LacunaryFamily;
use gnlab::variational::{
    estimate_cstar, gaussian_start, minimize, on_critical_line, regime_classify, CStarOptions, EnergyParams,
    MinimizeOptions, MultiField, NonlinearityG, RegimeQuery, RegimeReport,
};
use gnlab::GnError;

use output::{canonical_json, emit};

#[derive(Parser)]
#[command(name = "gnlab", version, about = "Fractional Gagliardo-Nirenberg numerical lab")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a condition checker on a problem file.
    Check {
        /// 1.2, 1.3, 1.4, 1.5, 4.1, 4.2 or auto (by scale).
        #[arg(long, default_value = "auto")]
        theorem: String,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Norm of a GNF1 field.
    Norm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        family: NormFamily,
        #[arg(long, default_value = "0")]
        s: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "inf")]
        q: String,
        #[arg(long, default_value_t = 0.0)]
        m2: f64,
        /// Shell window "lo:hi".
        #[arg(long)]
        shells: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a lacunary family and write it as GNF1.
    Family {
        /// JSON family description.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Ratio experiments.
    Harness {
        /// Built-in suite to run instead of a single experiment.
        #[arg(long, value_parser = ["regression"])]
        suite: Option<String>,
        #[arg(long, required_unless_present = "suite")]
        problem: Option<PathBuf>,
        /// JSON experiment description: family, indices, points, length.
        #[arg(long, required_unless_present = "suite")]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Constrained energy minimization.
    Minimize {
        #[arg(long)]
        params: PathBuf,
        /// Receives u<i>.gnf1 and result.json.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Lower estimate of the sharp Hartree-type constant C*(n, beta).
    Cstar {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long, default_value_t = 16.0)]
        length: f64,
        /// JSON estimator options.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Where to write the maximizer.
        #[arg(long)]
        maximizer: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Existence regime of the minimization problem.
    Regimes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long)]
        c: f64,
        /// A number, or auto to estimate (and cache) it when needed.
        #[arg(long, default_value = "auto")]
        cstar: String,
        /// sum-squares, sum-powers:MU or product-powers:A1,A2,...
        #[arg(long, default_value = "sum-squares")]
        g: String,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, default_value_t = 32)]
        cstar_points: usize,
        #[arg(long, default_value_t = 16.0)]
        cstar_length: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(GnError),
}

impl From<GnError> for Failure {
    fn from(e: GnError) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(GnError::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(GnError::Json(e))
    }
}

type Res<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Decimal, fraction or inf.
fn parse_number(s: &str) -> Res<f64> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t if t.contains('/') => Ok(rat_to_f64(&parse_rational(t)?)),
        t => t.parse().or_else(|_| usage(format!("not a number: {t}"))),
    }
}

fn parse_shells(s: &str) -> Res<(i32, i32)> {
    let Some((a, b)) = s.split_once(':') else {
        return usage(format!("shell window '{s}' is not lo:hi"));
    };
    match (a.trim().parse(), b.trim().parse()) {
        (Ok(lo), Ok(hi)) => Ok((lo, hi)),
        _ => usage(format!("shell window '{s}' is not lo:hi")),
    }
}

fn parse_g(s: &str) -> Res<NonlinearityG> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "sum-squares" if arg.is_empty() => Ok(NonlinearityG::SumSquares),
        "sum-powers" => Ok(NonlinearityG::SumPowers(parse_number(arg)?)),
        "product-powers" => Ok(NonlinearityG::ProductPowers(arg.split(',').map(parse_number).collect::<Res<_>>()?)),
        _ => usage(format!("unknown nonlinearity '{s}'")),
    }
}

fn finite(x: f64, what: &str) -> Res<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Core(GnError::Numerical(format!("{what} is {x}"))))
    }
}

fn to_text<T: Serialize>(v: &T) -> Res<String> {
    Ok(canonical_json(v)?)
}

fn run_check(theorem: &str, problem: &Path, out: Option<&Path>) -> Res<()> {
    let text = std::fs::read_to_string(problem).map_err(|e| Failure::Usage(format!("{}: {e}", problem.display())))?;
    let pb = GNProblem::from_json_str(&text)?;
    let verdict = check_theorem(theorem, &pb)?;
    emit(&to_text(&verdict.to_json())?, out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_norm(field: &Path, family: NormFamily, s: &str, p: &str, q: &str, m2: f64, shells: Option<&str>, out: Option<&Path>) -> Res<()> {
    let mut spec = NormSpec::new(family, parse_number(s)?, parse_number(p)?, parse_number(q)?).with_m2(m2);
    if let Some(w) = shells {
        let (lo, hi) = parse_shells(w)?;
        spec = spec.with_shells(lo, hi);
    }
    let f = load_field(field)?;
    let r = norm(&f, &spec)?;
    finite(r.value, "norm")?;
    emit(&to_text(&r)?, out)?;
    Ok(())
}

fn run_family(params: &Path, points: usize, length: f64, out: &Path) -> Res<()> {
    let fam: LacunaryFamily = read_json(params)?;
    let grid = Grid::new(fam.n, points, length)?;
    let field = fam.build(&grid)?;
    save_field(&field, out)?;
    let summary = serde_json::json!({
        "family": fam,
        "grid": grid,
        "shells": [fam.j0, fam.index],
        "prediction": fam.prediction(),
        "output": out.display().to_string(),
    });
    emit(&to_text(&summary)?, None)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    family: LacunaryFamily,
    indices: Vec<i32>,
    points: usize,
    length: f64,
    #[serde(default)]
    shells: Option<(i32, i32)>,
}

fn run_harness(suite: Option<&str>, problem: Option<&Path>, params: Option<&Path>, format: Format, out: Option<&Path>) -> Res<()> {
    let text = if suite.is_some() {
        let rows = regression_suite(&SuiteOptions::default())?;
        match format {
            Format::Csv => csv(SuiteRow::csv_header(), rows.iter().map(SuiteRow::csv_line)),
            Format::Json => to_text(&rows)?,
        }
    } else {
        let (Some(problem), Some(params)) = (problem, params) else {
            return usage("need --problem and --params, or --suite");
        };
        let text = std::fs::read_to_string(problem).map_err(|e| Failure::Usage(format!("{}: {e}", problem.display())))?;
        let pb = GNProblem::from_json_str(&text)?;
        let cfg: ExperimentConfig = read_json(params)?;
        let grid = Grid::new(cfg.family.n, cfg.points, cfg.length)?;
        let exp = growth_experiment(&pb, &cfg.family, &cfg.indices, &grid, cfg.shells)?;
        finite(exp.fitted_slope, "fitted slope")?;
        match format {
            Format::Csv => csv(RatioRow::csv_header(), exp.rows.iter().map(RatioRow::csv_line)),
            Format::Json => {
                let mut v = exp.summary_json();
                v["rows"] = serde_json::to_value(&exp.rows)?;
                to_text(&v)?
            }
        }
    };
    emit(&text, out)?;
    Ok(())
}

fn csv(header: &str, lines: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    n: usize,
    points: usize,
    length: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum Start {
    Gaussian { width: f64 },
    Fields { paths: Vec<PathBuf> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MinimizeConfig {
    #[serde(default)]
    grid: Option<GridConfig>,
    energy: EnergyParams,
    masses: Vec<f64>,
    start: Start,
    #[serde(default)]
    options: MinimizeOptions,
}

#[derive(Serialize)]
struct MinimizeSummary {
    final_energy: f64,
    energy_trace: Vec<f64>,
    multipliers: Vec<f64>,
    el_residual: f64,
    iterations: usize,
    converged: bool,
    rearrangements: usize,
    masses: Vec<f64>,
    fields: Vec<String>,
}

fn run_minimize(params: &Path, dir: &Path) -> Res<()> {
    let cfg: MinimizeConfig = read_json(params)?;
    let components: Vec<Field> = match &cfg.start {
        Start::Gaussian { width } => {
            let Some(g) = &cfg.grid else {
                return usage("a gaussian start needs a grid");
            };
            let grid = Grid::new(g.n, g.points, g.length)?;
            vec![gaussian_start(&grid, *width)?; cfg.masses.len()]
        }
        Start::Fields { paths } => {
            let fields = paths.iter().map(|p| load_field(p)).collect::<Result<Vec<_>, _>>()?;
            if let (Some(g), Some(f)) = (&cfg.grid, fields.first()) {
                if (g.n, g.points, g.length) != (f.grid.n, f.grid.points, f.grid.length) {
                    return usage("start fields do not live on the configured grid");
                }
            }
            fields
        }
    };
    let u0 = MultiField::new(components, cfg.masses.clone())?;
    let r = minimize(&u0, &cfg.energy, &cfg.options)?;
    finite(r.final_energy(), "final energy")?;
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (i, c) in r.u_final.components.iter().enumerate() {
        let p = dir.join(format!("u{i}.gnf1"));
        save_field(c, &p)?;
        names.push(p.display().to_string());
    }
    let summary = MinimizeSummary {
        final_energy: r.final_energy(),
        masses: r.u_final.current_masses(),
        energy_trace: r.energy_trace,
        multipliers: r.multipliers,
        el_residual: r.el_residual,
        iterations: r.iterations,
        converged: r.converged,
        rearrangements: r.rearrangements,
        fields: names,
    };
    let text = to_text(&summary)?;
    output::write_atomic(&dir.join("result.json"), text.as_bytes())?;
    emit(&text, None)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_cstar(n: usize, beta: f64, points: usize, length: f64, params: Option<&Path>, maximizer: Option<&Path>, out: Option<&Path>) -> Res<()> {
    let opts: CStarOptions = match params {
        Some(p) => read_json(p)?,
        None => CStarOptions::default(),
    };
    let grid = Grid::new(n, points, length)?;
    let est = estimate_cstar(&grid, beta, &opts)?;
    finite(est.value, "C* estimate")?;
    if let Some(p) = maximizer {
        save_field(&est.maximizer, p)?;
    }
    let v = serde_json::json!({
        "n": n,
        "beta": beta,
        "grid": grid,
        "value": est.value,
        "start_values": est.start_values,
        "critical_mass": 1.0 / (2.0 * est.value),
        "options": opts,
    });
    emit(&to_text(&v)?, out)?;
    Ok(())
}

#[derive(Serialize)]
struct RegimeOutput {
    #[serde(flatten)]
    report: RegimeReport,
    cstar: Option<f64>,
    cstar_source: Option<&'static str>,
}

struct RegimeArgs<'a> {
    n: usize,
    beta: f64,
    s: f64,
    m2: f64,
    c: f64,
    cstar: &'a str,
    g: &'a str,
    components: usize,
    cstar_points: usize,
    cstar_length: f64,
}

fn run_regimes(a: &RegimeArgs, out: Option<&Path>) -> Res<()> {
    let g = parse_g(a.g)?;
    let (cstar, source) = if !on_critical_line(a.n, a.beta, a.s) {
        if a.cstar != "auto" {
            parse_number(a.cstar)?;
        }
        (None, None)
    } else if a.cstar == "auto" {
        let grid = Grid::new(a.n, a.cstar_points, a.cstar_length)?;
        let (v, hit) = cache::cstar(&grid, a.beta)?;
        (Some(v), Some(if hit { "cache" } else { "estimated" }))
    } else {
        (Some(parse_number(a.cstar)?), Some("given"))
    };
    let q = RegimeQuery {
        n: a.n,
        beta: a.beta,
        s: a.s,
        m2: a.m2,
        c: a.c,
        cstar: cstar.unwrap_or(f64::NAN),
        g,
        components: a.components,
    };
    let report = regime_classify(&q)?;
    emit(&to_text(&RegimeOutput { report, cstar, cstar_source: source })?, out)?;
    Ok(())
}

fn execute(cli: Cli) -> Res<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return usage("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Check { theorem, problem, output } => run_check(&theorem, &problem, output.as_deref()),
        Command::Norm { field, family, s, p, q, m2, shells, output } => {
            run_norm(&field, family, &s, &p, &q, m2, shells.as_deref(), output.as_deref())
        }
        Command::Family { params, points, length, output } => run_family(&params, points, length, &output),
        Command::Harness { suite, problem, params, format, output } => {
            run_harness(suite.as_deref(), problem.as_deref(), params.as_deref(), format, output.as_deref())
        }
        Command::Minimize { params, output_dir } => run_minimize(&params, &output_dir),
        Command::Cstar { n, beta, points, length, params, maximizer, output } => {
            run_cstar(n, beta, points, length, params.as_deref(), maximizer.as_deref(), output.as_deref())
        }
        Command::Regimes { n, beta, s, m2, c, cstar, g, components, cstar_points, cstar_length, output } => {
            let a = RegimeArgs { n, beta, s, m2, c, cstar: &cstar, g: &g, components, cstar_points, cstar_length };
            run_regimes(&a, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("gnlab: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("gnlab: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
