//! Command-line front end: catalog | crit | estimate | flow | check | suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regmod::catalog;
use regmod::checks::EstimateBundle;
use regmod::cloud::sample_cloud;
use regmod::critical::enumerate_critical_set;
use regmod::error::{Error, Result};
use regmod::flow::integrate_flow;
use regmod::report::{self, Json};
use regmod::suite::{
    self, parse_suite_config, run_suite, BaseSelector, EntryConfig, SuiteConfig,
};

#[derive(Parser)]
#[command(
    name = "regmod",
    about = "Regularity-modulus verification lab for structured nonsmooth functions",
    version
)]
struct Cli {
    /// RNG seed; mandatory for sampling commands (no wall-clock default).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Concurrent instance pipelines for `suite`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output file (estimate/check/flow) or directory (suite).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    /// Relative tolerance on modulus inequalities.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in instance catalog.
    Catalog,
    /// Print the enumerated critical set of an instance as JSON.
    Crit { instance: String },
    /// Sample a cloud around a base point and estimate every modulus.
    Estimate {
        instance: String,
        /// Base point: comma-separated coordinates or `crit:k`.
        #[arg(long)]
        base: Option<String>,
        /// Radius schedule, strictly decreasing, e.g. `0.2,0.1,0.05`.
        #[arg(long)]
        radii: Option<String>,
        /// Samples per radius.
        #[arg(long, default_value_t = suite::DEFAULT_SAMPLES_PER_RADIUS)]
        n: usize,
        /// Also dump the per-sample records as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Integrate the convex subgradient flow and dump the trajectory CSV.
    Flow {
        instance: String,
        /// Start point, comma-separated.
        #[arg(long)]
        x0: String,
        /// Backward-Euler step.
        #[arg(long)]
        tau: f64,
        /// Time horizon T (steps = T/tau).
        #[arg(long = "T")]
        horizon: f64,
    },
    /// Run estimators plus the implication checks for one instance.
    Check {
        instance: String,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = suite::DEFAULT_SAMPLES_PER_RADIUS)]
        n: usize,
        /// Prox-regularity certificate override.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Run a whole suite and write one report per instance.
    Suite {
        /// Suite configuration file (JSON).
        #[arg(long, conflicts_with = "name")]
        config: Option<PathBuf>,
        /// Bundled suite name (`paper-examples`).
        #[arg(long, default_value = "paper-examples")]
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("regmod: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Catalog => {
            for inst in catalog::all() {
                println!(
                    "{:name_width$}  {:28}  p={:<3} {}  L={}",
                    inst.name,
                    inst.family.name(),
                    inst.dimension,
                    if inst.convex { "convex   " } else { "nonconvex" },
                    inst.smoothness_constant,
                    name_width = 16,
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Crit { instance } => {
            let inst = catalog::resolve(instance)?;
            let cs = enumerate_critical_set(&inst)?;
            let mut pieces = Vec::new();
            for piece in &cs.pieces {
                let mut j = Json::object();
                j.push(
                    "support",
                    Json::Array(piece.support.iter().map(|&i| Json::Int(i as i64)).collect()),
                );
                j.push("dimension", Json::Int(piece.dimension() as i64));
                j.push("origin", Json::floats(&piece.origin));
                j.push(
                    "basis",
                    Json::Array(piece.basis.iter().map(|b| Json::floats(b)).collect()),
                );
                j.push(
                    "coeff_bounds",
                    Json::Array(
                        piece
                            .coeff_bounds
                            .iter()
                            .map(|&(lo, hi)| Json::floats(&[lo, hi]))
                            .collect(),
                    ),
                );
                j.push("partial_support", Json::Bool(piece.partial_support));
                pieces.push(j);
            }
            let mut root = Json::object();
            root.push("instance", Json::Str(inst.name.clone()));
            root.push("pieces", Json::Array(pieces));
            emit(&cli, &root.render(), "crit.json")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate { instance, base, radii, n, dump } => {
            let seed = need_seed(&cli)?;
            let inst = catalog::resolve(instance)?;
            let cs = enumerate_critical_set(&inst)?;
            let selector = parse_base(base)?;
            let base_point = selector.resolve(&inst, &cs)?;
            let schedule = parse_radii(radii)?;
            let cloud = sample_cloud(&inst, &cs, &base_point, &schedule, *n, seed)?;
            let estimates = EstimateBundle::compute(&cloud)?;

            let mut root = Json::object();
            root.push("instance", Json::Str(inst.name.clone()));
            root.push("base", Json::floats(&base_point));
            root.push("seed", Json::Int(seed as i64));
            root.push("radii", Json::floats(&schedule));
            root.push("samples_per_radius", Json::Int(*n as i64));
            root.push("base_value", Json::Float(cloud.base_value));
            let mut est = Json::object();
            est.push(
                "kl",
                estimates.kl.as_ref().map_or(Json::Null, report::modulus_json),
            );
            est.push("subregularity", report::modulus_json(&estimates.subregularity));
            est.push(
                "quadratic_growth",
                report::modulus_json(&estimates.quadratic_growth),
            );
            est.push(
                "luo_tseng",
                estimates.luo_tseng.as_ref().map_or(Json::Null, report::modulus_json),
            );
            root.push("estimates", est);
            emit(&cli, &root.render(), "estimate.json")?;
            if let Some(path) = dump {
                write_file(path, &report::samples_csv(&cloud), cli.force)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Flow { instance, x0, tau, horizon } => {
            let inst = catalog::resolve(instance)?;
            let start = parse_vector(x0)?;
            let traj = integrate_flow(&inst, &start, *tau, *horizon)?;
            emit(&cli, &report::trajectory_csv(&traj), "traj.csv")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { instance, base, radii, n, rho } => {
            let seed = need_seed(&cli)?;
            let mut entry = EntryConfig::new(instance);
            entry.base = parse_base(base)?;
            entry.radii = parse_radii(radii)?;
            entry.samples_per_radius = *n;
            entry.rho = *rho;
            entry.seed = Some(seed);
            let tol = cli.tol.unwrap_or(regmod::checks::DEFAULT_CHECK_TOL);
            let outcome = suite::run_entry(&entry, seed, tol)?;
            emit(&cli, &outcome.report_json, "report.json")?;
            eprintln!("{}", outcome.summary);
            Ok(if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Suite { config, name } => {
            let suite_config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let mut c = parse_suite_config(&text, cli.seed)?;
                    c.jobs = c.jobs.max(cli.jobs);
                    if let Some(t) = cli.tol {
                        c.tol = t;
                    }
                    c
                }
                None => {
                    let seed = need_seed(&cli)?;
                    let mut c = bundled_suite(name, seed)?;
                    c.jobs = cli.jobs;
                    if let Some(t) = cli.tol {
                        c.tol = t;
                    }
                    c
                }
            };
            let out_dir = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("regmod-out"));
            let outcome = run_suite(&suite_config, &out_dir, cli.force)?;
            let mut had_error = false;
            for result in &outcome.results {
                match result {
                    Ok(o) => println!("{}", o.summary),
                    Err(e) => {
                        had_error = true;
                        eprintln!("regmod: {e}");
                    }
                }
            }
            println!(
                "{} artifacts under {}",
                outcome.written.len(),
                out_dir.display()
            );
            Ok(if had_error {
                ExitCode::from(1)
            } else if outcome.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn bundled_suite(name: &str, seed: u64) -> Result<SuiteConfig> {
    match name {
        "paper-examples" => Ok(suite::paper_examples(seed)),
        other => Err(Error::config(
            "name",
            format!("unknown bundled suite `{other}` (available: paper-examples)"),
        )),
    }
}

fn need_seed(cli: &Cli) -> Result<u64> {
    cli.seed
        .ok_or_else(|| Error::config("seed", "seed required"))
}

fn parse_base(base: &Option<String>) -> Result<BaseSelector> {
    match base {
        None => Ok(BaseSelector::Default),
        Some(text) => BaseSelector::parse(text),
    }
}

fn parse_radii(radii: &Option<String>) -> Result<Vec<f64>> {
    match radii {
        None => Ok(suite::DEFAULT_RADII.to_vec()),
        Some(text) => {
            let parsed: std::result::Result<Vec<f64>, _> =
                text.split(',').map(|t| t.trim().parse::<f64>()).collect();
            parsed.map_err(|_| Error::config("radii", "expected comma-separated numbers"))
        }
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let parsed: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    parsed.map_err(|_| Error::config("x0", "expected comma-separated numbers"))
}

/// Print to stdout, or write to `--out` when given.
fn emit(cli: &Cli, content: &str, _default_name: &str) -> Result<()> {
    match &cli.out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(path) => write_file(path, content, cli.force),
    }
}

fn write_file(path: &Path, content: &str, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}
