use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wdrcc::experiments::{self, ExperimentConfig};
use wdrcc::methods::{self, Method, MethodOptions};
use wdrcc::model::parse_problem;
use wdrcc::oracle::{
    check_chance_feasible, check_cvar_feasible_individual, check_cvar_feasible_joint, worst_case_probability,
};
use wdrcc::solve::{write_lp, write_mps};
use wdrcc::{ChanceProgram, Error, Result, Safety, SolveOptions};

#[derive(Parser)]
#[command(name = "wdrcc", version, about = "Chance constrained programs over Wasserstein balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem document and print the result as JSON.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Comma-separated kappa coefficients (method `kappa`).
        #[arg(long, value_delimiter = ',')]
        kappa: Option<Vec<f64>>,
        /// Comma-separated joint CVaR weights.
        #[arg(long, value_delimiter = ',')]
        w: Option<Vec<f64>>,
        /// Comma-separated Bonferroni risk split.
        #[arg(long, value_delimiter = ',')]
        risks: Option<Vec<f64>>,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        big_m: Option<f64>,
        /// Solve the strict variants with this gap if the safety normal vanishes.
        #[arg(long)]
        degenerate_gap: Option<f64>,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case probability of the unsafe set at a decision.
    Quantify {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Test a decision against the ambiguous chance constraint.
    Check {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, value_enum, default_value_t = TestArg::Exact)]
        test: TestArg,
        #[arg(long, value_delimiter = ',')]
        w: Option<Vec<f64>>,
    },
    /// Write the model a method would solve in MPS or LP format.
    Export {
        problem: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
    },
    /// Run a seeded study and write its CSV into a directory.
    Experiment {
        #[arg(value_enum)]
        which: ExperimentArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        time_limit: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Kappa,
    Cvar,
    Bonferroni,
    Classical,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Kappa => Method::Kappa,
            MethodArg::Cvar => Method::Cvar,
            MethodArg::Bonferroni => Method::Bonferroni,
            MethodArg::Classical => Method::Classical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Exact,
    Cvar,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Mps,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Portfolio,
    Transport,
    Ex1,
    Ex2,
    Crossval,
}

fn load(path: &Path) -> Result<ChanceProgram> {
    parse_problem(&fs::read_to_string(path)?)
}

fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { problem, method, kappa, w, risks, time_limit, big_m, degenerate_gap, out } => {
            let cp = load(&problem)?;
            let opts = MethodOptions {
                solve: SolveOptions { time_limit, ..SolveOptions::default() },
                kappa,
                weights: w,
                risks,
                big_m,
                degenerate_gap,
                ..Default::default()
            };
            let sol = methods::solve(&cp, method.into(), &opts)?;
            emit(&serde_json::to_value(&sol)?, out.as_deref())
        }
        Command::Quantify { problem, x } => {
            let cp = load(&problem)?;
            check_dim(&cp, &x)?;
            let hs = cp.safety.unsafe_halfspaces(&x)?;
            let (p, dist) = worst_case_probability(&cp.ball.center, &hs, cp.ball.radius, cp.ball.norm)?;
            emit(&json!({ "probability": p, "distribution": dist }), None)
        }
        Command::Check { problem, x, test, w } => {
            let cp = load(&problem)?;
            check_dim(&cp, &x)?;
            let (ts, theta, eps, norm) = (&cp.ball.center, cp.ball.radius, cp.epsilon, cp.ball.norm);
            let c = match (test, &cp.safety) {
                (TestArg::Exact, s) => check_chance_feasible(ts, &s.unsafe_halfspaces(&x)?, theta, eps, norm)?,
                (TestArg::Cvar, Safety::Individual(s)) => check_cvar_feasible_individual(ts, s, &x, theta, eps, norm)?,
                (TestArg::Cvar, Safety::JointRhs(j)) => {
                    check_cvar_feasible_joint(ts, j, &x, theta, eps, norm, w.as_deref())?
                }
            };
            emit(&serde_json::to_value(c)?, None)
        }
        Command::Export { problem, format, out, method } => {
            let cp = load(&problem)?;
            let built = methods::build(&cp, method.into(), &MethodOptions::default())?;
            let text = match format {
                FormatArg::Mps => write_mps(&built.model),
                FormatArg::Lp => write_lp(&built.model),
            };
            fs::write(out, text)?;
            Ok(())
        }
        Command::Experiment { which, seed, out, instances, samples, time_limit } => {
            fs::create_dir_all(&out)?;
            let tune = |mut cfg: ExperimentConfig| {
                cfg.instances = instances.unwrap_or(cfg.instances);
                cfg.samples = samples.unwrap_or(cfg.samples);
                cfg.time_limit = time_limit;
                cfg
            };
            match which {
                ExperimentArg::Portfolio => {
                    let rows = experiments::run_portfolio(&tune(ExperimentConfig::portfolio_desk(seed)))?;
                    experiments::write_csv(&out.join("portfolio.csv"), &rows)
                }
                ExperimentArg::Transport => {
                    let rows = experiments::run_transport(&tune(ExperimentConfig::transport_desk(seed)))?;
                    experiments::write_csv(&out.join("transport.csv"), &rows)
                }
                ExperimentArg::Crossval => {
                    let rows = experiments::run_crossval(&tune(ExperimentConfig::transport_desk(seed)))?;
                    experiments::write_csv(&out.join("crossval.csv"), &rows)
                }
                ExperimentArg::Ex1 => {
                    let r = experiments::run_incomparability_ex1(0.09, 0.1, 0.5, 0.8, samples.unwrap_or(2000), seed)?;
                    experiments::write_csv(&out.join("ex1.csv"), &[r])
                }
                ExperimentArg::Ex2 => {
                    let r = experiments::run_incomparability_ex2(0.055, 0.1, 0.6, samples.unwrap_or(2000), seed)?;
                    experiments::write_csv(&out.join("ex2.csv"), &[r])
                }
            }
        }
    }
}

fn check_dim(cp: &ChanceProgram, x: &[f64]) -> Result<()> {
    if x.len() != cp.dim_x() {
        return Err(Error::Dimension(format!("--x has {} entries, the problem has L = {}", x.len(), cp.dim_x())));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
