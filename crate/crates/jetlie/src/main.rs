//! Thin command-line front end over the library's verification suites.

use clap::{Args, Parser, Subcommand};
use jetlie::parse::parse;
use jetlie::report::{self, SuiteOptions, SUITES};
use std::io::Read;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "jetlie",
    version,
    about = "Exact Lie and conditional symmetry analysis on jet spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Random seed for numeric cross-checks (JETLIE_SEED overrides the default).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random points per numeric cross-check.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Relative tolerance for numeric cross-checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Space dimension binding for the wave-side projective operator.
    #[arg(long = "n-wave", default_value_t = 3)]
    n_wave: i64,
    /// Space dimension binding for the reduced-side tensors.
    #[arg(long = "n-schrodinger", default_value_t = 2)]
    n_schrodinger: i64,
    /// Output format.
    #[arg(long, value_parser = ["human", "structured"], default_value = "human")]
    format: String,
}

impl CommonOpts {
    fn suite_options(&self) -> SuiteOptions {
        let env_seed = std::env::var("JETLIE_SEED")
            .ok()
            .and_then(|s| s.parse().ok());
        SuiteOptions {
            seed: self.seed.or(env_seed).unwrap_or(42),
            trials: self.trials,
            tol: self.tol,
            n_wave: self.n_wave,
            n_schrodinger: self.n_schrodinger,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite.
    Suite {
        /// One of: theorem1, galilei-basis, extended-basis, poincare-basis,
        /// dictionary, conditional-invariants, independence, all.
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Check one expression against a catalog operator.
    Check {
        /// Operator name, e.g. P0, J12, G1, D, A, A1.
        operator: String,
        /// Expression text, `-` for stdin, or `@name` for a catalog entry.
        expr: String,
        /// Optional side condition (same syntax), solved for its leading
        /// derivative.
        #[arg(long)]
        condition: Option<String>,
        /// Prolongation order (defaults to the expression's jet order).
        #[arg(long)]
        order: Option<u32>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// List catalog entries and operators.
    Catalog {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn read_expr_text(raw: &str) -> Result<String, String> {
    if raw == "-" {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .map_err(|e| format!("reading stdin: {e}"))?;
        Ok(buffer)
    } else {
        Ok(raw.to_string())
    }
}

fn resolve_expr(raw: &str, opts: &SuiteOptions) -> Result<jetlie::Expr, String> {
    if let Some(name) = raw.strip_prefix('@') {
        return jetlie::catalog::entry_by_name(name, opts.n_schrodinger)
            .map(|e| e.expr)
            .ok_or_else(|| format!("unknown catalog entry '{name}'"));
    }
    let text = read_expr_text(raw)?;
    parse(text.trim()).map_err(|e| e.to_string())
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Suite { name, common } => {
            let opts = common.suite_options();
            let report = report::run_suite(&name, &opts).map_err(|e| e.to_string())?;
            if common.format == "structured" {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_human());
            }
            Ok(report.passed)
        }
        Command::Check {
            operator,
            expr,
            condition,
            order,
            common,
        } => {
            let opts = common.suite_options();
            let target = resolve_expr(&expr, &opts)?;
            let cond = condition
                .as_deref()
                .map(|c| resolve_expr(c, &opts))
                .transpose()?;
            let result = report::check_expression(&operator, &target, cond.as_ref(), order, &opts)
                .map_err(|e| e.to_string())?;
            if common.format == "structured" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&result).expect("report serializes")
                );
            } else {
                println!(
                    "{} on {}: {:?} (residual {})",
                    result.operator, result.subject, result.verdict, result.residual
                );
            }
            Ok(result.passed())
        }
        Command::Catalog { common } => {
            let opts = common.suite_options();
            println!("operators:");
            for f in jetlie::catalog::operators(opts.n_wave) {
                println!("  {}", f.name);
            }
            println!("entries:");
            for e in jetlie::catalog::entries(opts.n_schrodinger) {
                println!("  {}", e.name);
            }
            println!("suites: {}", SUITES.join(", "));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
