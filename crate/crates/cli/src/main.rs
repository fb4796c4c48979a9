use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirrec::experiment::figures::{FigureId, FigureOptions};
use dirrec::experiment::{DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use dirrec::{ConstraintBall, LossKind};
use dirrec_cli::commands::{cmd_figure, cmd_fit, cmd_sweep, FigureRequest, FitRequest};
use dirrec_cli::verify::{run_named, run_suite, Suite};
use dirrec_cli::{thread_cap, CliError, EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATION, THREADS_ENV};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  a verified property was violated
  2  I/O failure (unreadable input, unwritable output directory)
  3  invalid input (arguments, config, CSV)

Environment:
  DR_THREADS  maximum number of worker threads (default: all cores)";

#[derive(Debug, Parser)]
#[command(name = "dirrec", version, about = "Simulation harness for angle-based excess risk of linear surrogate classifiers", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regenerate the tables, panels and manifest of a simulation figure.
    #[command(after_help = EXIT_CODES)]
    Figure {
        /// fig4, fig5 or fig6.
        figure: FigureId,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the replicate count of every sweep.
        #[arg(long)]
        replicates: Option<usize>,
        /// Comma-separated training sizes, e.g. 100,1000,10000.
        #[arg(long, value_delimiter = ',')]
        train_sizes: Option<Vec<usize>>,
        #[arg(long)]
        eval_size: Option<usize>,
        #[arg(long)]
        baseline_size: Option<usize>,
    },
    /// Check properties on freshly drawn random instances.
    #[command(after_help = EXIT_CODES)]
    Verify {
        /// geometry, bounds, rotinv, solvers or all.
        #[arg(default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only the named property, e.g. bounds.bound_validity.
        #[arg(long)]
        property: Option<String>,
    },
    /// Fit a linear surrogate minimizer to a CSV data set and report its risks.
    #[command(after_help = EXIT_CODES)]
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// square or logistic.
        #[arg(long, value_parser = parse_loss)]
        loss: LossKind,
        /// Ball radius, or `inf` for the unconstrained fit.
        #[arg(long, default_value = "inf")]
        radius: String,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Run one sweep described by a key = value config file.
    #[command(after_help = EXIT_CODES)]
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    LossKind::parse(s).map_err(|e| e.to_string())
}

fn parse_ball(radius: &str) -> Result<ConstraintBall, CliError> {
    if radius.trim().eq_ignore_ascii_case("inf") {
        return Ok(ConstraintBall::unbounded());
    }
    let r: f64 = radius.trim().parse().map_err(|_| {
        CliError::Validation(format!("radius must be a number or `inf`, got `{radius}`"))
    })?;
    Ok(ConstraintBall::new(r)?)
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Figure {
            figure,
            out,
            seed,
            replicates,
            train_sizes,
            eval_size,
            baseline_size,
        } => {
            let req = FigureRequest {
                figure,
                out,
                options: FigureOptions {
                    base_seed: seed,
                    replicates,
                    train_sizes,
                    eval_size,
                    baseline_size,
                },
            };
            let manifest = cmd_figure(&req)?;
            for p in &manifest.output_paths {
                println!("{p}");
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            trials,
            seed,
            property,
        } => {
            if trials == 0 {
                return Err(CliError::Validation("--trials must be at least 1".into()));
            }
            let outcomes = match property {
                Some(name) => vec![run_named(&name, trials, seed)
                    .ok_or_else(|| CliError::Validation(format!("unknown property `{name}`")))?],
                None => run_suite(suite, trials, seed),
            };
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            println!("{} properties, {} failed", outcomes.len(), failed);
            Ok(if failed > 0 { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Fit {
            data,
            loss,
            radius,
            report,
            max_iters,
            tolerance,
        } => {
            let req = FitRequest {
                data,
                loss,
                ball: parse_ball(&radius)?,
                max_iters,
                tolerance,
            };
            print!("{}", cmd_fit(&req, report.as_deref())?);
            Ok(EXIT_OK)
        }
        Command::Sweep { config, out } => {
            let manifest = cmd_sweep(&config, &out)?;
            for p in &manifest.output_paths {
                println!("{p}");
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = thread_cap(std::env::var(THREADS_ENV).ok().as_deref())
        .and_then(|cap| {
            if let Some(n) = cap {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Validation(format!("{THREADS_ENV}: {e}")))?;
            }
            run(cli.command)
        })
        .unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        });
    ExitCode::from(code as u8)
}
