use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lasso_screen::bench::{generate_rand, run_experiment, write_metrics, ExperimentConfig};
use lasso_screen::io::{read_dictionary, read_vector, write_dictionary, write_flags, write_vector, write_weights, BlockFeatureReader};
use lasso_screen::{
    dass_solve, screen, solve_lasso, solve_screened, BoundSource, DassConfig, Dictionary64, FeatureAccess,
    Instance64, ProblemKind, Result, ScreenError, SolverConfig, TestKind, TestSpec,
};

#[derive(Parser)]
#[command(name = "lasso-screen", version, about = "Safe screening for lasso problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lasso,
    Nonneg,
}

impl From<Kind> for ProblemKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Lasso => ProblemKind::Lasso,
            Kind::Nonneg => ProblemKind::NonNegLasso,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Test {
    St,
    Dt,
    Tht,
    Irdt,
    Strong,
    Ssr,
    Sis,
}

#[derive(clap::Args)]
struct ProblemArgs {
    /// Dictionary file (binary or CSV, one column per feature)
    #[arg(long)]
    dict: PathBuf,
    /// Target vector file
    #[arg(long)]
    y: PathBuf,
    /// λ/λ_max, positive; ratios of 1 or more give the zero solution
    #[arg(long)]
    lambda_ratio: f64,
    #[arg(long, value_enum, default_value = "lasso")]
    kind: Kind,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a RAND dictionary (uniform entries, unit-norm columns)
    GenRand {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; `.csv` selects CSV, anything else the binary format
        #[arg(long)]
        out: PathBuf,
        /// Also write this many targets, one per column
        #[arg(long, default_value_t = 0)]
        targets: usize,
        #[arg(long, requires = "targets")]
        targets_out: Option<PathBuf>,
    },
    /// Screen one instance and write the rejection flags as CSV
    Screen {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum)]
        test: Test,
        /// Dual solution θ₀ of the same target at a larger λ₀
        #[arg(long, requires = "lambda0")]
        dual_solution: Option<PathBuf>,
        #[arg(long)]
        lambda0: Option<f64>,
        /// Duality gap of the dual solution; 0 treats it as exact
        #[arg(long, default_value_t = 0.0)]
        gap: f64,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        /// SIS keeps floor(gamma · n) features
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Flags file (standard output when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance, optionally screening first
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum)]
        screen: Option<Test>,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
        /// Weights CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dual point, for use with `screen --dual-solution`
        #[arg(long)]
        dual_out: Option<PathBuf>,
    },
    /// Solve by data-adaptive sequential screening
    Dass {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Target dome diameter
        #[arg(long = "R")]
        radius: f64,
        /// Stream features from the binary dictionary in blocks of this many
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-step trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a benchmark described by a key = value config file
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn test_kind(t: Test, iterations: usize, gamma: f64) -> TestKind {
    match t {
        Test::St => TestKind::Sphere,
        Test::Dt => TestKind::Dome,
        Test::Tht => TestKind::Tht,
        Test::Irdt => TestKind::Irdt { iterations },
        Test::Strong => TestKind::StrongRule,
        Test::Ssr => TestKind::StrongSequentialRule,
        Test::Sis => TestKind::Sis { gamma },
    }
}

fn load(problem: &ProblemArgs) -> Result<(Dictionary64, Instance64)> {
    let dict: Dictionary64 = read_dictionary(&problem.dict)?;
    let y = read_vector(&problem.y)?;
    let inst = Instance64::with_ratio(&dict, y, problem.lambda_ratio, problem.kind.into())?;
    Ok((dict, inst))
}

fn print_summary(name: &str, objective: f64, gap: f64, lambda: f64, rejected: usize, p: usize) {
    println!("method={name}");
    println!("lambda={lambda:.12e}");
    println!("objective={objective:.12e}");
    println!("gap={gap:.3e}");
    println!("rejected={rejected}/{p}");
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenRand {
            p,
            n,
            seed,
            out,
            targets,
            targets_out,
        } => {
            let (dict, mut gen) = generate_rand::<f64>(p, n, seed)?;
            write_dictionary(&out, &dict, !is_csv(&out))?;
            if targets > 0 {
                let path = targets_out.ok_or_else(|| {
                    ScreenError::InvalidParameter("--targets needs --targets-out".into())
                })?;
                let cols: Vec<Vec<f64>> = (0..targets).map(|_| gen.next_target()).collect();
                let t = Dictionary64::from_columns(&cols)?;
                write_dictionary(&path, &t, !is_csv(&path))?;
            }
        }
        Command::Screen {
            problem,
            test,
            dual_solution,
            lambda0,
            gap,
            iterations,
            gamma,
            out,
        } => {
            let (dict, inst) = load(&problem)?;
            let mut spec = TestSpec::new(test_kind(test, iterations, gamma));
            if let (Some(path), Some(lambda0)) = (dual_solution, lambda0) {
                spec = spec.with_source(BoundSource::DualSolution {
                    lambda0,
                    theta0: read_vector(&path)?,
                    gap,
                });
            }
            let report = screen(&dict, &inst, &spec)?;
            write_flags(output(out.as_deref())?, &report.flags)?;
            eprintln!(
                "{}: rejected {}/{} in {:.3e}s{}",
                spec.kind.name(),
                report.rejected_count(),
                report.flags.len(),
                report.screen_time.as_secs_f64(),
                if report.safe { "" } else { " (unsafe test)" }
            );
        }
        Command::Solve {
            problem,
            screen: test,
            gap_tol,
            out,
            dual_out,
        } => {
            let (dict, inst) = load(&problem)?;
            let cfg = SolverConfig::default().with_gap_tol(gap_tol);
            let (sol, rejected, name) = match test {
                Some(t) => {
                    let spec = TestSpec::new(test_kind(t, 5, 0.5));
                    let report = screen(&dict, &inst, &spec)?;
                    let (sol, _) = solve_screened(&dict, &inst, &report, &cfg)?;
                    (sol, report.rejected_count(), spec.kind.name())
                }
                None => (solve_lasso(&dict, &inst, &cfg)?, 0, "full"),
            };
            print_summary(name, sol.primal, sol.gap, inst.lambda(), rejected, dict.count());
            if let Some(path) = out {
                write_weights(BufWriter::new(File::create(path)?), &sol.w)?;
            }
            if let Some(path) = dual_out {
                write_vector(&path, &sol.theta, !is_csv(&path))?;
            }
        }
        Command::Dass {
            problem,
            radius,
            block_size,
            gap_tol,
            out,
            trace,
        } => {
            let y: Vec<f64> = read_vector(&problem.y)?;
            let kind: ProblemKind = problem.kind.into();
            let cfg = DassConfig {
                solver: SolverConfig::default().with_gap_tol(gap_tol),
                ..DassConfig::new(radius)
            };
            let (sol, tr, lambda, p) = match block_size {
                Some(bs) => {
                    let reader = BlockFeatureReader::<f64>::open(&problem.dict, bs)?;
                    let inst = Instance64::with_ratio(&reader, y.clone(), problem.lambda_ratio, kind)?;
                    let (s, t) = dass_solve(&reader, &y, kind, inst.lambda(), &cfg)?;
                    (s, t, inst.lambda(), reader.count())
                }
                None => {
                    let dict: Dictionary64 = read_dictionary(&problem.dict)?;
                    let inst = Instance64::with_ratio(&dict, y.clone(), problem.lambda_ratio, kind)?;
                    let (s, t) = dass_solve(&dict, &y, kind, inst.lambda(), &cfg)?;
                    (s, t, inst.lambda(), dict.count())
                }
            };
            let surviving = tr.steps.last().map_or(0, |s| s.surviving);
            print_summary("DASS", sol.primal, sol.gap, lambda, p - surviving.min(p), p);
            println!("steps={}", tr.len());
            if let Some(path) = out {
                write_weights(BufWriter::new(File::create(path)?), &sol.w)?;
            }
            if let Some(path) = trace {
                tr.write_csv(BufWriter::new(File::create(path)?))?;
            }
        }
        Command::Bench { config, output: out } => {
            let text = std::fs::read_to_string(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let mut cfg = ExperimentConfig::parse(&text, base)?;
            if out.is_some() {
                cfg.output = out;
            }
            let rows = run_experiment(&cfg)?;
            if cfg.output.is_none() {
                write_metrics(io::stdout().lock(), &rows)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("LS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: LS_THREADS ignored: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
