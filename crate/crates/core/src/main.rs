use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use hbcert::certificate::Certificate;
use hbcert::ode::{ApproxSolution, Provenance};
use hbcert::pipeline::{self, Flags, Settings};
use hbcert::problem::ProblemFile;
use hbcert::trigpoly::{parse_decimal, parse_rational, TrigPoly};
use hbcert::Error;

/// Harmonic balance approximations with existence certificates.
#[derive(Parser)]
#[command(name = "hbcert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the harmonic balance ladder and print each order.
    Solve(Opts),
    /// Solve, then simplify the coefficients by continued fractions.
    Rationalize(Opts),
    /// Certify an approximation (from --xbar, or solved and rationalized).
    Certify(Opts),
    /// Locate the periodic orbit by shooting and extract its harmonics.
    Shoot(Opts),
    /// Solve, rationalize and certify.
    All(Opts),
}

#[derive(Args)]
struct Opts {
    /// Problem file.
    problem: PathBuf,
    /// Highest harmonic balance order.
    #[arg(long)]
    order: Option<usize>,
    /// Accuracy budget ratio for rationalization (`p/q` or decimal).
    #[arg(long, value_parser = rational_arg)]
    budget: Option<BigRational>,
    /// RK4 steps per period (power of two, at least 64).
    #[arg(long)]
    steps: Option<usize>,
    /// Harmonics extracted from the shooting orbit.
    #[arg(long)]
    harmonics: Option<usize>,
    /// Pieces of the lower bound used for M.
    #[arg(long)]
    pieces: Option<usize>,
    /// Margin of the lower bound used for M (`p/q` or decimal).
    #[arg(long, value_parser = rational_arg)]
    margin: Option<BigRational>,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Approximation file to certify (term lines).
    #[arg(long)]
    xbar: Option<PathBuf>,
    /// Declared accuracy, at least the computed one (`p/q` or decimal).
    #[arg(long, value_parser = rational_arg)]
    stilde: Option<BigRational>,
    /// Output file: the certificate, or the approximation for solve/rationalize/shoot.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for the shooting trajectory.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

impl Opts {
    fn flags(&self) -> Flags {
        Flags {
            order: self.order,
            budget: self.budget.clone(),
            steps: self.steps,
            harmonics: self.harmonics,
            pieces: self.pieces,
            margin: self.margin.clone(),
            stilde: self.stilde.clone(),
            seed: self.seed,
        }
    }
}

fn rational_arg(s: &str) -> Result<BigRational, String> {
    parse_rational(s).or_else(|e| parse_decimal(s).ok_or(e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HB_LOG", "off")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error = {}", e.kind());
            eprintln!("message = {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Solve(o) => {
            let (problem, settings) = load(&o)?;
            let rungs = pipeline::solve_ladder(&problem, &settings)?;
            print!("{}", pipeline::format_ladder(&rungs));
            if let (Some(path), Some(top)) = (&o.out, rungs.last()) {
                std::fs::write(path, pipeline::format_terms(&top.solution.approx.xbar))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rationalize(o) => {
            let (problem, settings) = load(&o)?;
            let rungs = pipeline::solve_ladder(&problem, &settings)?;
            let r = pipeline::rationalize(&problem, &settings, &rungs)?;
            if let Some(top) = rungs.last() {
                println!("accuracy_input = {}", top.accuracy);
            }
            println!("accuracy = {}", problem.ode.accuracy(&r.xbar).value);
            print!("{}", pipeline::format_terms(&r.xbar));
            if let Some(path) = &o.out {
                std::fs::write(path, pipeline::format_terms(&r.xbar))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify(o) => {
            let (problem, settings) = load(&o)?;
            let xbar = match &o.xbar {
                Some(path) => read_xbar(path)?,
                None => {
                    let rungs = pipeline::solve_ladder(&problem, &settings)?;
                    pipeline::rationalize(&problem, &settings, &rungs)?
                }
            };
            let cert = pipeline::certify_solution(&problem, &settings, &xbar)?;
            emit_certificate(&problem, &settings, &cert, &o)
        }
        Command::Shoot(o) => {
            let (problem, settings) = load(&o)?;
            let report = pipeline::shoot(&problem, &settings)?;
            print!("{}", pipeline::format_shoot(&report));
            if let Some(path) = &o.trajectory {
                std::fs::write(path, report.trajectory.to_csv())?;
            }
            if let Some(path) = &o.out {
                std::fs::write(path, pipeline::format_terms(&pipeline::shooting_solution(&report).xbar))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::All(o) => {
            let (problem, settings) = load(&o)?;
            let rungs = pipeline::solve_ladder(&problem, &settings)?;
            print!("{}", pipeline::format_ladder(&rungs));
            let r = pipeline::rationalize(&problem, &settings, &rungs)?;
            println!("# rationalized");
            println!("accuracy = {}", problem.ode.accuracy(&r.xbar).value);
            print!("{}", pipeline::format_terms(&r.xbar));
            println!("# certificate");
            let cert = pipeline::certify_solution(&problem, &settings, &r)?;
            emit_certificate(&problem, &settings, &cert, &o)
        }
    }
}

fn load(o: &Opts) -> Result<(ProblemFile, Settings), Error> {
    let problem = ProblemFile::read(&o.problem)?;
    let settings = Settings::resolve(&problem, &o.flags());
    Ok((problem, settings))
}

fn read_xbar(path: &Path) -> Result<ApproxSolution, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(ApproxSolution::new(TrigPoly::parse_terms(&text)?, Provenance::User))
}

/// Prints the certificate and writes it (with a timestamp) to `--out`, or
/// to `<name>.cert` in the working directory. Exit 0 iff existence holds.
fn emit_certificate(problem: &ProblemFile, settings: &Settings, cert: &Certificate, o: &Opts) -> Result<ExitCode, Error> {
    print!("{}", cert.to_document(None));
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let path = o.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.cert", problem.name)));
    std::fs::write(&path, cert.to_document(Some(&format!("unix:{stamp}"))))?;
    log::info!(
        "remainder bounds on {} samples (seed {}): {}",
        pipeline::R_CHECK_SAMPLES,
        settings.seed,
        if pipeline::r_bounds_hold(problem, settings, cert) { "hold" } else { "violated" }
    );
    Ok(if cert.exists_unique { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
