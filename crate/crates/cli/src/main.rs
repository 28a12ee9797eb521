use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use expfit::elements::Space;
use expfit::harness::basis_dump::basis_dump;
use expfit::harness::stability::summary_csv;
use expfit::harness::{run_convergence, run_property_suites, run_stability_demo, HarnessError, ManufacturedCase, SuiteSettings};
use expfit::mesh::Point;
use expfit::solver::SolveMethod;

const EXIT_SOLVER: u8 = 1;
const EXIT_PROPERTY: u8 = 2;
const EXIT_ARGS: u8 = 3;

#[derive(Parser)]
#[command(name = "expfit", about = "Exponentially fitted Whitney form solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study for a manufactured solution; writes a CSV table.
    Convergence {
        #[arg(long, value_parser = case_name)]
        case: String,
        /// Comma-separated diffusion values (case default if omitted).
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Comma-separated mesh levels 1/h (case default if omitted).
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Force the direct or iterative solver instead of choosing by size.
        #[arg(long, value_parser = ["auto", "direct", "gmres"], default_value = "auto")]
        solver: String,
    },
    /// Rotating-flow stability demo; writes one VTK file per eps and summary.csv.
    Stability {
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-6])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Structural property checks.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
    },
    /// Sample the local basis and fluxes on a lattice over the reference cell.
    BasisDump {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
        k: u8,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Two components select the triangle, three the tetrahedron.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "basis.csv")]
        out: PathBuf,
    },
}

fn case_name(s: &str) -> Result<String, String> {
    if ManufacturedCase::names().contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("expected one of {}", ManufacturedCase::names().join(", ")))
    }
}

enum Failure {
    Args(String),
    Solver(String),
    Property,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Parse(m) => Failure::Args(m),
            other => Failure::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Convergence { case, eps, levels, out, solver } => {
            let case = ManufacturedCase::by_name(&case).ok_or_else(|| Failure::Args(format!("unknown case {case}")))?;
            let eps = if eps.is_empty() { case.eps_list.clone() } else { eps };
            let levels = if levels.is_empty() { case.levels.clone() } else { levels };
            if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) || levels.contains(&0) {
                return Err(Failure::Args("eps must be positive and levels nonzero".into()));
            }
            let method = match solver.as_str() {
                "direct" => SolveMethod::Direct,
                "gmres" => SolveMethod::Iterative(Default::default()),
                _ => SolveMethod::Auto,
            };
            let (table, _) = run_convergence(&case, &eps, &levels, method)?;
            print!("{}", table.render());
            write(&out.join(format!("{}.csv", case.name)), &table.to_csv())
        }
        Command::Stability { eps, n, out } => {
            if n == 0 || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(Failure::Args("eps must be positive and n nonzero".into()));
            }
            let runs = run_stability_demo(&eps, n)?;
            for (summary, vtk) in &runs {
                write(&out.join(format!("stability_eps{:e}.vtk", summary.eps)), vtk)?;
            }
            let summaries: Vec<_> = runs.into_iter().map(|(s, _)| s).collect();
            let csv = summary_csv(&summaries);
            print!("{csv}");
            write(&out.join("summary.csv"), &csv)?;
            if summaries.iter().all(|s| s.finite) {
                Ok(())
            } else {
                Err(Failure::Solver("non-finite field in stability demo".into()))
            }
        }
        Command::Check { seed, quick } => {
            let settings = if quick { SuiteSettings::quick(seed) } else { SuiteSettings::full(seed) };
            let report = run_property_suites(&settings);
            print!("{}", report.render());
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Property)
            }
        }
        Command::BasisDump { k, eps, beta, n, out } => {
            let dim = beta.len();
            if !(2..=3).contains(&dim) {
                return Err(Failure::Args("--beta needs 2 or 3 components".into()));
            }
            if !(eps.is_finite() && eps > 0.0) || n == 0 {
                return Err(Failure::Args("eps must be positive and n nonzero".into()));
            }
            // in 2D the edge space is the rotated H(div) one and the top degree is L2
            let space = match (dim, k) {
                (_, 0) => Space::Grad,
                (2, 1) => Space::Div,
                (2, _) => Space::L2,
                (_, 1) => Space::Curl,
                _ => Space::Div,
            };
            let beta = Point::new(beta[0], beta[1], beta.get(2).copied().unwrap_or(0.0));
            let csv = basis_dump(space, dim, eps, beta, n).map_err(|e| Failure::Solver(e.to_string()))?;
            write(&out, &csv)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ARGS) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Args(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ARGS)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Property) => ExitCode::from(EXIT_PROPERTY),
    }
}
