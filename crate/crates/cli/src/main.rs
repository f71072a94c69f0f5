//! `admesh`: generate, verify and use polynomial admissible meshes.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "admesh", version, about = "Optimal polynomial admissible meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a mesh and write it as JSON (or CSV for a `.csv` path).
    Generate(GenerateArgs),
    /// Estimate the norming constant of a mesh and check its claim.
    Verify(VerifyArgs),
    /// Discrete least squares on a family of meshes.
    Approximate(ApproximateArgs),
    /// Cardinality table of every construction against the Markov grid.
    Compare(CompareArgs),
    /// Extract approximate Fekete points from a mesh.
    Fekete(FeketeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Construction {
    Star,
    StarRefined,
    C11,
    Baseline,
}

impl Construction {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Star => "star",
            Self::StarRefined => "star_refined",
            Self::C11 => "c11",
            Self::Baseline => "baseline",
        }
    }
}

/// Shared construction parameters.
#[derive(Args, Debug, Clone)]
pub struct BuildArgs {
    /// Domain description (JSON); the unit disk when omitted.
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "star")]
    construction: Construction,
    /// Tube depth of the C^{1,1} construction; 0.9 times the reach by default.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    mu: f64,
    /// Markov constant of the baseline grid.
    #[arg(long = "markov-M", default_value_t = 1.0)]
    markov_m: f64,
    #[arg(long = "markov-exp", default_value_t = 2.0)]
    markov_exp: f64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long)]
    degree: usize,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Mesh file (JSON, or CSV together with --degree and --construction).
    #[arg(long)]
    mesh: PathBuf,
    #[command(flatten)]
    build: BuildArgs,
    /// Degree of a CSV mesh.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, env = "ADMESH_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Control grid size for sup norms on the domain.
    #[arg(long, default_value_t = 20_000)]
    grid: usize,
    /// Also compute the exact norming constant on a control grid by LP.
    #[arg(long)]
    lp: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApproximateArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Built-in target: exp, runge or abs.
    #[arg(long, default_value = "exp", conflicts_with = "target_poly")]
    target: String,
    /// Polynomial target read from a Poly JSON file.
    #[arg(long)]
    target_poly: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 6, 8, 10, 12])]
    degrees: Vec<usize>,
    #[arg(long, env = "ADMESH_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Poly JSON of the fit at the largest degree.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Error table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Error and bound against degree.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32])]
    degrees: Vec<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    mu: f64,
    #[arg(long = "markov-M", default_value_t = 1.0)]
    markov_m: f64,
    #[arg(long = "markov-exp", default_value_t = 2.0)]
    markov_exp: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeketeArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Domain whose bounding box scales the basis; the mesh's own box otherwise.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Degree of the extracted points; the mesh degree by default.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Ok,
    Violated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            commands::report_error("usage", &e.render().to_string());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a.build, a.degree, a.out.as_deref(), a.svg.as_deref()),
        Command::Verify(a) => commands::verify(&commands::VerifyConfig {
            mesh: a.mesh,
            build: a.build,
            degree: a.degree,
            seed: a.seed,
            trials: a.trials,
            grid: a.grid,
            lp: a.lp,
            out: a.out,
        }),
        Command::Approximate(a) => commands::approximate(&commands::ApproximateConfig {
            build: a.build,
            target: a.target,
            target_poly: a.target_poly,
            degrees: a.degrees,
            seed: a.seed,
            trials: a.trials,
            out: a.out,
            csv: a.csv,
            svg: a.svg,
        }),
        Command::Compare(a) => commands::compare(&commands::CompareConfig {
            domain: a.domain,
            degrees: a.degrees,
            delta: a.delta,
            lambda: a.lambda,
            mu: a.mu,
            markov_m: a.markov_m,
            markov_exp: a.markov_exp,
            out: a.out,
            csv: a.csv,
        }),
        Command::Fekete(a) => commands::fekete(&a.mesh, a.domain.as_deref(), a.degree, a.out.as_deref(), a.svg.as_deref()),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Err(e) => {
            commands::report_error(commands::error_kind(&e), &e.to_string());
            ExitCode::from(2)
        }
    }
}
