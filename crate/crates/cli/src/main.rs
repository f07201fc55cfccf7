mod commands;
mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "freebound", version, about = "Profiles, traveling waves and regularized runs for singular free-boundary problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a special function and print the value.
    Special(SpecialArgs),
    /// Self-similar radial profiles.
    #[command(subcommand)]
    Profile(ProfileCommand),
    /// Traveling-wave profile.
    Tw(TwArgs),
    /// Two traveling waves moving towards each other.
    Collide(CollideArgs),
    /// Regularized evolution from a key=value config file.
    Evolve(EvolveArgs),
    /// Weiss energies and monotonicity audit of a completed run.
    Weiss(WeissArgs),
    /// Run the acceptance criteria, one line per criterion.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum ProfileCommand {
    /// Forward (expanding) profile with free boundary at R.
    Forward(ForwardArgs),
    /// Shrinking profiles, or the nonexistence report at gamma = 1.
    Shrinker(ShrinkerArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialFn {
    /// Kummer M(a, b, s).
    #[value(name = "M")]
    M,
    /// Tricomi U(a, b, s).
    #[value(name = "U")]
    U,
    /// Gamma function at s.
    #[value(name = "gamma", alias = "Gamma")]
    Gamma,
    /// First positive zero of M(a, b, .) up to s (default 1000).
    #[value(name = "zero")]
    Zero,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SpecialArgs {
    #[arg(long = "fn", value_enum)]
    pub func: SpecialFn,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Print the derivative in s instead (M and U).
    #[arg(long)]
    pub derivative: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Fb,
    Delta,
    Explicit,
}

#[derive(Args, Debug)]
pub struct ForwardArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Free-boundary radius R.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Outer radius; 10 R by default.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Fb)]
    pub method: MethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ShrinkerArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Centre heights to scan; 41 log-spaced values in [0.01, 100] by default.
    #[arg(long, value_delimiter = ',')]
    pub ell: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct TwArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Wave speed.
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    #[arg(long, default_value_t = 5.0)]
    pub xi_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct CollideArgs {
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Speed of the right front (negative).
    #[arg(long, default_value_t = -1.0)]
    pub c1: f64,
    /// Speed of the left front (positive).
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub xi1: f64,
    #[arg(long, default_value_t = -1.0)]
    pub xi2: f64,
    #[arg(long, default_value_t = 10.0)]
    pub xi_max: f64,
    /// Times before the collision at which u is sampled.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.1])]
    pub before: Vec<f64>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// key=value config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Run directory; overrides the `out` key.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct WeissArgs {
    /// Run directory written by `evolve`.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Centre time; 0.8 t_end by default.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Smallest radius; 4 dx by default.
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest radius; min(0.4, 0.45 sqrt(t0)) by default.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 33)]
    pub count: usize,
    /// Output directory; the run directory by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Every acceptance criterion at its stated tolerance.
    Fast,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Fast)]
    pub suite: Suite,
    /// Restrict to these criterion ids.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[arg(long, default_value_t = freebound::acceptance::WRONSKIAN_SEED)]
    pub seed: u64,
}

/// Error that maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<freebound::Error>() {
        Some(freebound::Error::Domain { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Special(a) => commands::special(&a),
        Command::Profile(ProfileCommand::Forward(a)) => commands::profile_forward(&a),
        Command::Profile(ProfileCommand::Shrinker(a)) => commands::profile_shrinker(&a),
        Command::Tw(a) => commands::tw(&a),
        Command::Collide(a) => commands::collide(&a),
        Command::Evolve(a) => run::evolve(&a),
        Command::Weiss(a) => run::weiss(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
