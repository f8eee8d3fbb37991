use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

mod commands;
mod io;

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_LARGER: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "linpres", version, about = "Linear preservers of secant varieties of Segre-Veronese varieties")]
struct Cli {
    /// TOML file with default values for any flag (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the parallel engines.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// s(n), a witness collection and the guaranteed secant range.
    Bound(BoundArgs),
    /// Degree r+1 component of the ideal of σ_r, from flattening minors.
    Ideal(IdealArgs),
    /// Lie algebra stabilizer of a secant component or of given forms.
    Stabilizer(StabilizerArgs),
    /// Multilinear ranks, rank-one tests and non-redundancy of ranks.
    Membership(MembershipArgs),
    /// Interpolates an invariant vanishing on σ_r.
    Interpolate(InterpolateArgs),
    /// Runs the reference computations with their expected values.
    Repro(ReproArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct BoundArgs {
    /// Factor dimensions, e.g. 2,2,2,2.
    #[arg(long)]
    pub dims: Option<String>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct IdealArgs {
    /// Factor dimensions (`2,2,2`) or the literal `dims=3 degrees=3`.
    #[arg(long)]
    pub format: Option<String>,
    /// Degrees of the factors; all one if omitted.
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long)]
    pub secant: Option<usize>,
    /// Degree of the component; only r+1 is computed.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Compare the minors with the prolongation of the quadrics.
    #[arg(long)]
    pub cross_check: bool,
    #[arg(long)]
    pub monomial_cap: Option<u64>,
    /// Basis in the polynomial text format.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct StabilizerArgs {
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long)]
    pub secant: Option<usize>,
    /// Polynomial file; its forms span the subspace to stabilize.
    #[arg(long)]
    pub invariant: Option<PathBuf>,
    /// Merged format to compare against, e.g. 4,4 (repeatable).
    #[arg(long)]
    pub merged: Vec<String>,
    /// `auto` or a comma-separated list of primes.
    #[arg(long)]
    pub primes: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub monomial_cap: Option<u64>,
    /// Write the Lie algebra basis matrices (JSON) here.
    #[arg(long)]
    pub emit_basis: Option<PathBuf>,
    /// Exit 0 on a larger than expected algebra.
    #[arg(long)]
    pub allow_larger: bool,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct MembershipArgs {
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    /// File of N rationals (whitespace or comma separated, `#` comments).
    #[arg(long)]
    pub point: Option<PathBuf>,
    /// Bipartitions for the partition-rank-one test, e.g. `12|34;13|24`.
    #[arg(long)]
    pub collection: Option<String>,
    /// Target multilinear ranks for the non-redundancy check.
    #[arg(long)]
    pub ranks: Option<String>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long)]
    pub secant: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Orbit sums under index permutations in each factor.
    #[arg(long)]
    pub weyl: bool,
    /// Twist the orbit sums by the sign of odd permutations.
    #[arg(long)]
    pub signed_weyl: bool,
    /// Skew-symmetrize over permutations of interchangeable factors.
    #[arg(long, conflicts_with = "symmetric")]
    pub skew: bool,
    /// Symmetrize over permutations of interchangeable factors.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub primes: Option<String>,
    /// Extra samples beyond the number of candidates.
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long)]
    pub candidate_cap: Option<usize>,
    #[arg(long)]
    pub row_cap: Option<usize>,
    /// Invariant in the polynomial text format.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default)]
#[serde(default)]
pub struct ReproArgs {
    /// Include the degree 9 and degree 6 interpolations.
    #[arg(long)]
    pub stretch: bool,
    /// Directory for interpolated invariants.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Fills flags missing on the command line from the config table.
fn merge<T: Serialize + DeserializeOwned>(args: T, config: &serde_json::Map<String, serde_json::Value>) -> anyhow::Result<T> {
    let mut value = serde_json::to_value(args)?;
    let obj = value.as_object_mut().expect("argument structs are objects");
    for (key, v) in config {
        let key = key.replace('-', "_");
        let Some(slot) = obj.get_mut(&key) else {
            continue;
        };
        let unset = match slot {
            serde_json::Value::Null => true,
            serde_json::Value::Bool(b) => !*b,
            serde_json::Value::Array(a) => a.is_empty(),
            _ => false,
        };
        if unset {
            *slot = v.clone();
        }
    }
    serde_json::from_value(value).context("config file has a value of the wrong type")
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<serde_json::Map<String, serde_json::Value>> {
    let Some(path) = path else {
        return Ok(Default::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match serde_json::to_value(table)? {
        serde_json::Value::Object(m) => Ok(m),
        _ => bail!("config must be a table"),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let config = load_config(&cli.config)?;
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => config.get("threads").and_then(|v| v.as_u64()).map(|t| t as usize),
    };
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Bound(a) => commands::bound(merge(a, &config)?),
        Command::Ideal(a) => commands::ideal(merge(a, &config)?),
        Command::Stabilizer(a) => commands::stabilizer(merge(a, &config)?),
        Command::Membership(a) => commands::membership(merge(a, &config)?),
        Command::Interpolate(a) => commands::interpolate(merge(a, &config)?),
        Command::Repro(a) => commands::repro(merge(a, &config)?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use linpres::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::CapExceeded { .. }) => EXIT_CAP,
        Some(
            E::Verification(_)
            | E::Certification(_)
            | E::NoInvariant { .. }
            | E::AmbiguousKernel { .. }
            | E::Reconstruction(_)
            | E::PrimeExhaustion(_),
        ) => EXIT_VERIFY,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
