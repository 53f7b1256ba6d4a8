//! `halfdisk`: bounds tables, single routes, Markov walks, Monte Carlo
//! experiments and Poisson network dumps.
//!
//! Exit status: 0 on success, 2 on a configuration error, 3 when an
//! experiment reports a `violated` verdict, 1 on any other failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use halfdisk::{RegionKind, RelayPolicy};

use config::{parse_count, ConfigError, NumList, Resolver};

#[derive(Debug, Parser)]
#[command(name = "halfdisk", version, about = "Random η-disk geometric routing: bounds, simulation and experiments")]
pub struct Cli {
    /// Flat JSON object whose keys mirror the flag names; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for all randomness [default: 0]
    #[arg(long, global = true, value_parser = parse_count)]
    seed: Option<u64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads, 0 for one per core [default: 0]
    #[arg(long, global = true, value_parser = parse_count)]
    threads: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the connectivity bound, hop-count bounds and the empty-wedge table
    Bounds(BoundsArgs),
    /// Route one packet through a Poisson network (or a node file) and print its path
    Route(RouteArgs),
    /// Trace one Markov walk of the distance to the destination
    Walk(WalkArgs),
    /// Run a Monte Carlo experiment
    Exp {
        #[command(subcommand)]
        kind: ExpKind,
    },
    /// Dump one Poisson network realization as `id,x,y`
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Expected node count N [default: 1e5]
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Normalized transmission-disk area d = πR²/|A| [default: 1e-3]
    #[arg(long)]
    pub d: Option<f64>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Use the (1 − (2 − √d)√d)N interior count
    #[arg(long)]
    pub intermediate: bool,
    /// Source–destination distances h/R for the hop bounds [default: none]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<NumList>,
    /// Stopping radii r/R for the hop bounds [default: 1]
    #[arg(long = "r-over-R")]
    pub r_over_r: Option<NumList>,
    /// Largest i of the empty-wedge table, 0 for none [default: 0]
    #[arg(long = "max-i", value_parser = parse_count)]
    pub max_i: Option<u64>,
    /// Wedge fractions of the empty-wedge table [default: the --eta value]
    #[arg(long)]
    pub etas: Option<NumList>,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Node density λ [default: 20]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Transmission range R [default: 1]
    #[arg(long = "R")]
    pub range: Option<f64>,
    /// Region shape [default: disk]
    #[arg(long)]
    pub region: Option<RegionKind>,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Disk radius or square side [default: h/2 + 4R]
    #[arg(long)]
    pub size: Option<f64>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Relay rule: random_wedge, greedy, mfr, nfp, compass [default: random_wedge]
    #[arg(long)]
    pub policy: Option<RelayPolicy>,
    /// Source–destination distance h/R for synthetic endpoints at (∓h/2, 0) [default: 10]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<f64>,
    /// Transmission cap [default: ⌈40h/R⌉ + 100]
    #[arg(long = "hop-cap", value_parser = parse_count)]
    pub hop_cap: Option<u64>,
    /// Read nodes from an `id,x,y` file instead of generating them
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Source node id (with --dst, routes between two nodes)
    #[arg(long, value_parser = parse_count)]
    pub src: Option<u64>,
    /// Destination node id
    #[arg(long, value_parser = parse_count)]
    pub dst: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Starting distance h/R [default: 10]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<f64>,
    /// Transmission range R [default: 1]
    #[arg(long = "R")]
    pub range: Option<f64>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Step cap [default: ⌈100h/R⌉ + 10⁴]
    #[arg(long = "hop-cap", value_parser = parse_count)]
    pub hop_cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Disk radius or square side [default: 10]
    #[arg(long)]
    pub size: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExpKind {
    /// Disconnection frequency against the connectivity bound
    Connectivity(ConnectivityArgs),
    /// Network hop counts against the expected-hop bounds
    Hopcount(HopcountArgs),
    /// Markov-walk stopping times against the expected-hop bounds
    Walk(WalkExpArgs),
    /// Step-size law against its closed-form CDF
    Stepdist(StepdistArgs),
    /// Selection frequency in the overlap of consecutive half-disks
    Prop1(Prop1Args),
    /// Disconnection and hop counts across η (no verdicts)
    Eta(EtaArgs),
    /// Widest-gap frequency against the empty-wedge probability
    Uwedge(UwedgeArgs),
}

#[derive(Debug, Args)]
pub struct ConnectivityArgs {
    /// Expected node count N [default: 3000]
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Expected neighbors dN, comma-separated [default: 20,30,40]
    #[arg(long = "dN")]
    pub dn: Option<NumList>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Region shape [default: disk]
    #[arg(long)]
    pub region: Option<RegionKind>,
    /// Networks per dN [default: 1000]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HopcountArgs {
    /// Density λR² [default: 20]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Distances h/R, comma-separated [default: 10,25,50]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<NumList>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Relay rule [default: random_wedge]
    #[arg(long)]
    pub policy: Option<RelayPolicy>,
    /// Packets per distance [default: 1e4]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Transmission cap [default: ⌈40h/R⌉ + 100]
    #[arg(long = "hop-cap", value_parser = parse_count)]
    pub hop_cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WalkExpArgs {
    /// Distances h/R, comma-separated [default: 10,25,50,100]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<NumList>,
    /// Wedge fraction η [default: 0.5]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Walks per distance [default: 1e5]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Step cap [default: ⌈100h/R⌉ + 10⁴]
    #[arg(long = "hop-cap", value_parser = parse_count)]
    pub hop_cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StepdistArgs {
    /// Distances r/R, comma-separated, each above 1 [default: 1.01,1.5,2,5,20]
    #[arg(long = "r-over-R")]
    pub r_over_r: Option<NumList>,
    /// Half-disk draws per distance [default: 1e6]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Relay choices in Poisson networks per distance, 0 to skip [default: 0]
    #[arg(long = "network-trials", value_parser = parse_count)]
    pub network_trials: Option<u64>,
    /// Density λR² of the networked variant [default: 50]
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Prop1Args {
    /// Expected half-disk node counts λ|D|, comma-separated [default: 5,20,100]
    #[arg(long = "lambda-area")]
    pub lambda_area: Option<NumList>,
    /// Trials per density [default: 2e5]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Overlap-ratio bins [default: 20]
    #[arg(long, value_parser = parse_count)]
    pub bins: Option<u64>,
    /// Fewest trials for a bin to be judged [default: 30]
    #[arg(long = "min-per-bin", value_parser = parse_count)]
    pub min_per_bin: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EtaArgs {
    /// Wedge fractions, comma-separated [default: 0.25,0.5,0.75,1]
    #[arg(long)]
    pub etas: Option<NumList>,
    /// Expected node count N [default: 3000]
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Expected neighbors dN [default: 30]
    #[arg(long = "dN")]
    pub dn: Option<f64>,
    /// Region shape [default: disk]
    #[arg(long)]
    pub region: Option<RegionKind>,
    /// Networks per η [default: 200]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Walk starting distance h/R [default: 10]
    #[arg(long = "h-over-R")]
    pub h_over_r: Option<f64>,
    /// Walks per η [default: 1e4]
    #[arg(long, value_parser = parse_count)]
    pub walks: Option<u64>,
}

#[derive(Debug, Args)]
pub struct UwedgeArgs {
    /// Largest number of angles i [default: 10]
    #[arg(long = "max-i", value_parser = parse_count)]
    pub max_i: Option<u64>,
    /// Wedge fractions, comma-separated [default: 0.25,0.5,0.75]
    #[arg(long)]
    pub etas: Option<NumList>,
    /// Angle tuples per cell [default: 1e6]
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<halfdisk::Error>() {
        Some(
            halfdisk::Error::InvalidParameter(_)
            | halfdisk::Error::UnknownNode(_)
            | halfdisk::Error::OutsideSupport { .. }
            | halfdisk::Error::MalformedNodeFile { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let resolver = match &cli.config {
        Some(path) => Resolver::from_file(path),
        None => Ok(Resolver::empty()),
    };
    let result = resolver.map_err(anyhow::Error::from).and_then(|r| commands::run(&cli, &r));
    match result {
        Ok(violated) => ExitCode::from(if violated { 3 } else { 0 }),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
