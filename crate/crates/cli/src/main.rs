//! `gdof`: exact GDoF regions, scheme checks, K-user bounds and simulation
//! from the command line.
//!
//! Exit status: 0 on success or a true verdict, 1 on a false verdict, 2 on
//! bad input.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdof_core::rational::Rational;
use gdof_core::PartLabel;

use input::Sink;

type Coords = Vec<Rational>;
type Grid = Vec<f64>;

#[derive(Debug, Parser)]
#[command(name = "gdof", version, about = "Exact GDoF regions for the three-user MISO broadcast channel")]
struct Cli {
    /// Write the main result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Channel input. Numbers are exact: `1.1` means 11/10.
#[derive(Debug, Args)]
struct ChannelArgs {
    /// Channel JSON (`{"K":3,"M":3,"alpha":[[...]]}`), or `-` for stdin.
    #[arg(value_name = "CHANNEL", conflicts_with = "cyclic")]
    file: Option<PathBuf>,
    /// Cyclic channel with unit diagonal and cross strengths `a`, `b`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], value_parser = input::rational)]
    cyclic: Option<Vec<Rational>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the SLS-optimality conditions, trying antenna reorderings.
    Check(ChannelArgs),
    /// Print the outer region, an achievable part, or the cyclic closed form.
    Region {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Achievable part such as `D123` or `F213` instead of the outer region.
        #[arg(long, conflicts_with = "closed_form")]
        part: Option<PartLabel>,
        /// Closed-form region of a cyclic channel.
        #[arg(long)]
        closed_form: bool,
        /// Include the vertex list.
        #[arg(long)]
        vertices: bool,
    },
    /// Decide whether an achievable part equals the outer region.
    VerifyEquivalence(ChannelArgs),
    /// Check a scheme's rate split and SINR exponents.
    VerifyScheme {
        /// Scheme JSON with `variant`, `params`, `split` and optionally `channel`.
        scheme: PathBuf,
        /// Channel to use when the scheme has none.
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Find parameters and a rate split achieving a GDoF point.
    ParamsForVertex {
        #[command(flatten)]
        channel: ChannelArgs,
        /// The point, e.g. `1.2,0.2,0.1`.
        #[arg(long, value_parser = input::point)]
        point: Coords,
    },
    /// Enumerate bounding patterns and the K-user outer bound they give.
    Kbounds {
        /// Channel JSON; without it only the patterns are listed.
        channel: Option<PathBuf>,
        /// Number of users.
        #[arg(long = "K", value_name = "K")]
        k: Option<usize>,
        /// Maximum merge depth.
        #[arg(long)]
        depth: Option<usize>,
        /// Attach a derivation to every bound.
        #[arg(long)]
        explain: bool,
    },
    /// Classify a grid over the cyclic family as CSV.
    CyclicSweep {
        /// Grid step in (0, 1], e.g. `1/64`.
        #[arg(long, value_parser = input::rational)]
        step: Rational,
        /// Skip the outer-region column.
        #[arg(long)]
        no_rows: bool,
    },
    /// Monte Carlo rates of a scheme at finite SNR, as CSV.
    Simulate {
        /// Scheme JSON.
        #[arg(long, conflicts_with_all = ["channel", "point"], required_unless_present = "channel")]
        scheme: Option<PathBuf>,
        /// Channel JSON; the scheme is certified for `--point`.
        #[arg(long, requires = "point")]
        channel: Option<PathBuf>,
        #[arg(long, value_parser = input::point)]
        point: Option<Coords>,
        /// Linear SNR values, ascending.
        #[arg(long, value_parser = input::floats, default_value = "1e4,1e6,1e8,1e10")]
        p_grid: Grid,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the JSON summary here instead of stderr.
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
    },
    /// Compare a channel's outer region and verdict with its transpose.
    DualCheck(ChannelArgs),
}

fn run(cli: Cli) -> input::CliResult<bool> {
    let sink = Sink { out: cli.out };
    match cli.command {
        Command::Check(c) => commands::check(&sink, &c.load()?),
        Command::Region {
            channel,
            part,
            closed_form,
            vertices,
        } => {
            let closed = match (closed_form, &channel.cyclic) {
                (false, _) => None,
                (true, Some(ab)) => Some(ab.clone()),
                (true, None) => return Err(input::CliError::input("--closed-form needs --cyclic A B")),
            };
            commands::region(&sink, &channel.load()?, part, closed, vertices)
        }
        Command::VerifyEquivalence(c) => commands::verify_equivalence(&sink, &c.load()?),
        Command::VerifyScheme { scheme, channel } => commands::verify_scheme(&sink, &scheme, channel.as_deref()),
        Command::ParamsForVertex { channel, point } => commands::params_for_vertex(&sink, &channel.load()?, &point),
        Command::Kbounds {
            channel,
            k,
            depth,
            explain,
        } => commands::kbounds(&sink, channel.as_deref(), k, input::budget(depth)?, explain),
        Command::CyclicSweep { step, no_rows } => commands::cyclic_sweep(&sink, &step, !no_rows),
        Command::Simulate {
            scheme,
            channel,
            point,
            p_grid,
            trials,
            seed,
            summary,
        } => {
            let source = match (scheme, channel, point) {
                (Some(s), _, _) => commands::SchemeSource::File(s),
                (None, Some(c), Some(p)) => commands::SchemeSource::Certify(c, p),
                _ => return Err(input::CliError::input("give --scheme, or --channel with --point")),
            };
            let cfg = gdof_core::SimConfig {
                p_grid,
                trials,
                seed,
                ..Default::default()
            };
            commands::simulate(&sink, source, cfg, summary.as_deref())
        }
        Command::DualCheck(c) => commands::dual_check(&sink, &c.load()?),
    }
}

impl ChannelArgs {
    fn load(&self) -> input::CliResult<gdof_core::ChannelMatrix> {
        input::channel(self.file.as_deref(), self.cyclic.as_deref())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
