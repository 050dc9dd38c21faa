//! The `tcnet` command line.
//!
//! Exit codes: 0 success, 1 no solution or incompatible input, 2 parse or
//! validation error, 3 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::enewick::{parse_document, write_enewick};
use crate::generate::{generate_instance, GeneratorConfig};
use crate::network::Network;
use crate::sequence::{self, parse_sequence};
use crate::solver::{quick_incompatibility, solve, Instance, SolveError, SolverOptions};
use crate::taxon::Pair;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_SOLUTION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tcnet",
    version,
    about = "Minimum tree-child networks displaying a set of networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print an optimal sequence and the network it builds.
    Solve {
        file: PathBuf,
        /// Largest reticulation number to try.
        #[arg(long)]
        max_k: Option<usize>,
        /// Skip branches that cannot beat the best sequence found so far.
        #[arg(long)]
        prune: bool,
        /// Print search statistics to stderr.
        #[arg(long)]
        stats: bool,
        /// Shuffle branch order with this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Explore the top levels of the search in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// Apply a sequence to every network and print the results.
    Reduce {
        file: PathBuf,
        #[arg(long = "seq")]
        seq: PathBuf,
    },
    /// Build the network of a tree-child sequence.
    Construct {
        #[arg(long = "seq")]
        seq: PathBuf,
    },
    /// Report structural properties and incompatibilities.
    Check { file: PathBuf },
    /// Emit a random instance.
    Generate {
        #[arg(long)]
        taxa: usize,
        #[arg(long)]
        weight: usize,
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure carrying its exit code; the message goes to stderr.
struct Failure(i32, String);

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Solve {
            file,
            max_k,
            prune,
            stats,
            seed,
            parallel,
        } => {
            let options = SolverOptions {
                prune,
                parallel,
                seed,
                ..SolverOptions::default()
            };
            cmd_solve(&file, max_k, &options, stats, out, err)
        }
        Command::Reduce { file, seq } => cmd_reduce(&file, &seq, out),
        Command::Construct { seq } => cmd_construct(&seq, out),
        Command::Check { file } => cmd_check(&file, out, err),
        Command::Generate {
            taxa,
            weight,
            count,
            seed,
        } => {
            let cfg = GeneratorConfig {
                taxa_count: taxa,
                target_weight: weight,
                seed,
                subnetwork_count: count,
            };
            cmd_generate(&cfg, out)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn read_networks(path: &Path) -> Result<Vec<Network>, Failure> {
    let text = read(path)?;
    let doc = parse_document(&text)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    Ok(doc.networks)
}

fn read_pairs(path: &Path) -> Result<Vec<Pair>, Failure> {
    let text = read(path)?;
    parse_sequence(&text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let networks = read_networks(path)?;
    Instance::new(networks).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> Failure {
    Failure(EXIT_INPUT, format!("write failed: {e}"))
}

fn cmd_solve(
    path: &Path,
    max_k: Option<usize>,
    options: &SolverOptions,
    show_stats: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let instance = read_instance(path)?;
    match solve(&instance, max_k, options) {
        Ok(result) => {
            write!(
                out,
                "{}",
                sequence::format_sequence(result.sequence.pairs())
            )
            .map_err(io)?;
            writeln!(out, "{}", write_enewick(&result.network)).map_err(io)?;
            if show_stats {
                let s = &result.stats;
                writeln!(err, "weight: {}", result.weight).map_err(io)?;
                writeln!(err, "nodes_expanded: {}", s.nodes_expanded).map_err(io)?;
                writeln!(err, "trivial_reductions: {}", s.trivial_reductions).map_err(io)?;
                writeln!(err, "max_branch_width: {}", s.max_branch_width).map_err(io)?;
                for (reason, count) in &s.failures_by_reason {
                    writeln!(err, "failures.{reason}: {count}").map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Err(SolveError::Incompatible(witness)) => {
            writeln!(out, "incompatible: {witness}").map_err(io)?;
            Ok(EXIT_NO_SOLUTION)
        }
        Err(e) => Err(Failure(EXIT_NO_SOLUTION, e.to_string())),
    }
}

fn cmd_reduce(path: &Path, seq: &Path, out: &mut dyn Write) -> Outcome {
    let networks = read_networks(path)?;
    let pairs = read_pairs(seq)?;
    for n in &networks {
        writeln!(
            out,
            "{}",
            write_enewick(&sequence::reduce_by_sequence(n, &pairs))
        )
        .map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn cmd_construct(seq: &Path, out: &mut dyn Write) -> Outcome {
    let pairs = read_pairs(seq)?;
    let network = sequence::construct_network(&pairs)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", seq.display())))?;
    writeln!(out, "{}", write_enewick(&network)).map_err(io)?;
    Ok(EXIT_OK)
}

fn cmd_check(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let networks = read_networks(path)?;
    for (i, n) in networks.iter().enumerate() {
        writeln!(
            out,
            "network {}: binary={} stack_free={} tree_child={} reticulation_number={}",
            i + 1,
            n.is_binary(),
            n.is_stack_free(),
            n.is_tree_child(),
            n.reticulation_number()
        )
        .map_err(io)?;
    }
    match Instance::new(networks) {
        Ok(instance) => {
            if let Some(witness) = quick_incompatibility(&instance) {
                writeln!(out, "incompatible: {witness}").map_err(io)?;
                return Ok(EXIT_NO_SOLUTION);
            }
        }
        Err(e) => writeln!(err, "note: skipping the incompatibility check: {e}").map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn cmd_generate(cfg: &GeneratorConfig, out: &mut dyn Write) -> Outcome {
    let generated = generate_instance(cfg).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
    writeln!(out, "# {cfg}").map_err(io)?;
    writeln!(out, "# host: {}", write_enewick(&generated.host)).map_err(io)?;
    for n in generated.instance.networks() {
        writeln!(out, "{}", write_enewick(n)).map_err(io)?;
    }
    Ok(EXIT_OK)
}
