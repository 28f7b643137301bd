//! The `hydra` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::game::{build_tree, game_height, play, GameError, MoveList, Strategy};
use crate::hydra::{Hydra, LabelSet};
use crate::moves::{BraceDVariant, ContextGuard, MoveConfig, UnfoldGuard};
use crate::server::{self, ServerConfig};
use crate::textio::{parse_hydra, parse_labels, Document, ParseError};
use crate::verify::{run_property_suite, Mutation, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "hydra", version, about = "Play and check the ordinal-diagram hydra game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and sort-check a hydra, print its normal form.
    Parse {
        /// A file path or an expression.
        input: String,
    },
    /// List the moves of a position.
    Moves {
        expr: String,
        #[arg(long, default_value = "")]
        labels: String,
        #[arg(long, default_value_t = 0)]
        level: u64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Play one game and print the trace with measures.
    Play {
        expr: String,
        #[arg(long, default_value = "")]
        labels: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::First)]
        strategy: StrategyArg,
        #[arg(long, env = "HYDRA_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = crate::game::DEFAULT_STEP_BUDGET)]
        budget: usize,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Print the length of the longest play.
    Height {
        expr: String,
        #[arg(long, default_value = "")]
        labels: String,
        #[arg(long, default_value_t = crate::game::DEFAULT_MAX_NODES)]
        budget: usize,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Expand the game tree breadth first.
    Tree {
        expr: String,
        #[arg(long, default_value = "")]
        labels: String,
        #[arg(long, default_value_t = crate::game::DEFAULT_MAX_NODES)]
        max_nodes: usize,
        /// Write Graphviz output here.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Run the decrease checks over random hydras.
    Verify {
        #[arg(long, default_value_t = 500)]
        hydras: usize,
        #[arg(long, default_value_t = 10)]
        max_size: usize,
        /// Inclusive range `a..b`, or a single level.
        #[arg(long, default_value = "0..4", value_parser = parse_levels)]
        levels: (u64, u64),
        #[arg(long, env = "HYDRA_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads; all cores when unset.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        json: bool,
        /// Corrupt every move before checking (negative control).
        #[arg(long, value_enum, default_value_t = MutationArg::None, hide = true)]
        mutation: MutationArg,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        cors_origin: Option<String>,
        #[command(flatten)]
        rules: RuleArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    First,
    Random,
    Maxdrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    None,
    AppendUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BraceDArg {
    Extended,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnfoldArg {
    NaturalSum,
    Member,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ContextArg {
    Dominated,
    Unrestricted,
}

#[derive(Debug, Clone, Copy, Args)]
struct RuleArgs {
    /// Label set of the brace rule under `D`.
    #[arg(long, value_enum, default_value_t = BraceDArg::Extended)]
    brace_d: BraceDArg,
    #[arg(long, value_enum, default_value_t = UnfoldArg::NaturalSum)]
    unfold_guard: UnfoldArg,
    #[arg(long, value_enum, default_value_t = ContextArg::Dominated)]
    context_guard: ContextArg,
}

impl RuleArgs {
    fn config(self) -> MoveConfig {
        MoveConfig {
            brace_d: match self.brace_d {
                BraceDArg::Extended => BraceDVariant::Extended,
                BraceDArg::Plain => BraceDVariant::Plain,
            },
            unfold_guard: match self.unfold_guard {
                UnfoldArg::NaturalSum => UnfoldGuard::NaturalSum,
                UnfoldArg::Member => UnfoldGuard::Member,
            },
            context_guard: match self.context_guard {
                ContextArg::Dominated => ContextGuard::Dominated,
                ContextArg::Unrestricted => ContextGuard::Unrestricted,
            },
            ..MoveConfig::default()
        }
    }
}

fn parse_levels(s: &str) -> Result<(u64, u64), String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad level `{t}`: {e}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if a > b {
        return Err(format!("empty level range {a}..{b}"));
    }
    Ok((a, b))
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Game(#[from] GameError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Server(#[from] server::ApiError),
    #[error("{0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
    #[error("property suite failed")]
    SuiteFailed,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            _ => 1,
        }
    }
}

fn position(expr: &str, labels: &str) -> Result<(Hydra, LabelSet), CliError> {
    Ok((parse_hydra(expr)?, parse_labels(labels)?))
}

fn json_line(out: &mut dyn Write, doc: &serde_json::Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(doc).expect("documents serialize"))?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::SuiteFailed) {
                let _ = writeln!(err, "error: {e}");
            }
            e.code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Parse { input } => {
            let path = PathBuf::from(&input);
            let text = if path.is_file() {
                std::fs::read_to_string(&path)?
            } else {
                input
            };
            writeln!(out, "{}", parse_hydra(&text)?)?;
        }
        Command::Moves {
            expr,
            labels,
            level,
            json,
            rules,
        } => {
            let (h, lb) = position(&expr, &labels)?;
            let list = MoveList::new(&h, &lb, level, rules.config())?;
            if json {
                json_line(out, &list.to_document())?;
            } else {
                for (i, m) in list.moves.iter().enumerate() {
                    let rule = if m.rule == m.redex {
                        m.rule.name().to_string()
                    } else {
                        format!("{}/{}", m.rule.name(), m.redex.name())
                    };
                    write!(out, "{i}: {rule} -> {}", m.result_hydra)?;
                    if let Some(a) = &m.produced {
                        write!(out, "  +label {a}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Command::Play {
            expr,
            labels,
            strategy,
            seed,
            budget,
            json,
            csv,
            rules,
        } => {
            let (h, lb) = position(&expr, &labels)?;
            let strategy = match strategy {
                StrategyArg::First => Strategy::First,
                StrategyArg::Random => Strategy::Random { seed },
                StrategyArg::Maxdrop => Strategy::MaxMeasureDrop,
            };
            let trace = play(&h, &lb, strategy, budget, rules.config())?;
            if json {
                json_line(out, &trace.to_document())?;
            } else if csv {
                write!(out, "{}", trace.to_csv())?;
            } else {
                for (i, s) in trace.steps.iter().enumerate() {
                    let rule = s.rule.map(|r| r.name()).unwrap_or("start");
                    writeln!(out, "{i}\t{rule}\t{}\t{{{}}}\t{}", s.hydra, s.labels, s.measure)?;
                }
                if trace.budget_exhausted {
                    writeln!(out, "budget exhausted after {} steps", trace.len())?;
                } else {
                    writeln!(out, "hydra died after {} steps", trace.len())?;
                }
            }
        }
        Command::Height {
            expr,
            labels,
            budget,
            rules,
        } => {
            let (h, lb) = position(&expr, &labels)?;
            writeln!(out, "{}", game_height(&h, &lb, budget, rules.config())?)?;
        }
        Command::Tree {
            expr,
            labels,
            max_nodes,
            dot,
            json,
            rules,
        } => {
            let (h, lb) = position(&expr, &labels)?;
            let tree = build_tree(&h, &lb, max_nodes, rules.config())?;
            if let Some(path) = dot {
                std::fs::write(path, tree.to_dot())?;
            }
            if json {
                json_line(out, &tree.to_document())?;
            } else {
                writeln!(
                    out,
                    "nodes {}  height {}  truncated {}",
                    tree.nodes.len(),
                    tree.height(),
                    tree.truncated
                )?;
            }
        }
        Command::Verify {
            hydras,
            max_size,
            levels,
            seed,
            jobs,
            json,
            mutation,
            rules,
        } => {
            let config = SuiteConfig {
                num_hydras: hydras,
                max_size,
                min_level: levels.0,
                max_level: levels.1,
                seed,
                moves: rules.config(),
                mutation: match mutation {
                    MutationArg::None => Mutation::None,
                    MutationArg::AppendUnit => Mutation::AppendUnit,
                },
                ..SuiteConfig::default()
            };
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                pool = pool.num_threads(j);
            }
            let report = pool.build()?.install(|| run_property_suite(&config));
            if json {
                json_line(out, &report.to_document())?;
            } else {
                write!(out, "{}", report.summary())?;
            }
            if !report.passed() {
                return Err(CliError::SuiteFailed);
            }
        }
        Command::Serve {
            port,
            host,
            data_dir,
            cors_origin,
            rules,
        } => {
            let config = ServerConfig {
                moves: rules.config(),
                data_dir,
                cors_origin,
            };
            let addr = SocketAddr::new(host, port);
            writeln!(out, "listening on http://{addr}")?;
            out.flush()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(addr, config))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("hydra").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn levels_syntax() {
        assert_eq!(parse_levels("0..4"), Ok((0, 4)));
        assert_eq!(parse_levels("1..=3"), Ok((1, 3)));
        assert_eq!(parse_levels("2"), Ok((2, 2)));
        assert!(parse_levels("4..1").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn height_command() {
        assert_eq!(run_str(&["height", "0"]).1, "Exact 0\n");
        assert_eq!(run_str(&["height", "1+1"]).1, "Exact 2\n");
    }

    #[test]
    fn moves_of_one() {
        let (code, out, _) = run_str(&["moves", "1", "--level", "0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0: Necrosis -> 0\n");
    }

    #[test]
    fn usage_and_parse_errors_exit_2() {
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        let (code, _, err) = run_str(&["parse", "1+"]);
        assert_eq!(code, 2);
        assert!(err.contains("line 1"));
    }

    #[test]
    fn parse_prints_normal_form() {
        assert_eq!(run_str(&["parse", " 1 + w( 0 ) "]).1, "1+w(0)\n");
    }
}
