//! Command-line front end. [`run`] does all the work so it can be driven from
//! tests with in-memory writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ceg::Ceg;
use crate::ci::{self, Cut};
use crate::coalesce::build_ceg;
use crate::event_tree::{validate_tree, EventTree, Flavour, StageId};
use crate::model_io::{export_dot, parse_model_bytes, SolveReport};
use crate::oracle::rollback;
use crate::solve::solve;
use crate::transform::{manipulate, parsimonize, Manipulation};

#[derive(Debug, Parser)]
#[command(name = "cegd", version, about = "Chain event graphs for decision problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct FlavourFlags {
    /// Build a Type 1 graph (edge utilities, single sink).
    #[arg(long)]
    type1: bool,
    /// Build a Type 2 graph (one terminal per utility value).
    #[arg(long)]
    type2: bool,
}

impl FlavourFlags {
    fn resolve(&self, tree: &EventTree) -> Flavour {
        if self.type1 {
            Flavour::Type1
        } else if self.type2 {
            Flavour::Type2
        } else {
            tree.flavour()
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct CiQuery {
    /// Statement from one position, by name.
    #[arg(long)]
    position: Option<String>,
    /// Statement from one stage (`s<N>`).
    #[arg(long)]
    stage: Option<String>,
    /// Statement from a cut: comma-separated position names or stage ids.
    #[arg(long, value_delimiter = ',')]
    cut: Option<Vec<String>>,
    /// Upstream variables irrelevant to a decision variable.
    #[arg(long)]
    decision: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file and report every problem found.
    Validate { file: PathBuf },
    /// Compute the maximum expected utility and an optimal strategy.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        flavour: FlavourFlags,
    },
    /// Reduce the graph to parsimonious form and write it as DOT.
    Parsimonize {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Force one outgoing edge of a position and prune the rest.
    Manipulate {
        file: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        choose: String,
        /// Print a solve report for the manipulated graph.
        #[arg(long)]
        solve: bool,
    },
    /// Print a conditional-independence statement.
    Ci {
        file: PathBuf,
        #[command(flatten)]
        query: CiQuery,
    },
    /// Write the tree or the graph as DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long, conflicts_with = "tree")]
        ceg: bool,
        #[arg(long)]
        tree: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Backward induction on the raw tree.
    Oracle { file: PathBuf },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load(path: &Path) -> Result<EventTree, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let doc = parse_model_bytes(&bytes)?;
    Ok(validate_tree(&doc)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

fn report(ceg: &Ceg) -> Result<String, Failure> {
    let (state, strategy) = solve(ceg)?;
    Ok(SolveReport::new(ceg, &state, &strategy).to_string())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let tree = load(&file)?;
            writeln!(
                out,
                "ok: {} nodes, {} edges, {} stages",
                tree.nodes().len(),
                tree.edges().len(),
                tree.stages().len()
            )?;
        }
        Command::Solve { file, flavour } => {
            let tree = load(&file)?;
            let ceg = build_ceg(&tree, flavour.resolve(&tree))?;
            write!(out, "{}", report(&ceg)?)?;
        }
        Command::Parsimonize { file, out: path } => {
            let tree = load(&file)?;
            let ceg = parsimonize(&build_ceg(&tree, tree.flavour())?)?;
            write_file(&path, &export_dot(&ceg))?;
            write!(out, "{ceg}")?;
        }
        Command::Manipulate {
            file,
            at,
            choose,
            solve,
        } => {
            let tree = load(&file)?;
            let ceg = build_ceg(&tree, tree.flavour())?;
            let m = Manipulation::by_name(&ceg, &at, &choose)?;
            let result = manipulate(&ceg, &m)?;
            if solve {
                write!(out, "{}", report(&result)?)?;
            } else {
                write!(out, "{result}")?;
            }
        }
        Command::Ci { file, query } => {
            let tree = load(&file)?;
            let levels = tree.levels();
            let ceg = build_ceg(&tree, tree.flavour())?;
            let text = if let Some(name) = query.position {
                let w = ceg
                    .find(&name)
                    .ok_or(ci::CiError::UnknownPosition(name))?;
                ci::statement_from_position(&ceg, w, levels)?.to_string()
            } else if let Some(stage) = query.stage {
                let s: StageId = stage
                    .parse()
                    .map_err(|_| ci::CiError::UnknownStage(stage.clone()))?;
                ci::statement_from_stage(&ceg, s, levels)?.to_string()
            } else if let Some(items) = query.cut {
                let cut = Cut::by_names(&ceg, &items)?;
                ci::statement_from_cut(&ceg, &cut, levels)?.to_string()
            } else if let Some(var) = query.decision {
                let irrelevant = ci::irrelevant_for_decision(&ceg, &var, levels)?;
                format!("irrelevant: {}", ci::format_variables(&irrelevant))
            } else {
                unreachable!("clap requires one query")
            };
            writeln!(out, "{text}")?;
        }
        Command::ExportDot {
            file,
            ceg: _,
            tree: as_tree,
            out: path,
        } => {
            let tree = load(&file)?;
            let text = if as_tree {
                export_dot(&tree)
            } else {
                export_dot(&build_ceg(&tree, tree.flavour())?)
            };
            write_file(&path, &text)?;
        }
        Command::Oracle { file } => {
            let tree = load(&file)?;
            writeln!(out, "rollback={}", rollback(&tree))?;
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 on success, 1 when the model or an operation fails, 2 on usage
/// errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
