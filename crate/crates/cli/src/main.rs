use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expansion_forge::baselines::BaselineError;
use expansion_forge::distance::{graph_distance, Chamfer, Heuristic};
use expansion_forge::expansion::{hill_climb, map_expansion, ClimbConfig, ExpansionError, KnowledgeBase, MoveSet};
use expansion_forge::graph::{
    load_file, save_file, to_canonical_json, validate, GameGraph, GoalScope, GraphError, PartialGoal, Severity,
};
use expansion_forge::harness::{
    generate_fixture, project, run_experiment, run_method, ExperimentConfig, FixtureParams, HarnessError, Method,
    SearchSettings,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recombine game graphs into new games.
#[derive(Debug, Parser)]
#[command(name = "expansion-forge", version)]
struct Cli {
    /// More log output on standard error (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check game graph files; prints nothing when all are valid.
    Validate {
        /// Graph files to check.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the distance report from a goal graph to a candidate graph.
    Distance {
        /// Goal graph file.
        goal: PathBuf,
        /// Candidate graph file.
        candidate: PathBuf,
        /// Which edges of the goal to compare.
        #[arg(long, value_enum, default_value_t = Scope::Infer)]
        scope: Scope,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a new graph by conceptual expansion and hill-climbing.
    Expand {
        #[command(flatten)]
        search: SearchArgs,
        /// Maximum hill-climbing steps.
        #[arg(long, default_value_t = expansion_forge::expansion::DEFAULT_MAX_STEPS)]
        steps: usize,
        /// Write the heuristic trace as CSV (step, value; step 0 is the mapping).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the final expansion (parts and filters) as JSON.
        #[arg(long)]
        expansion: Option<PathBuf>,
    },
    /// Run a comparison method.
    Baseline {
        /// Method to run.
        #[arg(long, value_enum)]
        method: BaselineMethod,
        #[command(flatten)]
        search: SearchArgs,
        /// Maximum hill-climbing steps for blend.
        #[arg(long, default_value_t = expansion_forge::expansion::DEFAULT_MAX_STEPS)]
        steps: usize,
        /// Generation cap for ga.
        #[arg(long, default_value_t = expansion_forge::baselines::DEFAULT_GENERATIONS)]
        generations: usize,
    },
    /// Run a designer or developer experiment from a JSON config.
    Experiment {
        /// Experiment config; relative paths inside resolve against its directory.
        #[arg(long)]
        config: PathBuf,
        /// Per-run CSV report.
        #[arg(long)]
        out: PathBuf,
        /// JSON summary of per-method means.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Generate a synthetic game graph.
    Fixture {
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of nodes.
        #[arg(long, default_value_t = FixtureParams::default().node_count)]
        nodes: usize,
        /// Expected edges per fresh node.
        #[arg(long, default_value_t = FixtureParams::default().edge_density)]
        density: f64,
        /// Fraction of nodes copied from --base.
        #[arg(long, default_value_t = FixtureParams::default().shared_fraction)]
        shared: f64,
        /// Graph to copy shared nodes from.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Name of the generated graph.
        #[arg(long)]
        name: Option<String>,
        /// Write the graph here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Knowledge-base graph files; repeat the flag or list several.
    #[arg(long, required = true, num_args = 1..)]
    kb: Vec<PathBuf>,
    /// Goal graph file. Its scope (design only, rules only, full) is inferred from its edges.
    #[arg(long)]
    goal: PathBuf,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mapped parts per expanded node.
    #[arg(long, default_value_t = expansion_forge::expansion::DEFAULT_PARTS)]
    parts: usize,
    /// Neighbors sampled per hill-climbing step.
    #[arg(long, default_value_t = expansion_forge::expansion::DEFAULT_NEIGHBORS)]
    neighbors: usize,
    /// Write the resulting graph here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scope {
    /// Narrowest scope holding every goal edge.
    Infer,
    Full,
    /// Level-design edges only.
    Design,
    /// Rule edges only.
    Rules,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Knn,
    Blend,
    Ga,
}

#[derive(Debug)]
enum Failure {
    /// Unreadable or invalid input.
    Input(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ExpansionError> for Failure {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::EmptyKnowledgeBase | ExpansionError::DuplicateGraph(_) | ExpansionError::EmptyGoal => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Graph(g) => g.into(),
            HarnessError::Expansion(x) | HarnessError::Baseline(BaselineError::Expansion(x)) => x.into(),
            HarnessError::Baseline(_) | HarnessError::Config(_) | HarnessError::ConfigParse(_) => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_failure(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))
}

/// Writes `text` to `path`, or to standard output followed by a newline.
fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(io_failure(p)),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn emit_graph(graph: &GameGraph, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(save_file(graph, p)?),
        None => emit(&to_canonical_json(graph), None),
    }
}

fn load_kb(paths: &[PathBuf]) -> Result<Vec<GameGraph>, Failure> {
    Ok(paths.iter().map(load_file).collect::<Result<Vec<_>, _>>()?)
}

fn settings(search: &SearchArgs, steps: usize, generations: usize) -> SearchSettings {
    SearchSettings {
        parts: search.parts,
        neighbors: search.neighbors,
        max_steps: steps.max(1),
        max_generations: generations.max(1),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { files } => {
            let mut bad = Vec::new();
            for f in &files {
                let graph = match expansion_forge::graph::load_unchecked(
                    &fs::read(f).map_err(|e| Failure::Input(format!("cannot read {}: {e}", f.display())))?,
                ) {
                    Ok(g) => g,
                    Err(e) => {
                        eprintln!("{}: {e}", f.display());
                        bad.push(f);
                        continue;
                    }
                };
                for v in validate(&graph) {
                    eprintln!("{}: {v}", f.display());
                    if v.severity() == Severity::Error && !bad.contains(&f) {
                        bad.push(f);
                    }
                }
            }
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure::Input(format!("{} of {} files are invalid", bad.len(), files.len())))
            }
        }
        Command::Distance {
            goal,
            candidate,
            scope,
            out,
        } => {
            let goal = load_file(&goal)?;
            let goal = match scope {
                Scope::Infer => PartialGoal::infer(goal),
                Scope::Full => PartialGoal::full(goal),
                Scope::Design => project(&goal, GoalScope::DesignOnly),
                Scope::Rules => project(&goal, GoalScope::RulesOnly),
            };
            let candidate = load_file(&candidate)?;
            let report = graph_distance(&goal, &candidate).map_err(|e| Failure::Input(e.to_string()))?;
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            emit(&text, out.as_deref())
        }
        Command::Expand {
            search,
            steps,
            trace,
            expansion,
        } => {
            let kb = KnowledgeBase::new(load_kb(&search.kb)?)?;
            let goal = PartialGoal::infer(load_file(&search.goal)?);
            let start = map_expansion(&goal, kb.into(), &Chamfer, search.parts)?;
            let config = ClimbConfig {
                neighbors_per_step: search.neighbors,
                max_steps: steps.max(1),
                moves: MoveSet::Continuous,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
            let outcome = hill_climb(start, &goal, &Chamfer, &config, &mut rng);
            log::info!(
                "h = {:.6} after {} steps (mapping: {:.6})",
                outcome.final_value(),
                outcome.steps(),
                outcome.initial
            );
            if let Some(p) = &trace {
                let mut csv = String::from("step,value\n");
                for (i, v) in std::iter::once(outcome.initial).chain(outcome.trace.iter().copied()).enumerate() {
                    csv.push_str(&format!("{i},{v}\n"));
                }
                fs::write(p, csv).map_err(io_failure(p))?;
            }
            if let Some(p) = &expansion {
                fs::write(p, outcome.expansion.to_json()).map_err(io_failure(p))?;
            }
            emit_graph(&outcome.graph, search.out.as_deref())
        }
        Command::Baseline {
            method,
            search,
            steps,
            generations,
        } => {
            let kb = load_kb(&search.kb)?;
            let goal = PartialGoal::infer(load_file(&search.goal)?);
            let method = match method {
                BaselineMethod::Knn => Method::Knn,
                BaselineMethod::Blend => Method::Blend,
                BaselineMethod::Ga => Method::Ga,
            };
            let settings = settings(&search, steps, generations);
            let result = run_method(method, &kb, &goal, &Chamfer, &settings, search.seed)?;
            log::info!(
                "{}: h = {:.6} after {} steps",
                method.as_str(),
                Chamfer.graph_distance(&goal, &result.graph),
                result.steps
            );
            emit_graph(&result.graph, search.out.as_deref())
        }
        Command::Experiment { config, out, summary } => {
            let spec = ExperimentConfig::read(&config)?.load()?;
            let report = run_experiment(&spec)?;
            if report.degenerate {
                log::warn!("the goal game also sits in the knowledge base; train errors are not meaningful");
            }
            let file = fs::File::create(&out).map_err(io_failure(&out))?;
            report.write_csv(file)?;
            if let Some(p) = &summary {
                fs::write(p, report.summary_json()).map_err(io_failure(p))?;
            }
            Ok(())
        }
        Command::Fixture {
            seed,
            nodes,
            density,
            shared,
            base,
            name,
            out,
        } => {
            if nodes == 0 || !(0.0..=1.0).contains(&shared) || density.is_nan() || density < 0.0 {
                return Err(Failure::Input(
                    "--nodes must be at least 1, --shared within [0, 1], --density non-negative".into(),
                ));
            }
            let base = base.as_deref().map(load_file).transpose()?;
            let params = FixtureParams {
                node_count: nodes,
                edge_density: density,
                shared_fraction: shared,
            };
            let mut graph = generate_fixture(seed, &params, base.as_ref());
            if let Some(n) = name {
                graph = graph.with_name(n);
            }
            emit_graph(&graph, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
