//! Designer and developer experiments over synthetic game triads.
//!
//! A designer experiment searches against the goal game's level-design
//! projection and is then scored against its withheld rules projection; a
//! developer experiment does the reverse. Every method sees only the train
//! projection.

mod fixture;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{blend_search, ga_search, knn_select, BaselineError, DEFAULT_GENERATIONS};
use crate::distance::{Chamfer, Heuristic};
use crate::expansion::{
    hill_climb, map_expansion, ClimbConfig, ExpansionError, KnowledgeBase, MoveSet, DEFAULT_MAX_STEPS,
    DEFAULT_NEIGHBORS, DEFAULT_PARTS,
};
use crate::graph::{load_file, GameGraph, GoalScope, GraphError, PartialGoal};

pub use fixture::{generate_fixture, generate_triad, FixtureParams, Triad};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "EXPANSION_FORGE_THREADS";
pub const DEFAULT_SEED_COUNT: u64 = 10;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("experiment is in {actual:?} mode, expected {expected:?}")]
    ModeMismatch { expected: Mode, actual: Mode },
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Train on level design, test on rules.
    #[serde(alias = "designer")]
    Designer,
    /// Train on rules, test on level design.
    #[serde(alias = "developer")]
    Developer,
}

impl Mode {
    pub fn train_scope(self) -> GoalScope {
        match self {
            Mode::Designer => GoalScope::DesignOnly,
            Mode::Developer => GoalScope::RulesOnly,
        }
    }

    pub fn test_scope(self) -> GoalScope {
        match self {
            Mode::Designer => GoalScope::RulesOnly,
            Mode::Developer => GoalScope::DesignOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(alias = "expansion")]
    Expansion,
    #[serde(alias = "blend")]
    Blend,
    #[serde(rename = "KNN", alias = "knn")]
    Knn,
    #[serde(rename = "GA", alias = "ga")]
    Ga,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Expansion, Method::Blend, Method::Knn, Method::Ga];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Expansion => "Expansion",
            Method::Blend => "Blend",
            Method::Knn => "KNN",
            Method::Ga => "GA",
        }
    }
}

/// Search budgets shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SearchSettings {
    pub parts: usize,
    pub neighbors: usize,
    pub max_steps: usize,
    pub max_generations: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            parts: DEFAULT_PARTS,
            neighbors: DEFAULT_NEIGHBORS,
            max_steps: DEFAULT_MAX_STEPS,
            max_generations: DEFAULT_GENERATIONS,
        }
    }
}

impl SearchSettings {
    pub fn climb(&self, moves: MoveSet) -> ClimbConfig {
        ClimbConfig {
            neighbors_per_step: self.neighbors,
            max_steps: self.max_steps,
            moves,
        }
    }
}

/// The graph a method produced and how many search steps it took.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub graph: GameGraph,
    pub steps: usize,
}

/// Runs one method against `goal` with a generator seeded from `seed`.
pub fn run_method(
    method: Method,
    kb: &[GameGraph],
    goal: &PartialGoal,
    h: &dyn Heuristic,
    settings: &SearchSettings,
    seed: u64,
) -> Result<MethodResult, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = match method {
        Method::Expansion => {
            let kb = Arc::new(KnowledgeBase::new(kb.to_vec())?);
            let start = map_expansion(goal, kb, h, settings.parts)?;
            let out = hill_climb(start, goal, h, &settings.climb(MoveSet::Continuous), &mut rng);
            MethodResult {
                steps: out.steps(),
                graph: out.graph,
            }
        }
        Method::Blend => {
            let kb = Arc::new(KnowledgeBase::new(kb.to_vec())?);
            let out = blend_search(goal, kb, h, settings.parts, &settings.climb(MoveSet::Binary), &mut rng)?;
            MethodResult {
                steps: out.steps(),
                graph: out.graph,
            }
        }
        Method::Knn => MethodResult {
            graph: knn_select(kb, goal, h)?.clone(),
            steps: 0,
        },
        Method::Ga => {
            let out = ga_search(kb, goal, h, settings.max_generations, &mut rng)?;
            MethodResult {
                steps: out.generations(),
                graph: out.best.graph,
            }
        }
    };
    Ok(result)
}

/// Keeps only the edges admitted by `scope`. All nodes are kept.
pub fn project(graph: &GameGraph, scope: GoalScope) -> PartialGoal {
    let kept = graph.filter_edges(|e| scope.admits(e.edge.kind()));
    PartialGoal::new(kept, scope).expect("filtered edges fit the scope")
}

/// One experiment, with its graphs loaded.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kb: Vec<GameGraph>,
    pub goal: GameGraph,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub settings: SearchSettings,
}

impl ExperimentSpec {
    /// Checks the goal is not named like a knowledge-base graph and that
    /// there is something to run.
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.kb.is_empty() {
            return Err(HarnessError::Config("knowledge base is empty".into()));
        }
        if let Some(g) = self.kb.iter().find(|g| g.name() == self.goal.name()) {
            return Err(HarnessError::Config(format!(
                "goal game `{}` is also in the knowledge base",
                g.name()
            )));
        }
        if self.seeds.is_empty() || self.methods.is_empty() {
            return Err(HarnessError::Config("no seeds or no methods".into()));
        }
        Ok(())
    }

    /// Goal content duplicated in the knowledge base under another name.
    pub fn is_degenerate(&self) -> bool {
        self.kb.iter().any(|g| g.same_structure(&self.goal))
    }
}

/// On-disk experiment description. Relative paths resolve against the
/// config file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kb: Vec<PathBuf>,
    pub goal: PathBuf,
    pub mode: Mode,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub settings: SearchSettings,
}

fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEED_COUNT).collect()
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl ExperimentConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigRead {
            path: path.to_owned(),
            source,
        })?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in config.kb.iter_mut().chain(std::iter::once(&mut config.goal)) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn load(&self) -> Result<ExperimentSpec, HarnessError> {
        let kb = self.kb.iter().map(load_file).collect::<Result<Vec<_>, _>>()?;
        let spec = ExperimentSpec {
            kb,
            goal: load_file(&self.goal)?,
            mode: self.mode,
            seeds: self.seeds.clone(),
            methods: self.methods.clone(),
            settings: self.settings,
        };
        spec.check()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub method: Method,
    pub seed: u64,
    pub mode: Mode,
    pub train_error: f64,
    pub test_error: f64,
    pub steps: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub mean_train_error: f64,
    pub mean_test_error: f64,
    pub mean_steps: f64,
    pub mean_wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportSummary {
    pub mode: Mode,
    pub goal: String,
    /// The goal's content also sits in the knowledge base, so a zero train
    /// error proves nothing.
    pub degenerate: bool,
    pub methods: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub goal: String,
    pub degenerate: bool,
    /// One row per (method, seed), methods in spec order, then seeds.
    pub rows: Vec<ReportRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl ExperimentReport {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn mean_train(&self, method: Method) -> f64 {
        mean(self.rows_for(method).map(|r| r.train_error))
    }

    pub fn mean_test(&self, method: Method) -> f64 {
        mean(self.rows_for(method).map(|r| r.test_error))
    }

    pub fn summary(&self) -> ReportSummary {
        let mut methods: Vec<Method> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        ReportSummary {
            mode: self.mode,
            goal: self.goal.clone(),
            degenerate: self.degenerate,
            methods: methods
                .into_iter()
                .map(|m| MethodSummary {
                    method: m,
                    runs: self.rows_for(m).count(),
                    mean_train_error: self.mean_train(m),
                    mean_test_error: self.mean_test(m),
                    mean_steps: mean(self.rows_for(m).map(|r| r.steps as f64)),
                    mean_wall_time_ms: mean(self.rows_for(m).map(|r| r.wall_time_ms as f64)),
                })
                .collect(),
        }
    }

    pub fn write_csv(&self, sink: impl Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(sink);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }
}

/// Worker pool honoring [`THREADS_ENV`]; unset or unparsable means rayon's
/// default.
pub fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| HarnessError::Threads(e.to_string()))
}

/// Runs every (method, seed) cell of `spec` in its own mode.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    spec.check()?;
    let h = Chamfer;
    let train = project(&spec.goal, spec.mode.train_scope());
    let test = project(&spec.goal, spec.mode.test_scope());
    let cells: Vec<(Method, u64)> = spec
        .methods
        .iter()
        .flat_map(|&m| spec.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let rows = thread_pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(method, seed)| {
                let started = Instant::now();
                // Only the train projection reaches the method.
                let result = run_method(method, &spec.kb, &train, &h, &spec.settings, seed)?;
                let wall_time_ms = started.elapsed().as_millis() as u64;
                Ok(ReportRow {
                    method,
                    seed,
                    mode: spec.mode,
                    train_error: h.graph_distance(&train, &result.graph),
                    test_error: h.graph_distance(&test, &result.graph),
                    steps: result.steps,
                    wall_time_ms,
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;
    Ok(ExperimentReport {
        mode: spec.mode,
        goal: spec.goal.name().to_owned(),
        degenerate: spec.is_degenerate(),
        rows,
    })
}

fn run_in_mode(spec: &ExperimentSpec, expected: Mode) -> Result<ExperimentReport, HarnessError> {
    if spec.mode != expected {
        return Err(HarnessError::ModeMismatch {
            expected,
            actual: spec.mode,
        });
    }
    run_experiment(spec)
}

/// Searches against the goal's level design; tests against its rules.
pub fn run_designer(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    run_in_mode(spec, Mode::Designer)
}

/// Searches against the goal's rules; tests against its level design.
pub fn run_developer(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    run_in_mode(spec, Mode::Developer)
}
