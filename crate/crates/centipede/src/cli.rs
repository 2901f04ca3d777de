//! The `centipede` command line.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use centipede_core::estimate::{fit, Params, Problem, SearchConfig};
use centipede_core::predict::{default_grid, supnorm, terminal_distribution, Model, ScanSetup};
use centipede_core::simulate::{simulate, SimConfig};
use centipede_core::solvers::{SolutionKind, TieRule};
use centipede_core::stats::matched_terminal_nodes;
use centipede_core::{CentipedeGame, ElicitationForm, Family, GameSpec, Rescale, SolverConfig};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::batch::{parse_tests, run_tests};
use crate::dataset::{read_dataset, write_dataset};
use crate::error::{read_file, write_output, AppError, AppResult};
use crate::games::{games_json, load_games, registry_game, GameSpecJson};
use crate::parallel;
use crate::report::{cdf_csv, scan_csv, solution_json, test_rows_json};

#[derive(Debug, Parser)]
#[command(name = "centipede", version, about = "Solve, scan, fit, simulate and test centipede-game models")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only report errors on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Write diagnostics as JSON lines.
    #[arg(long, global = true)]
    pub json_logs: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a game's payoff table or its JSON spec.
    Game(GameArgs),
    /// Solve one game under one form and write the solution JSON.
    Solve(SolveArgs),
    /// Sup-norm between two forms' predictions over a grid of c values.
    Scan(ScanArgs),
    /// Predicted terminal-node CDFs of two forms for one game.
    Cdf(CdfArgs),
    /// Maximum-likelihood fit with optional bootstrap standard errors.
    Fit(FitArgs),
    /// Generate a dataset from a simulation config.
    Simulate(SimulateArgs),
    /// Rank and KS tests on the matched terminal-node panel of a dataset.
    Test(TestArgs),
}

#[derive(Debug, Args)]
pub struct GameSel {
    /// Registry game (`linear-0.5`, `exp-4-lab`, ...) instead of a family.
    #[arg(long, conflicts_with_all = ["family", "game_json"])]
    pub game: Option<String>,
    /// Game spec JSON file.
    #[arg(long, conflicts_with = "family")]
    pub game_json: Option<PathBuf>,
    /// Payoff family: `linear`, `exponential` or `constant`.
    #[arg(long)]
    pub family: Option<Family>,
    /// Family parameter c.
    #[arg(long)]
    pub c: Option<f64>,
    /// Exponential multiplier (default 2).
    #[arg(long)]
    pub pi: Option<f64>,
    /// Decision nodes 2D.
    #[arg(long, default_value_t = 6)]
    pub stages: usize,
    #[command(flatten)]
    pub scale: ScaleArgs,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Use the family's laboratory rescaling (points).
    #[arg(long, conflicts_with_all = ["scale", "shift"])]
    pub lab: bool,
    /// Payoff multiplier a in a*x + b.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Payoff shift b in a*x + b.
    #[arg(long)]
    pub shift: Option<f64>,
}

impl ScaleArgs {
    fn rescale(&self, family: Family) -> AppResult<Rescale> {
        if self.lab {
            return Ok(lab_rescale(family));
        }
        Ok(Rescale::new(self.scale.unwrap_or(1.0), self.shift.unwrap_or(0.0))?)
    }
}

fn lab_rescale(family: Family) -> Rescale {
    let spec = match family {
        Family::Linear => GameSpec::linear(0.5, 6),
        Family::Exponential => GameSpec::exponential(4.0, 2.0, 6),
        Family::Constant => GameSpec::constant(0.5, 6),
        Family::Custom => return Rescale::IDENTITY,
    };
    spec.with_lab_rescale().rescale
}

impl GameSel {
    fn build(&self) -> AppResult<CentipedeGame> {
        if let Some(id) = &self.game {
            return registry_game(id);
        }
        if let Some(path) = &self.game_json {
            let spec: GameSpecJson = serde_json::from_str(&read_file(path)?)?;
            return spec.build().map_err(|e| e.context(path.display()));
        }
        let family = self.family.ok_or_else(|| AppError::validation("give --game, --game-json or --family"))?;
        let c = self.c.ok_or_else(|| AppError::validation("--family needs --c"))?;
        let spec = match family {
            Family::Linear => GameSpec::linear(c, self.stages),
            Family::Constant => GameSpec::constant(c, self.stages),
            Family::Exponential => GameSpec::exponential(c, self.pi.unwrap_or(GameSpec::DEFAULT_PI), self.stages),
            Family::Custom => return Err(AppError::validation("custom games are read with --game-json")),
        };
        Ok(CentipedeGame::new(spec.with_rescale(self.scale.rescale(family)?))?)
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model: `dch`, `qdch` or `aqre`.
    #[arg(long)]
    pub model: SolutionKind,
    /// Poisson mean of the level distribution (DCH, QDCH).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Logit precision (QDCH, AQRE), in final payoff units.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Highest level.
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
}

impl ModelArgs {
    fn model(&self) -> AppResult<Model> {
        Ok(Params { tau: self.tau, lambda: self.lambda }.model(self.model, self.kmax)?)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Tie rule for exact indifference: `later` or `uniform`.
    #[arg(long, default_value = "later")]
    pub ties: TieRule,
    /// Corrector iteration budget per homotopy step.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Total homotopy step budget.
    #[arg(long)]
    pub max_steps: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> AppResult<SolverConfig> {
        let mut cfg = SolverConfig { tie_rule: self.ties, ..SolverConfig::default() };
        if let Some(n) = self.max_iter {
            cfg.max_iterations = n;
        }
        if let Some(n) = self.max_steps {
            cfg.max_steps = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Two forms written `a-b`, e.g. `rs-dr`.
#[derive(Debug, Clone, Copy)]
pub struct Pair(pub [ElicitationForm; 2]);

impl FromStr for Pair {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        let (a, b) = s.split_once('-').ok_or_else(|| AppError::validation(format!("pair '{s}' is not of the form rs-dr")))?;
        let pair = [a.parse::<ElicitationForm>()?, b.parse::<ElicitationForm>()?];
        if pair[0] == pair[1] {
            return Err(AppError::validation("a pair needs two different forms"));
        }
        Ok(Pair(pair))
    }
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[command(flatten)]
    pub game: GameSel,
    /// Print the JSON spec instead of the payoff table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameSel,
    /// Elicitation form: `dr`, `rs` or `fs`.
    #[arg(long)]
    pub form: ElicitationForm,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Payoff family: `linear`, `exponential` or `constant`.
    #[arg(long)]
    pub family: Family,
    /// Exponential multiplier (default 2).
    #[arg(long)]
    pub pi: Option<f64>,
    /// Decision nodes 2D.
    #[arg(long, default_value_t = 6)]
    pub stages: usize,
    #[command(flatten)]
    pub scale: ScaleArgs,
    /// Grid start (default: the family's standard range).
    #[arg(long, requires = "c_max")]
    pub c_min: Option<f64>,
    /// Grid end, inclusive.
    #[arg(long, requires = "c_min")]
    pub c_max: Option<f64>,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Forms to compare: `rs-dr`, `rs-fs` or `fs-dr`.
    #[arg(long, default_value = "rs-dr")]
    pub pair: Pair,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub game: GameSel,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Forms to compare: `rs-dr`, `rs-fs` or `fs-dr`.
    #[arg(long, default_value = "rs-dr")]
    pub pair: Pair,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Games JSON (default: the built-in registry).
    #[arg(long)]
    pub games: Option<PathBuf>,
    /// Model: `dch`, `qdch` or `aqre`.
    #[arg(long)]
    pub model: SolutionKind,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    /// Bootstrap replicates (0 for none).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower end of the tau search box.
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Upper end of the tau search box.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Lower end of the lambda search box.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Upper end of the lambda search box.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subject levels CSV.
    #[arg(long)]
    pub levels_out: Option<PathBuf>,
    /// Games JSON for later `fit --games` and `test --games`.
    #[arg(long)]
    pub games_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub games: Option<PathBuf>,
    /// Comma-separated list of friedman, signedrank, ranksum, ks.
    #[arg(long, default_value = "friedman,signedrank,ranksum,ks")]
    pub tests: String,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A game in a simulation config: a registry id or `{id, spec}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Id(String),
    Spec { id: String, spec: GameSpecJson },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub kind: SolutionKind,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_kmax")]
    pub k_max: usize,
}

fn default_kmax() -> usize {
    10
}

fn default_forms() -> Vec<String> {
    ElicitationForm::ALL.iter().map(|f| f.code().to_string()).collect()
}

fn default_true() -> bool {
    true
}

fn default_session() -> String {
    "sim".into()
}

/// Simulation config JSON.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigJson {
    pub games: Vec<GameRef>,
    #[serde(default = "default_forms")]
    pub forms: Vec<String>,
    pub model: ModelJson,
    pub subjects_per_role: usize,
    #[serde(default = "default_true")]
    pub round_robin: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_session")]
    pub session_id: String,
    #[serde(default)]
    pub ties: TieRule,
}

impl SimConfigJson {
    pub fn to_config(&self) -> AppResult<SimConfig> {
        let games = self
            .games
            .iter()
            .map(|g| match g {
                GameRef::Id(id) => Ok((id.clone(), registry_game(id)?)),
                GameRef::Spec { id, spec } => Ok((id.clone(), spec.build().map_err(|e| e.context(format!("game '{id}'")))?)),
            })
            .collect::<AppResult<Vec<_>>>()?;
        let forms = self.forms.iter().map(|f| f.parse()).collect::<Result<Vec<ElicitationForm>, _>>()?;
        let params = Params { tau: self.model.tau, lambda: self.model.lambda };
        let mut cfg = SimConfig::new(games, forms, params.model(self.model.kind, self.model.k_max)?, self.subjects_per_role, self.seed);
        cfg.round_robin = self.round_robin;
        cfg.session_id = self.session_id.clone();
        cfg.solver.tie_rule = self.ties;
        Ok(cfg)
    }
}

fn grid(args: &ScanArgs) -> AppResult<Vec<f64>> {
    let (lo, hi) = match (args.c_min, args.c_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let g = default_grid(args.family);
            if g.is_empty() {
                return Err(AppError::validation(format!("{} games have no default grid", args.family)));
            }
            return Ok(g);
        }
    };
    if !(args.step > 0.0 && args.step.is_finite() && lo.is_finite() && hi.is_finite()) {
        return Err(AppError::validation("grid bounds and --step must be finite with step > 0"));
    }
    if hi < lo {
        return Err(AppError::validation(format!("empty grid: --c-max {hi} is below --c-min {lo}")));
    }
    if args.step > hi - lo + 1e-12 {
        return Err(AppError::validation(format!("--step {} is larger than the range [{lo}, {hi}]", args.step)));
    }
    let n = ((hi - lo) / args.step + 1e-9).floor() as usize;
    // rounding keeps grid values free of accumulated binary noise
    Ok((0..=n).map(|i| ((lo + i as f64 * args.step) * 1e12).round() / 1e12).collect())
}

fn cmd_game(args: &GameArgs) -> AppResult<()> {
    let game = args.game.build()?;
    let text = if args.json {
        serde_json::to_string_pretty(&GameSpecJson::from(game.spec()))? + "\n"
    } else {
        game.to_string()
    };
    write_output(None, text.as_bytes())
}

fn cmd_solve(args: &SolveArgs) -> AppResult<()> {
    let game = args.game.build()?;
    let model = args.model.model()?;
    let cfg = args.solver.config()?;
    let solution = model.solve(&game, args.form, &cfg)?;
    let terminal = terminal_distribution(&game, args.form, &solution, model.prior())?;
    if let Some(r) = solution.residual {
        log::info!("{} solved with residual {r:e} in {} homotopy steps", model.kind(), solution.homotopy.len());
    }
    let text = solution_json(&game, &solution, model.prior(), cfg.tie_rule, &terminal)?;
    write_output(args.out.as_deref(), text.as_bytes())
}

fn cmd_scan(args: &ScanArgs, threads: Option<usize>) -> AppResult<()> {
    let grid = grid(args)?;
    let setup = ScanSetup {
        family: args.family,
        pi: args.pi,
        stages: args.stages,
        rescale: args.scale.rescale(args.family)?,
        model: args.model.model()?,
        forms: args.pair.0,
    };
    let cfg = args.solver.config()?;
    let scan = parallel::with_threads(threads, || parallel::design_scan(setup, &grid, &cfg))??;
    let failed = scan.points.iter().filter(|p| p.supnorm.is_none()).count();
    if failed > 0 {
        log::warn!("{failed} of {} grid points failed; see the status column", scan.points.len());
    }
    write_output(args.out.as_deref(), &scan_csv(&scan)?)
}

fn cmd_cdf(args: &CdfArgs) -> AppResult<()> {
    let game = args.game.build()?;
    let model = args.model.model()?;
    let cfg = args.solver.config()?;
    let [a, b] = args.pair.0;
    let (da, db) = (model.predict(&game, a, &cfg)?, model.predict(&game, b, &cfg)?);
    log::info!("sup-norm {a} vs {b}: {}", supnorm(&da, &db)?);
    write_output(args.out.as_deref(), &cdf_csv(&da, &db)?)
}

fn cmd_fit(args: &FitArgs, threads: Option<usize>) -> AppResult<()> {
    let games = load_games(args.games.as_deref())?;
    let data = read_dataset(&args.data, &games)?;
    let cfg = args.solver.config()?;
    let mut search = SearchConfig::default();
    search.tau_bounds = (args.tau_min.unwrap_or(search.tau_bounds.0), args.tau_max.unwrap_or(search.tau_bounds.1));
    search.lambda_bounds =
        (args.lambda_min.unwrap_or(search.lambda_bounds.0), args.lambda_max.unwrap_or(search.lambda_bounds.1));
    let problem = Problem::new(args.model, &data, args.kmax, &cfg)?;
    let mut result = fit(&problem, &search)?;
    log::info!("{} fit: log-likelihood {} over {} observations", args.model, result.log_likelihood, result.n_obs);
    if result.at_boundary {
        log::warn!("an estimate is at the edge of the search box");
    }
    if args.bootstrap > 0 {
        let boot = parallel::with_threads(threads, || {
            parallel::bootstrap_se(&problem, &result, &search, args.bootstrap, args.seed)
        })??;
        if boot.failed > 0 {
            log::warn!("{} of {} bootstrap replicates failed", boot.failed, boot.replicates);
        }
        result.bootstrap = Some(boot);
    }
    let text = serde_json::to_string_pretty(&result)? + "\n";
    write_output(args.out.as_deref(), text.as_bytes())
}

fn cmd_simulate(args: &SimulateArgs) -> AppResult<()> {
    let json: SimConfigJson =
        serde_json::from_str(&read_file(&args.config)?).map_err(|e| AppError::from(e).context(args.config.display()))?;
    let mut cfg = json.to_config()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let sim = simulate(&cfg)?;
    log::info!("simulated {} rows for {} subjects", sim.data.len(), sim.levels.len());
    if let Some(path) = &args.levels_out {
        let mut text = String::from("subject_id,level\n");
        for (id, level) in &sim.levels {
            text.push_str(&format!("{id},{}\n", level.map_or(String::new(), |k| k.to_string())));
        }
        write_output(Some(path), text.as_bytes())?;
    }
    if let Some(path) = &args.games_out {
        write_output(Some(path), games_json(&sim.data.games)?.as_bytes())?;
    }
    write_output(args.out.as_deref(), &write_dataset(&sim.data)?)
}

fn cmd_test(args: &TestArgs) -> AppResult<()> {
    let tests = parse_tests(&args.tests)?;
    let games = load_games(args.games.as_deref())?;
    let data = read_dataset(&args.data, &games)?;
    let panel = matched_terminal_nodes(&data)?;
    if panel.skipped > 0 {
        log::warn!("{} pair-games lack some form and were skipped", panel.skipped);
    }
    if panel.rows.is_empty() {
        return Err(AppError::validation("no pair-game is observed under all three forms"));
    }
    let rows = run_tests(&panel, &tests)?;
    write_output(args.out.as_deref(), test_rows_json(&rows)?.as_bytes())
}

pub fn run(cli: &Cli) -> AppResult<()> {
    match &cli.command {
        Command::Game(a) => cmd_game(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Scan(a) => cmd_scan(a, cli.threads),
        Command::Cdf(a) => cmd_cdf(a),
        Command::Fit(a) => cmd_fit(a, cli.threads),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Test(a) => cmd_test(a),
    }
}

fn init_logging(quiet: bool, json: bool) {
    let mut builder = env_logger::Builder::new();
    builder.filter_level(if quiet { log::LevelFilter::Error } else { log::LevelFilter::Info });
    builder.target(env_logger::Target::Stderr);
    if json {
        builder.format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().as_str().to_ascii_lowercase(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    } else {
        builder.format(|buf, record| writeln!(buf, "{}: {}", record.level().as_str().to_ascii_lowercase(), record.args()));
    }
    let _ = builder.try_init();
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.quiet, cli.json_logs);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
