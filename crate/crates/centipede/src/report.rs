//! Output formats: solution JSON, scan and CDF CSV, test-result rows.

use centipede_core::games::strategy_label;
use centipede_core::predict::{DesignScan, TerminalDistribution};
use centipede_core::solvers::{Profile, TieRule};
use centipede_core::{CentipedeGame, ElicitationForm, LevelPrior, Player, Solution};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{AppError, AppResult};
use crate::games::GameSpecJson;

fn csv_error(e: impl std::fmt::Display) -> AppError {
    AppError::validation(e.to_string())
}

/// One player's profile keyed by labels: own node numbers (take
/// probabilities) under direct response, strategy labels otherwise.
fn player_table(form: ElicitationForm, profile: &Profile, player: Player, depth: usize) -> AppResult<Value> {
    let mut table = Map::new();
    for (i, p) in profile.of(player).iter().enumerate() {
        let label = match form {
            ElicitationForm::DirectResponse => player.own_node(i + 1).to_string(),
            _ => strategy_label(form, i, depth)?,
        };
        table.insert(label, json!(p));
    }
    Ok(Value::Object(table))
}

fn profile_json(form: ElicitationForm, profile: &Profile, depth: usize) -> AppResult<Map<String, Value>> {
    let mut m = Map::new();
    for p in Player::BOTH {
        m.insert(format!("player_{}", p.role()), player_table(form, profile, p, depth)?);
    }
    Ok(m)
}

/// Solution JSON: the game, the model parameters, per-level tables (a single
/// level-free profile for AQRE) and the population terminal distribution.
pub fn solution_json(
    game: &CentipedeGame,
    solution: &Solution,
    prior: Option<&LevelPrior>,
    tie_rule: TieRule,
    terminal: &TerminalDistribution,
) -> AppResult<String> {
    let depth = solution.depth;
    let mut root = Map::new();
    root.insert("game".into(), serde_json::to_value(GameSpecJson::from(game.spec()))?);
    root.insert("payoffs".into(), json!(game.payoffs()));
    root.insert("form".into(), json!(solution.form.code()));
    root.insert("model".into(), json!(solution.kind.code()));
    root.insert(
        "probabilities".into(),
        json!(match solution.form {
            ElicitationForm::DirectResponse => "take probability at each own node, given it is reached",
            _ => "mixture over the strategy set",
        }),
    );
    if let Some(tau) = solution.tau {
        root.insert("tau".into(), json!(tau));
    }
    if let Some(lambda) = solution.lambda {
        root.insert("lambda".into(), json!(lambda));
    }
    if solution.is_level_free() {
        root.insert("residual".into(), json!(solution.residual));
        root.insert("homotopy_steps".into(), json!(solution.homotopy.len()));
        root.insert("profile".into(), Value::Object(profile_json(solution.form, &solution.levels[0], depth)?));
    } else {
        let prior = prior.ok_or_else(|| AppError::validation("level solutions need their prior"))?;
        root.insert("k_max".into(), json!(prior.k_max));
        root.insert("tie_rule".into(), json!(tie_rule.code()));
        root.insert("level_probs".into(), json!(prior.probs));
        let levels: AppResult<Vec<Value>> = solution
            .levels
            .iter()
            .enumerate()
            .map(|(k, profile)| {
                let mut m = Map::new();
                m.insert("level".into(), json!(k));
                m.extend(profile_json(solution.form, profile, depth)?);
                Ok(Value::Object(m))
            })
            .collect();
        root.insert("levels".into(), Value::Array(levels?));
    }
    root.insert("terminal_distribution".into(), json!(terminal.probs));
    Ok(serde_json::to_string_pretty(&Value::Object(root))? + "\n")
}

/// Scan CSV: `c,supnorm,status`; failed points leave `supnorm` empty.
pub fn scan_csv(scan: &DesignScan) -> AppResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["c", "supnorm", "status"]).map_err(csv_error)?;
    for p in &scan.points {
        let s = p.supnorm.map_or(String::new(), |v| v.to_string());
        w.write_record([p.c.to_string(), s, p.status.clone()]).map_err(csv_error)?;
    }
    w.into_inner().map_err(csv_error)
}

/// CDF CSV: `node,cdf_a,cdf_b`.
pub fn cdf_csv(a: &TerminalDistribution, b: &TerminalDistribution) -> AppResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "cdf_a", "cdf_b"]).map_err(csv_error)?;
    for (j, (x, y)) in a.cdf().iter().zip(b.cdf()).enumerate() {
        w.write_record([(j + 1).to_string(), x.to_string(), y.to_string()]).map_err(csv_error)?;
    }
    w.into_inner().map_err(csv_error)
}

/// One test result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRow {
    pub test: String,
    /// Game identifier, or `pooled`.
    pub game: String,
    /// Compared forms, e.g. `dr-rs`, or `dr-rs-fs` for Friedman.
    pub forms: String,
    pub statistic: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_adjusted: Option<f64>,
    pub n: usize,
    pub method: String,
    pub degenerate: bool,
}

pub fn test_rows_json(rows: &[TestRow]) -> AppResult<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}
