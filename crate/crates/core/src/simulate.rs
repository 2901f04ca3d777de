//! Seeded Monte Carlo generator of choice data from a solved model.
//!
//! Each subject draws a level once from the model's prior and keeps it for
//! every game and form. In each (game, form) a subject then draws a plan from
//! its level's profile: a strategy under the strategy methods, a reduced
//! strategy (take node) under direct response, which is revealed only up to
//! the node where the path ends. Every subject has its own random stream, so
//! appending games or forms does not perturb earlier draws.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::estimate::{Dataset, Observation, Record};
use crate::games::{terminal_node, Action, CentipedeGame, ElicitationForm, Player, ReducedStrategy};
use crate::predict::{reduced_mixture, Model};
use crate::solvers::{Solution, SolverConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Games in play order, with their identifiers.
    pub games: Vec<(String, CentipedeGame)>,
    pub forms: Vec<ElicitationForm>,
    pub model: Model,
    pub subjects_per_role: usize,
    /// Round-robin matching: in game `g` Player 1 number `i` meets Player 2
    /// number `(i + g) mod n`, so no two subjects meet twice within a form.
    /// When off, the same pairs play every game.
    pub round_robin: bool,
    pub seed: u64,
    pub session_id: String,
    pub solver: SolverConfig,
}

impl SimConfig {
    pub fn new(games: Vec<(String, CentipedeGame)>, forms: Vec<ElicitationForm>, model: Model, subjects_per_role: usize, seed: u64) -> SimConfig {
        SimConfig {
            games,
            forms,
            model,
            subjects_per_role,
            round_robin: true,
            seed,
            session_id: String::from("sim"),
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.games.is_empty() || self.forms.is_empty() {
            return Err(invalid!("a simulation needs at least one game and one form"));
        }
        if self.subjects_per_role == 0 {
            return Err(invalid!("a simulation needs at least one subject per role"));
        }
        if self.round_robin && self.subjects_per_role < self.games.len() {
            return Err(invalid!(
                "round-robin matching needs at least {} subjects per role, got {}",
                self.games.len(),
                self.subjects_per_role
            ));
        }
        let mut ids: Vec<&str> = self.games.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.games.len() {
            return Err(invalid!("game identifiers must be distinct"));
        }
        let mut forms = self.forms.clone();
        forms.sort_by_key(|f| f.code());
        forms.dedup();
        if forms.len() != self.forms.len() {
            return Err(invalid!("forms must be distinct"));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulated {
    pub data: Dataset,
    /// Level of every subject; `None` under the level-free AQRE model.
    pub levels: BTreeMap<String, Option<usize>>,
}

/// Identifier of subject `i` (0-based) in `role`, zero-padded so that text
/// order is numeric order.
pub fn subject_id(role: Player, i: usize, n: usize) -> String {
    let width = digits(n);
    format!("p{}-{:0width$}", role.role(), i + 1)
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut v = n / 10;
    while v > 0 {
        d += 1;
        v /= 10;
    }
    d
}

/// The random stream of subject `index` (Player 1 subjects first).
fn subject_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Inverse-CDF draw from a probability vector.
fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the total: take the last positive entry
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

struct Subject {
    id: String,
    role: Player,
    level: Option<usize>,
    /// Plan per (game, form): strategy index, or reduced index under DR.
    plans: Vec<usize>,
}

/// Generates a dataset. Rows are ordered by subject, game, form and node.
pub fn simulate(cfg: &SimConfig) -> Result<Simulated> {
    cfg.validate()?;
    let n = cfg.subjects_per_role;
    let mut solutions: Vec<Solution> = Vec::with_capacity(cfg.games.len() * cfg.forms.len());
    for (_, game) in &cfg.games {
        for &form in &cfg.forms {
            solutions.push(cfg.model.solve(game, form, &cfg.solver)?);
        }
    }
    let prior = cfg.model.prior();
    let mut subjects: Vec<Subject> = Vec::with_capacity(2 * n);
    for (r, role) in Player::BOTH.into_iter().enumerate() {
        for i in 0..n {
            let mut rng = subject_rng(cfg.seed, r * n + i);
            let level = prior.map(|p| draw(&mut rng, &p.probs));
            let mut plans = Vec::with_capacity(solutions.len());
            for (s, (_, game)) in solutions.iter().zip(cfg.games.iter().flat_map(|g| cfg.forms.iter().map(move |_| g))) {
                let profile = s.level(level.unwrap_or(0)).of(role);
                let plan = match s.form {
                    ElicitationForm::DirectResponse => {
                        draw(&mut rng, &reduced_mixture(s.form, profile, game.depth())?)
                    }
                    _ => draw(&mut rng, profile),
                };
                plans.push(plan);
            }
            subjects.push(Subject { id: subject_id(role, i, n), role, level, plans });
        }
    }

    let width = digits(n);
    let mut observations = Vec::new();
    for (r, subject) in subjects.iter().enumerate() {
        let i = r % n;
        for (g, (game_id, game)) in cfg.games.iter().enumerate() {
            let shift = if cfg.round_robin { g } else { 0 };
            // index of the Player 1 in this pair and of the Player 2
            let (p1, p2) = match subject.role {
                Player::One => (i, (i + shift) % n),
                Player::Two => ((i + n - shift) % n, i),
            };
            let pair_id = format!("{game_id}-{:0width$}", p1 + 1);
            let depth = game.depth();
            for (f, &form) in cfg.forms.iter().enumerate() {
                let slot = g * cfg.forms.len() + f;
                let base = Observation {
                    session_id: cfg.session_id.clone(),
                    subject_id: subject.id.clone(),
                    pair_id: pair_id.clone(),
                    role: subject.role,
                    game_id: game_id.clone(),
                    form,
                    record: Record::Strategy(0),
                };
                if form != ElicitationForm::DirectResponse {
                    observations.push(Observation { record: Record::Strategy(subject.plans[slot]), ..base });
                    continue;
                }
                let s1 = ReducedStrategy::from_index(subjects[p1].plans[slot], depth)?;
                let s2 = ReducedStrategy::from_index(subjects[n + p2].plans[slot], depth)?;
                let end = terminal_node(s1, s2, depth);
                let last = end.min(game.stages());
                for node in (1..=last).filter(|&v| Player::mover(v) == subject.role) {
                    let action = if node == end { Action::Take } else { Action::Pass };
                    observations.push(Observation { record: Record::Node { node, action }, ..base.clone() });
                }
            }
        }
    }
    let games = cfg.games.iter().cloned().collect();
    let levels = subjects.iter().map(|s| (s.id.clone(), s.level)).collect();
    Ok(Simulated { data: Dataset::new(games, observations)?, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameSpec;
    use crate::levels::LevelPrior;
    use crate::predict::{supnorm, terminal_distribution, TerminalDistribution};
    use crate::stats::matched_terminal_nodes;

    fn lab_games() -> Vec<(String, CentipedeGame)> {
        [
            ("linear-0.5", GameSpec::linear(0.5, 6)),
            ("linear-0.8", GameSpec::linear(0.8, 6)),
            ("exp-2.5", GameSpec::exponential(2.5, 2.0, 6)),
            ("exp-4", GameSpec::exponential(4.0, 2.0, 6)),
            ("const-0.4", GameSpec::constant(0.4, 6)),
            ("const-0.8", GameSpec::constant(0.8, 6)),
        ]
        .into_iter()
        .map(|(id, s)| (String::from(id), CentipedeGame::new(s).unwrap()))
        .collect()
    }

    fn dch(tau: f64) -> Model {
        Model::Dch { prior: LevelPrior::poisson(tau, 10).unwrap() }
    }

    #[test]
    fn level_zero_is_uniform() {
        let games = lab_games()[..1].to_vec();
        let model = Model::Dch { prior: LevelPrior::level_zero() };
        let cfg = SimConfig::new(games, alloc::vec![ElicitationForm::ReducedStrategy], model, 5000, 3);
        let sim = simulate(&cfg).unwrap();
        let n = sim.data.len() as f64;
        assert_eq!(n, 10_000.0);
        let mut counts = [0.0; 4];
        for obs in &sim.data.observations {
            if let Record::Strategy(s) = obs.record {
                counts[s] += 1.0;
            }
        }
        let sd = (n * 0.25 * 0.75f64).sqrt();
        for c in counts {
            assert!((c - n / 4.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let forms = alloc::vec![ElicitationForm::DirectResponse, ElicitationForm::FullStrategy];
        let cfg = SimConfig::new(lab_games(), forms, dch(1.25), 12, 9);
        let a = simulate(&cfg).unwrap();
        assert_eq!(a, simulate(&cfg).unwrap());
        let other = simulate(&SimConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.data, other.data);
    }

    #[test]
    fn appending_games_keeps_earlier_draws() {
        let forms = alloc::vec![ElicitationForm::ReducedStrategy];
        let games = lab_games();
        let short = simulate(&SimConfig::new(games[..3].to_vec(), forms.clone(), dch(1.25), 8, 4)).unwrap();
        let long = simulate(&SimConfig::new(games, forms, dch(1.25), 8, 4)).unwrap();
        assert_eq!(short.levels, long.levels);
        let prefix: Vec<&Observation> = long.data.observations.iter().filter(|o| short.data.games.contains_key(&o.game_id)).collect();
        assert_eq!(prefix, short.data.observations.iter().collect::<Vec<_>>());
    }

    #[test]
    fn round_robin_never_repeats_opponents() {
        let forms = alloc::vec![ElicitationForm::ReducedStrategy];
        let sim = simulate(&SimConfig::new(lab_games(), forms, dch(1.25), 7, 1)).unwrap();
        let mut pairs: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        for o in &sim.data.observations {
            pairs.entry((o.game_id.clone(), o.pair_id.clone())).or_default().push(o.subject_id.clone());
        }
        let mut met: Vec<(String, String)> = pairs
            .into_values()
            .map(|mut v| {
                v.sort();
                assert_eq!(v.len(), 2);
                (v[0].clone(), v[1].clone())
            })
            .collect();
        let total = met.len();
        met.sort();
        met.dedup();
        assert_eq!(met.len(), total);
        assert!(simulate(&SimConfig::new(lab_games(), alloc::vec![ElicitationForm::ReducedStrategy], dch(1.0), 5, 1)).is_err());
    }

    #[test]
    fn levels_fixed_per_subject_and_matched_across_forms() {
        let forms = alloc::vec![
            ElicitationForm::DirectResponse,
            ElicitationForm::ReducedStrategy,
            ElicitationForm::FullStrategy
        ];
        let sim = simulate(&SimConfig::new(lab_games(), forms, dch(1.25), 10, 2)).unwrap();
        assert_eq!(sim.levels.len(), 20);
        let panel = matched_terminal_nodes(&sim.data).unwrap();
        assert_eq!(panel.rows.len(), 60);
        assert_eq!(panel.skipped, 0);
    }

    fn empirical_supnorms(n: usize, seed: u64) -> Vec<f64> {
        let cfg = SimConfig::new(lab_games(), alloc::vec![ElicitationForm::DirectResponse], dch(1.25), n, seed);
        let sim = simulate(&cfg).unwrap();
        let paths = sim.data.paths().unwrap();
        cfg.games
            .iter()
            .map(|(id, game)| {
                let mut counts = alloc::vec![0.0; game.terminal_count()];
                for p in paths.iter().filter(|p| &p.key.game_id == id) {
                    counts[p.terminal - 1] += 1.0 / n as f64;
                }
                let empirical = TerminalDistribution::new(counts).unwrap();
                let solution = cfg.model.solve(game, ElicitationForm::DirectResponse, &cfg.solver).unwrap();
                let predicted =
                    terminal_distribution(game, ElicitationForm::DirectResponse, &solution, cfg.model.prior()).unwrap();
                supnorm(&empirical, &predicted).unwrap()
            })
            .collect()
    }

    #[test]
    fn empirical_terminal_distribution_within_monte_carlo_rate() {
        let n = 10_000;
        let bound = 3.0 * ((n as f64).ln() / n as f64).sqrt();
        for s in empirical_supnorms(n, 11) {
            assert!(s < bound, "{s}");
        }
    }

    #[test]
    fn empirical_terminal_distribution_matches_prediction() {
        // one standard error of a CDF value is at most 0.0025 here
        for s in empirical_supnorms(40_000, 11) {
            assert!(s < 0.01, "{s}");
        }
    }
}
