//! Observed choices and their validation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::games::{reduced_of, strategy_label, Action, CentipedeGame, ElicitationForm, Player};

/// What a subject submitted in one game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Record {
    /// Direct response: the action taken at a reached node.
    Node { node: usize, action: Action },
    /// Strategy methods: zero-based index into the form's strategy set.
    Strategy(usize),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub session_id: String,
    pub subject_id: String,
    /// Identifies the two subjects matched in a game; shared by both roles
    /// and, for matched panels, by the same two subjects across forms.
    pub pair_id: String,
    pub role: Player,
    pub game_id: String,
    pub form: ElicitationForm,
    pub record: Record,
}

impl Observation {
    /// Key of the direct-response path this row belongs to.
    pub fn path_key(&self) -> PathKey {
        PathKey {
            session_id: self.session_id.clone(),
            pair_id: self.pair_id.clone(),
            game_id: self.game_id.clone(),
        }
    }

    /// Choice label as written in data files: `T`/`P` for nodes, the
    /// strategy label otherwise.
    pub fn choice_label(&self, depth: usize) -> Result<String> {
        match self.record {
            Record::Node { action, .. } => Ok(String::from(action.symbol())),
            Record::Strategy(s) => strategy_label(self.form, s, depth),
        }
    }
}

/// One play of one game by one pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathKey {
    pub session_id: String,
    pub pair_id: String,
    pub game_id: String,
}

/// A direct-response path: its rows in node order and where it ended.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub key: PathKey,
    pub rows: Vec<usize>,
    pub terminal: usize,
}

/// Observations together with the games they refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub games: BTreeMap<String, CentipedeGame>,
    pub observations: Vec<Observation>,
}

impl Dataset {
    /// Builds and validates a dataset.
    pub fn new(games: BTreeMap<String, CentipedeGame>, observations: Vec<Observation>) -> Result<Dataset> {
        let data = Dataset { games, observations };
        data.validate()?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn game(&self, id: &str) -> Result<&CentipedeGame> {
        self.games.get(id).ok_or_else(|| invalid!("unknown game '{id}'"))
    }

    /// Checks references, role/node parity, strategy ranges and that every
    /// direct-response path is a consistent prefix of the tree.
    pub fn validate(&self) -> Result<()> {
        for (i, obs) in self.observations.iter().enumerate() {
            let game = self.game(&obs.game_id).map_err(|e| invalid!("row {}: {e}", i + 1))?;
            let depth = game.depth();
            match (obs.form, obs.record) {
                (ElicitationForm::DirectResponse, Record::Node { node, .. }) => {
                    if node == 0 || node > game.stages() {
                        return Err(invalid!("row {}: node {node} outside 1..={}", i + 1, game.stages()));
                    }
                    if Player::mover(node) != obs.role {
                        return Err(invalid!(
                            "row {}: node {node} belongs to role {}, not role {}",
                            i + 1,
                            Player::mover(node).role(),
                            obs.role.role()
                        ));
                    }
                }
                (ElicitationForm::DirectResponse, Record::Strategy(_)) => {
                    return Err(invalid!("row {}: direct response rows record node choices", i + 1));
                }
                (form, Record::Strategy(s)) => {
                    if s >= form.strategy_count(depth) {
                        return Err(invalid!("row {}: strategy {s} outside the {form} strategy set", i + 1));
                    }
                }
                (form, Record::Node { .. }) => {
                    return Err(invalid!("row {}: {form} rows record strategies, not nodes", i + 1));
                }
            }
        }
        self.paths().map(|_| ())
    }

    /// Direct-response paths in order of first appearance.
    pub fn paths(&self) -> Result<Vec<Path>> {
        let mut index: BTreeMap<PathKey, usize> = BTreeMap::new();
        let mut paths: Vec<Path> = Vec::new();
        for (i, obs) in self.observations.iter().enumerate() {
            if obs.form != ElicitationForm::DirectResponse {
                continue;
            }
            let key = obs.path_key();
            let slot = *index.entry(key.clone()).or_insert_with(|| {
                paths.push(Path { key, rows: Vec::new(), terminal: 0 });
                paths.len() - 1
            });
            paths[slot].rows.push(i);
        }
        for path in &mut paths {
            let game = self.game(&path.key.game_id)?;
            let node_of = |r: usize| match self.observations[r].record {
                Record::Node { node, .. } => node,
                Record::Strategy(_) => 0,
            };
            path.rows.sort_by_key(|&r| node_of(r));
            let mut subjects: [Option<&str>; 2] = [None, None];
            for (expected, &r) in path.rows.iter().enumerate() {
                let obs = &self.observations[r];
                let node = node_of(r);
                if node != expected + 1 {
                    return Err(invalid!(
                        "path (session {}, pair {}, game {}) is not a prefix of the tree at node {node}",
                        path.key.session_id,
                        path.key.pair_id,
                        path.key.game_id
                    ));
                }
                let who = &mut subjects[obs.role.index()];
                match who {
                    Some(s) if *s != obs.subject_id => {
                        return Err(invalid!(
                            "path (session {}, pair {}, game {}) has two subjects in role {}",
                            path.key.session_id,
                            path.key.pair_id,
                            path.key.game_id,
                            obs.role.role()
                        ));
                    }
                    _ => *who = Some(&obs.subject_id),
                }
                let last = expected + 1 == path.rows.len();
                let took = matches!(obs.record, Record::Node { action: Action::Take, .. });
                if took && !last {
                    return Err(invalid!(
                        "path (session {}, pair {}, game {}) continues after a take at node {node}",
                        path.key.session_id,
                        path.key.pair_id,
                        path.key.game_id
                    ));
                }
                if last && !took && node != game.stages() {
                    return Err(invalid!(
                        "path (session {}, pair {}, game {}) stops at node {node} without a take",
                        path.key.session_id,
                        path.key.pair_id,
                        path.key.game_id
                    ));
                }
            }
            let last = node_of(*path.rows.last().expect("paths are non-empty"));
            let took = matches!(
                self.observations[*path.rows.last().unwrap()].record,
                Record::Node { action: Action::Take, .. }
            );
            path.terminal = if took { last } else { game.stages() + 1 };
        }
        Ok(paths)
    }

    /// Unit of observation for each row: a direct-response path, or the row
    /// itself for the strategy methods. Returns `(unit of each row, unit count)`.
    pub fn units(&self) -> (Vec<usize>, usize) {
        let mut by_path: BTreeMap<PathKey, usize> = BTreeMap::new();
        let mut next = 0;
        let units = self
            .observations
            .iter()
            .map(|obs| {
                if obs.form == ElicitationForm::DirectResponse {
                    *by_path.entry(obs.path_key()).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        (units, next)
    }

    /// Reduced strategy implied by a strategy-method row.
    pub fn reduced_choice(&self, row: usize) -> Result<usize> {
        let obs = &self.observations[row];
        let depth = self.game(&obs.game_id)?.depth();
        match obs.record {
            Record::Strategy(s) => Ok(reduced_of(obs.form, s, depth)?.index()),
            Record::Node { .. } => Err(invalid!("row {} is a node choice", row + 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameSpec;

    pub(crate) fn node(pair: &str, subject: &str, role: Player, node: usize, action: Action) -> Observation {
        Observation {
            session_id: "s1".into(),
            subject_id: subject.into(),
            pair_id: pair.into(),
            role,
            game_id: "g".into(),
            form: ElicitationForm::DirectResponse,
            record: Record::Node { node, action },
        }
    }

    fn games() -> BTreeMap<String, CentipedeGame> {
        let mut m = BTreeMap::new();
        m.insert("g".into(), CentipedeGame::new(GameSpec::linear(0.5, 6)).unwrap());
        m
    }

    #[test]
    fn consistent_path_is_accepted() {
        let rows = alloc::vec![
            node("p", "b", Player::Two, 2, Action::Take),
            node("p", "a", Player::One, 1, Action::Pass),
        ];
        let data = Dataset::new(games(), rows).unwrap();
        let paths = data.paths().unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].rows, [1, 0]);
        assert_eq!(paths[0].terminal, 2);
    }

    #[test]
    fn all_pass_path_ends_at_last_terminal() {
        let rows: Vec<Observation> = (1..=6)
            .map(|n| node("p", if n % 2 == 1 { "a" } else { "b" }, Player::mover(n), n, Action::Pass))
            .collect();
        let data = Dataset::new(games(), rows).unwrap();
        assert_eq!(data.paths().unwrap()[0].terminal, 7);
    }

    #[test]
    fn inconsistent_paths_are_rejected() {
        let gap = alloc::vec![
            node("p", "a", Player::One, 1, Action::Pass),
            node("p", "a", Player::One, 3, Action::Take),
        ];
        assert!(Dataset::new(games(), gap).is_err());
        let after_take = alloc::vec![
            node("p", "a", Player::One, 1, Action::Take),
            node("p", "b", Player::Two, 2, Action::Take),
        ];
        assert!(Dataset::new(games(), after_take).is_err());
        let unfinished = alloc::vec![node("p", "a", Player::One, 1, Action::Pass)];
        assert!(Dataset::new(games(), unfinished).is_err());
        let wrong_role = alloc::vec![node("p", "a", Player::Two, 1, Action::Take)];
        assert!(Dataset::new(games(), wrong_role).is_err());
    }

    #[test]
    fn strategy_rows_are_checked() {
        let mut obs = node("p", "a", Player::One, 1, Action::Take);
        obs.form = ElicitationForm::ReducedStrategy;
        obs.record = Record::Strategy(4);
        assert!(Dataset::new(games(), alloc::vec![obs.clone()]).is_err());
        obs.record = Record::Strategy(3);
        let data = Dataset::new(games(), alloc::vec![obs.clone()]).unwrap();
        assert_eq!(data.reduced_choice(0).unwrap(), 3);
        obs.game_id = "missing".into();
        assert!(Dataset::new(games(), alloc::vec![obs]).is_err());
    }

    #[test]
    fn units_group_paths() {
        let mut rows = alloc::vec![
            node("p", "a", Player::One, 1, Action::Pass),
            node("q", "c", Player::One, 1, Action::Take),
            node("p", "b", Player::Two, 2, Action::Take),
        ];
        let mut rs = node("p", "a", Player::One, 1, Action::Take);
        rs.form = ElicitationForm::ReducedStrategy;
        rs.record = Record::Strategy(0);
        rows.push(rs);
        let data = Dataset::new(games(), rows).unwrap();
        assert_eq!(data.units(), (alloc::vec![0, 1, 0, 2], 3));
    }
}
