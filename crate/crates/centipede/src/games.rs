//! The game-spec JSON schema and the registry of the six laboratory games.

use std::collections::BTreeMap;
use std::path::Path;

use centipede_core::{CentipedeGame, Family, GameSpec, Rescale};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, AppError, AppResult};

/// `{family, c, pi?, stages, rescale: {a, b}}`; custom games carry `payoffs`
/// instead of `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecJson {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    pub stages: usize,
    #[serde(default)]
    pub rescale: Rescale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<[f64; 2]>>,
}

impl GameSpecJson {
    pub fn to_spec(&self) -> AppResult<GameSpec> {
        let need_c = || self.c.ok_or_else(|| AppError::validation(format!("{} games need c", self.family)));
        let spec = match self.family {
            Family::Linear => GameSpec::linear(need_c()?, self.stages),
            Family::Constant => GameSpec::constant(need_c()?, self.stages),
            Family::Exponential => {
                GameSpec::exponential(need_c()?, self.pi.unwrap_or(GameSpec::DEFAULT_PI), self.stages)
            }
            Family::Custom => {
                let payoffs = self
                    .payoffs
                    .clone()
                    .ok_or_else(|| AppError::validation("custom games need a payoffs table"))?;
                if payoffs.len() != self.stages + 1 {
                    return Err(AppError::validation(format!(
                        "custom game with {} stages needs {} payoff rows, got {}",
                        self.stages,
                        self.stages + 1,
                        payoffs.len()
                    )));
                }
                GameSpec::custom(payoffs)
            }
        };
        Ok(spec.with_rescale(Rescale::new(self.rescale.a, self.rescale.b)?))
    }

    pub fn build(&self) -> AppResult<CentipedeGame> {
        Ok(CentipedeGame::new(self.to_spec()?)?)
    }
}

impl From<&GameSpec> for GameSpecJson {
    fn from(spec: &GameSpec) -> Self {
        let custom = spec.family == Family::Custom;
        GameSpecJson {
            family: spec.family,
            c: (!custom).then_some(spec.c),
            pi: (spec.family == Family::Exponential).then_some(spec.pi),
            stages: spec.stages,
            rescale: spec.rescale,
            payoffs: custom.then(|| spec.payoffs.clone()),
        }
    }
}

/// The six games of the laboratory design, `D = 3`.
pub const LAB_GAMES: [(&str, Family, f64); 6] = [
    ("linear-0.5", Family::Linear, 0.5),
    ("linear-0.8", Family::Linear, 0.8),
    ("exp-2.5", Family::Exponential, 2.5),
    ("exp-4", Family::Exponential, 4.0),
    ("const-0.4", Family::Constant, 0.4),
    ("const-0.8", Family::Constant, 0.8),
];

/// Suffix selecting the rescaled (points) version of a registry game.
pub const LAB_SUFFIX: &str = "-lab";

/// Spec of a registry game: `linear-0.5` is the normalized game,
/// `linear-0.5-lab` the one paid in points.
pub fn registry_spec(id: &str) -> Option<GameSpec> {
    let (base, lab) = match id.strip_suffix(LAB_SUFFIX) {
        Some(base) => (base, true),
        None => (id, false),
    };
    let &(_, family, c) = LAB_GAMES.iter().find(|(name, _, _)| *name == base)?;
    let spec = match family {
        Family::Linear => GameSpec::linear(c, 6),
        Family::Exponential => GameSpec::exponential(c, GameSpec::DEFAULT_PI, 6),
        _ => GameSpec::constant(c, 6),
    };
    Some(if lab { spec.with_lab_rescale() } else { spec })
}

pub fn registry_ids() -> Vec<String> {
    LAB_GAMES
        .iter()
        .flat_map(|(id, _, _)| [id.to_string(), format!("{id}{LAB_SUFFIX}")])
        .collect()
}

pub fn registry_game(id: &str) -> AppResult<CentipedeGame> {
    let spec = registry_spec(id).ok_or_else(|| {
        AppError::validation(format!("unknown game '{id}'; known games: {}", registry_ids().join(", ")))
    })?;
    Ok(CentipedeGame::new(spec)?)
}

/// The whole registry keyed by id.
pub fn registry() -> BTreeMap<String, CentipedeGame> {
    registry_ids()
        .into_iter()
        .map(|id| {
            let game = registry_game(&id).expect("registry games are valid");
            (id, game)
        })
        .collect()
}

/// A games file: a JSON object mapping identifiers to game specs.
pub fn parse_games(text: &str) -> AppResult<BTreeMap<String, CentipedeGame>> {
    let specs: BTreeMap<String, GameSpecJson> = serde_json::from_str(text)?;
    specs
        .into_iter()
        .map(|(id, spec)| {
            let game = spec.build().map_err(|e| e.context(format!("game '{id}'")))?;
            Ok((id, game))
        })
        .collect()
}

pub fn games_json(games: &BTreeMap<String, CentipedeGame>) -> AppResult<String> {
    let specs: BTreeMap<&String, GameSpecJson> = games.iter().map(|(id, g)| (id, GameSpecJson::from(g.spec()))).collect();
    Ok(serde_json::to_string_pretty(&specs)? + "\n")
}

/// Games from a file, or the registry when no file is given.
pub fn load_games(path: Option<&Path>) -> AppResult<BTreeMap<String, CentipedeGame>> {
    match path {
        Some(p) => parse_games(&read_file(p)?).map_err(|e| e.context(p.display())),
        None => Ok(registry()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_both_scales() {
        let lab = registry_game("const-0.8-lab").unwrap();
        let unit = registry_game("const-0.8").unwrap();
        for (a, b) in lab.payoffs().iter().zip(unit.payoffs()) {
            assert!((a[0] - 250.0 * b[0]).abs() < 1e-9 && (a[1] - 250.0 * b[1]).abs() < 1e-9);
        }
        assert_eq!(registry().len(), 12);
        assert!(registry_game("linear-0.3").is_err());
    }

    #[test]
    fn spec_json_round_trips() {
        for id in registry_ids() {
            let game = registry_game(&id).unwrap();
            let json = serde_json::to_string(&GameSpecJson::from(game.spec())).unwrap();
            let back: GameSpecJson = serde_json::from_str(&json).unwrap();
            assert_eq!(back.build().unwrap(), game, "{json}");
        }
        let text = r#"{"family": "linear", "c": 0.5, "stages": 6, "rescale": {"a": 100, "b": 50}}"#;
        let spec: GameSpecJson = serde_json::from_str(text).unwrap();
        assert_eq!(spec.build().unwrap(), registry_game("linear-0.5-lab").unwrap());
    }

    #[test]
    fn invalid_parameter_names_the_bound() {
        let spec: GameSpecJson = serde_json::from_str(r#"{"family": "linear", "c": 1.5, "stages": 6}"#).unwrap();
        let err = spec.build().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains('1'), "{err}");
    }
}
