//! Long-format dataset CSV:
//! `session_id,subject_id,pair_id,role,game_id,form,record_type,node,choice`.
//!
//! `role` is 1 or 2 and `form` one of `dr`, `rs`, `fs`. Direct-response rows
//! have `record_type = node`, the node number and `T` or `P`; strategy rows
//! have `record_type = strategy`, an empty node and the strategy label
//! (`PPT` or `TPT` style).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use centipede_core::estimate::{Dataset, Observation, Record};
use centipede_core::games::{parse_strategy, Action};
use centipede_core::{CentipedeGame, ElicitationForm, Player};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, AppError, AppResult};

pub const HEADER: [&str; 9] =
    ["session_id", "subject_id", "pair_id", "role", "game_id", "form", "record_type", "node", "choice"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    session_id: String,
    subject_id: String,
    pair_id: String,
    role: String,
    game_id: String,
    form: String,
    record_type: String,
    node: String,
    choice: String,
}

fn observation(row: Row, games: &BTreeMap<String, CentipedeGame>) -> AppResult<Observation> {
    let role = row
        .role
        .trim()
        .parse::<u8>()
        .map_err(|_| AppError::validation(format!("role must be 1 or 2, got '{}'", row.role)))
        .and_then(|r| Ok(Player::from_role(r)?))?;
    let form: ElicitationForm = row.form.trim().parse()?;
    let game = games
        .get(&row.game_id)
        .ok_or_else(|| AppError::validation(format!("unknown game '{}'", row.game_id)))?;
    let record = match (row.record_type.trim(), form) {
        ("node", ElicitationForm::DirectResponse) => {
            let node = row
                .node
                .trim()
                .parse::<usize>()
                .map_err(|_| AppError::validation(format!("node must be a positive integer, got '{}'", row.node)))?;
            let action: Action = row.choice.trim().parse()?;
            Record::Node { node, action }
        }
        ("strategy", ElicitationForm::ReducedStrategy | ElicitationForm::FullStrategy) => {
            if !row.node.trim().is_empty() {
                return Err(AppError::validation("strategy rows leave node empty"));
            }
            Record::Strategy(parse_strategy(form, row.choice.trim(), game.depth())?)
        }
        (kind, form) => {
            return Err(AppError::validation(format!("record_type '{kind}' does not fit form {form}")));
        }
    };
    Ok(Observation {
        session_id: row.session_id,
        subject_id: row.subject_id,
        pair_id: row.pair_id,
        role,
        game_id: row.game_id,
        form,
        record,
    })
}

/// Reads and validates a dataset. Errors name the CSV line.
pub fn parse_dataset(input: impl Read, games: &BTreeMap<String, CentipedeGame>) -> AppResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(input);
    let headers = reader.headers().map_err(|e| AppError::validation(format!("line 1: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(AppError::validation(format!("line 1: expected header {}", HEADER.join(","))));
    }
    let mut observations = Vec::new();
    let mut lines = Vec::new();
    for result in reader.deserialize::<Row>() {
        let row = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            AppError::validation(format!("line {line}: {e}"))
        })?;
        let line = observations.len() + 2;
        lines.push(line);
        observations.push(observation(row, games).map_err(|e| e.context(format!("line {line}")))?);
    }
    let used: BTreeMap<String, CentipedeGame> = observations
        .iter()
        .map(|o| (o.game_id.clone(), games[&o.game_id].clone()))
        .collect();
    // core errors count data rows from 1; the header is line 1
    Dataset::new(used, observations).map_err(|e| {
        AppError::from(e).context("dataset (row n is CSV line n + 1)")
    })
}

pub fn read_dataset(path: &Path, games: &BTreeMap<String, CentipedeGame>) -> AppResult<Dataset> {
    parse_dataset(read_file(path)?.as_bytes(), games).map_err(|e| e.context(path.display()))
}

pub fn write_dataset(data: &Dataset) -> AppResult<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let csv_err = |e: csv::Error| AppError::validation(e.to_string());
    writer.write_record(HEADER).map_err(csv_err)?;
    for obs in &data.observations {
        let depth = data.game(&obs.game_id)?.depth();
        let (record_type, node) = match obs.record {
            Record::Node { node, .. } => ("node", node.to_string()),
            Record::Strategy(_) => ("strategy", String::new()),
        };
        writer
            .serialize(Row {
                session_id: obs.session_id.clone(),
                subject_id: obs.subject_id.clone(),
                pair_id: obs.pair_id.clone(),
                role: obs.role.role().to_string(),
                game_id: obs.game_id.clone(),
                form: obs.form.code().to_string(),
                record_type: record_type.to_string(),
                node,
                choice: obs.choice_label(depth)?,
            })
            .map_err(csv_err)?;
    }
    writer.into_inner().map_err(|e| AppError::validation(e.to_string()))
}
