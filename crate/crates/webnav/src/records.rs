//! Episode record files: one JSON document per file, or JSON Lines with one
//! record per line.

use std::io::{BufRead, Write};

use webnav_core::{EnvConfig, EpisodeRecord};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Pretty JSON with a trailing LF.
pub fn to_json(record: &EpisodeRecord) -> String {
    let mut out = serde_json::to_string_pretty(record).expect("records always serialize");
    out.push('\n');
    out
}

pub fn write_jsonl<W: Write>(mut writer: W, record: &EpisodeRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut writer, record)?;
    writer.write_all(b"\n")
}

/// Reads a single JSON document, or JSON Lines if the text holds several
/// documents.
pub fn parse_records(text: &str) -> Result<Vec<EpisodeRecord>, RecordError> {
    if let Ok(one) = serde_json::from_str::<EpisodeRecord>(text) {
        return Ok(vec![one]);
    }
    read_jsonl(text.as_bytes())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<EpisodeRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| RecordError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

/// The action budget a record started with, read from the `Actions left`
/// line of its first observation.
pub fn initial_action_budget(record: &EpisodeRecord) -> Option<usize> {
    let first = &record.steps.first()?.observation;
    first
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("♦Actions left: "))
        .and_then(|n| n.trim().parse().ok())
}

/// `base` with the record's starting action budget, so that replay renders
/// the same counter.
pub fn replay_config(record: &EpisodeRecord, base: &EnvConfig) -> EnvConfig {
    let mut config = base.clone();
    if let Some(n) = initial_action_budget(record) {
        config.max_actions = n;
    }
    config
}

/// First line where two observations differ, 1-based, with both lines.
pub fn first_line_difference(expected: &str, actual: &str) -> (usize, String, String) {
    let (mut e, mut a) = (expected.split('\n'), actual.split('\n'));
    let mut line = 1;
    loop {
        match (e.next(), a.next()) {
            (Some(x), Some(y)) if x == y => line += 1,
            (x, y) => {
                return (
                    line,
                    x.unwrap_or("<end>").to_string(),
                    y.unwrap_or("<end>").to_string(),
                )
            }
        }
    }
}
