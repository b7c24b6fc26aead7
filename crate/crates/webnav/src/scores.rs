//! Score files for best-of-n curves: JSON Lines of
//! `{"question_id", "answer_id", "train_score", "val_score"}`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use webnav_core::preference::{bon_curve, PreferenceError, ScoredAnswer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    pub question_id: String,
    pub answer_id: String,
    pub train_score: f64,
    pub val_score: f64,
}

/// Answers grouped by question, in order of first appearance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreTable {
    pub question_ids: Vec<String>,
    pub samples: Vec<Vec<ScoredAnswer>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("question {question_id} has {have} answers but n = {need} was requested")]
    TooFewSamples { question_id: String, have: usize, need: usize },
    #[error("{0}")]
    Estimate(PreferenceError),
}

pub fn read_scores<R: BufRead>(reader: R) -> Result<ScoreTable, ScoreError> {
    let mut table = ScoreTable::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(&line).map_err(|e| ScoreError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !(parsed.train_score.is_finite() && parsed.val_score.is_finite()) {
            return Err(ScoreError::Parse {
                line: i + 1,
                message: "scores must be finite".into(),
            });
        }
        let slot = *index.entry(parsed.question_id.clone()).or_insert_with(|| {
            table.question_ids.push(parsed.question_id.clone());
            table.samples.push(Vec::new());
            table.samples.len() - 1
        });
        table.samples[slot].push(ScoredAnswer::new(parsed.answer_id, parsed.train_score, parsed.val_score));
    }
    Ok(table)
}

/// `(n, mean estimate)` rows, with errors naming the offending question.
pub fn curve(table: &ScoreTable, n_values: &[usize]) -> Result<Vec<(usize, f64)>, ScoreError> {
    bon_curve(&table.samples, n_values).map_err(|e| match e {
        PreferenceError::TooFewSamples { question, have, need } => ScoreError::TooFewSamples {
            question_id: table.question_ids[question].clone(),
            have,
            need,
        },
        other => ScoreError::Estimate(other),
    })
}

/// Tab-separated table with a header row.
pub fn write_table<W: Write>(mut w: W, rows: &[(usize, f64)]) -> std::io::Result<()> {
    writeln!(w, "n\testimate")?;
    for (n, v) in rows {
        writeln!(w, "{n}\t{v}")?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(mut w: W, rows: &[(usize, f64)]) -> std::io::Result<()> {
    writeln!(w, "n,estimate")?;
    for (n, v) in rows {
        writeln!(w, "{n},{v}")?;
    }
    Ok(())
}
