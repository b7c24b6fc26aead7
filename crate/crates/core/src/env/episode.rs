use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{parse_action, Action, BrowserState, EndReason, EnvConfig, EnvError, Phase, Quote, StepEvents};
use crate::backend::WebBackend;

/// One observation and the command issued in response to it.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecordStep {
    pub observation: String,
    pub action: String,
}

/// A complete (or in-progress) episode as persisted.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeRecord {
    pub question: String,
    pub steps: Vec<RecordStep>,
    pub quotes: Vec<Quote>,
    pub answer: Option<String>,
    /// `None` while the episode is still running.
    pub end_reason: Option<EndReason>,
}

/// A [`BrowserState`] that records what it was shown and what it was told.
#[derive(Debug, Clone)]
pub struct Episode {
    state: BrowserState,
    steps: Vec<RecordStep>,
    answer: Option<String>,
}

impl Episode {
    pub fn new(question: impl Into<String>, config: EnvConfig) -> Result<Self, EnvError> {
        Ok(Self::from_state(BrowserState::new(question, config)?))
    }

    pub fn from_state(state: BrowserState) -> Self {
        Self {
            state,
            steps: Vec::new(),
            answer: None,
        }
    }

    pub fn state(&self) -> &BrowserState {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.state.phase()
    }

    pub fn steps(&self) -> &[RecordStep] {
        &self.steps
    }

    pub fn observation(&self) -> Result<String, EnvError> {
        self.state.observation()
    }

    pub fn answer_prompt(&self) -> Result<String, EnvError> {
        self.state.answer_prompt()
    }

    /// Parses and applies a raw command string, recording it verbatim.
    pub fn submit<B: WebBackend + ?Sized>(&mut self, raw: &str, backend: &B) -> Result<StepEvents, EnvError> {
        self.apply(raw.to_string(), &parse_action(raw), backend)
    }

    /// Applies an already-parsed action, recording its rendered form.
    pub fn act<B: WebBackend + ?Sized>(&mut self, action: &Action, backend: &B) -> Result<StepEvents, EnvError> {
        self.apply(action.render(), action, backend)
    }

    fn apply<B: WebBackend + ?Sized>(&mut self, raw: String, action: &Action, backend: &B) -> Result<StepEvents, EnvError> {
        let observation = self.state.observation()?;
        let events = self.state.step(action, backend)?;
        self.steps.push(RecordStep {
            observation,
            action: raw,
        });
        Ok(events)
    }

    /// Submits the final answer and ends the episode.
    pub fn answer(&mut self, answer: &str) -> Result<EpisodeRecord, EnvError> {
        self.state.require_answering()?;
        if answer.trim().is_empty() {
            return Err(EnvError::EmptyAnswer);
        }
        self.answer = Some(answer.to_string());
        self.state.finish(EndReason::Answered);
        Ok(self.record())
    }

    pub fn end_reason(&self) -> Option<EndReason> {
        match self.state.phase() {
            Phase::Done(reason) => Some(reason),
            _ => None,
        }
    }

    /// Snapshot of the record so far.
    pub fn record(&self) -> EpisodeRecord {
        EpisodeRecord {
            question: self.state.question().to_string(),
            steps: self.steps.clone(),
            quotes: self.state.quotes().to_vec(),
            answer: self.answer.clone(),
            end_reason: self.end_reason(),
        }
    }
}

/// Citations `[k]` found in an answer. Advisory only: nothing is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CitationReport {
    /// Every cited index in order of appearance.
    pub cited: Vec<usize>,
    /// Cited indices that are 0 or larger than the number of quotes.
    pub out_of_range: Vec<usize>,
}

pub fn check_citations(answer: &str, quote_count: usize) -> CitationReport {
    let mut report = CitationReport::default();
    for (open, _) in answer.match_indices('[') {
        let rest = &answer[open + 1..];
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 || rest.as_bytes().get(digits) != Some(&b']') {
            continue;
        }
        if let Ok(k) = rest[..digits].parse::<usize>() {
            report.cited.push(k);
            if k == 0 || k > quote_count {
                report.out_of_range.push(k);
            }
        }
    }
    report
}

/// First point where a replay disagrees with its record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    Observation {
        step: usize,
        expected: String,
        actual: String,
    },
    /// The replayed episode left the browsing phase before this step.
    EndedEarly { step: usize },
    /// All observations matched but the collected quotes differ.
    Quotes,
    /// All observations matched but the episode ended differently.
    Outcome {
        expected: Option<EndReason>,
        actual: Option<EndReason>,
    },
}

/// Re-runs the record's commands from a fresh state and compares every
/// observation byte-for-byte.
pub fn replay<B: WebBackend + ?Sized>(
    record: &EpisodeRecord,
    config: EnvConfig,
    backend: &B,
) -> Result<Result<Episode, Divergence>, EnvError> {
    let mut episode = Episode::new(record.question.clone(), config)?;
    for (i, step) in record.steps.iter().enumerate() {
        if episode.phase() != Phase::Browsing {
            return Ok(Err(Divergence::EndedEarly { step: i }));
        }
        let observation = episode.observation()?;
        if observation != step.observation {
            return Ok(Err(Divergence::Observation {
                step: i,
                expected: step.observation.clone(),
                actual: observation,
            }));
        }
        episode.submit(&step.action, backend)?;
    }
    if episode.state.quotes() != record.quotes.as_slice() {
        return Ok(Err(Divergence::Quotes));
    }
    if let Some(answer) = &record.answer {
        if matches!(episode.phase(), Phase::Answering(_)) {
            episode.answer(answer)?;
        }
    }
    let actual = episode.end_reason();
    if record.end_reason.is_some() && actual != record.end_reason {
        return Ok(Err(Divergence::Outcome {
            expected: record.end_reason,
            actual,
        }));
    }
    Ok(Ok(episode))
}
