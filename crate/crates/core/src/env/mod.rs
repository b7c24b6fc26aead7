//! The browsing episode: command parsing, the state machine, text renderings
//! of the state, and episode records.

mod action;
mod episode;
mod render;
mod state;

use alloc::string::String;

pub use action::{parse_action, Action, QuoteSpec};
pub use episode::{check_citations, replay, CitationReport, Divergence, Episode, EpisodeRecord, RecordStep};
pub use render::{render_answer_prompt, render_observation};
pub use state::{sample_action_budget, BrowserState, StepEvents, StepOutcome};

use crate::tokens::TokenCounter;

/// A reference collected while browsing.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quote {
    #[cfg_attr(feature = "serde", serde(rename = "title"))]
    pub page_title: String,
    #[cfg_attr(feature = "serde", serde(rename = "domain"))]
    pub page_domain: String,
    pub extract: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvConfig {
    pub max_actions: usize,
    /// Cap on the summed token-units of all quotes.
    pub max_quote_tokens: usize,
    pub viewport_lines: usize,
    pub token_counter: TokenCounter,
    pub search_result_count: usize,
    /// Observations longer than this (in chars) lose text lines from the bottom.
    pub max_observation_chars: Option<usize>,
    /// Answering-only episodes spawned per browsing episode.
    pub answer_only_episodes: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            max_actions: 100,
            max_quote_tokens: 512,
            viewport_lines: 12,
            token_counter: TokenCounter::WORDS,
            search_result_count: 10,
            max_observation_chars: None,
            answer_only_episodes: 15,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positive = [
            (self.max_actions, "max_actions"),
            (self.max_quote_tokens, "max_quote_tokens"),
            (self.viewport_lines, "viewport_lines"),
            (self.search_result_count, "search_result_count"),
        ];
        for (value, name) in positive {
            if value == 0 {
                return Err(EnvError::InvalidConfig(name));
            }
        }
        if self.max_observation_chars == Some(0) {
            return Err(EnvError::InvalidConfig("max_observation_chars"));
        }
        Ok(())
    }
}

/// Why browsing stopped and the answer phase began.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BrowsingEnd {
    EndAnswer,
    ActionBudgetExhausted,
    QuoteBudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EndReason {
    Answered,
    SkippedNonsense,
    SkippedControversial,
    /// `End: Answer` with no references collected.
    SkippedNoReferences,
    ActionBudgetExhausted,
    QuoteBudgetExhausted,
}

impl EndReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            EndReason::Answered => "answered",
            EndReason::SkippedNonsense => "skipped_nonsense",
            EndReason::SkippedControversial => "skipped_controversial",
            EndReason::SkippedNoReferences => "skipped_no_references",
            EndReason::ActionBudgetExhausted => "action_budget_exhausted",
            EndReason::QuoteBudgetExhausted => "quote_budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Browsing,
    Answering(BrowsingEnd),
    Done(EndReason),
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Browsing => "browsing",
            Phase::Answering(_) => "answering",
            Phase::Done(_) => "done",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("invalid configuration: {0} must be positive")]
    InvalidConfig(&'static str),
    #[error("operation requires the {expected} phase but the episode is {actual}")]
    WrongPhase {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("the answer prompt needs at least one quote")]
    NoQuotes,
    #[error("answer must not be empty")]
    EmptyAnswer,
    #[error("invalid range: {lo} > {hi}")]
    InvalidRange { lo: usize, hi: usize },
}
