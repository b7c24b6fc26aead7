//! Text-based web-browsing environment for long-form question answering.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that is a
//! pure function of its inputs: page simplification, the browsing state
//! machine and its text renderings, censoring and domain filtering, the
//! offline corpus index, question post-processing, comparison-record checks,
//! and the preference/reward math. IO, HTTP and file formats live in the
//! `webnav` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod backend;
pub mod comparisons;
pub mod env;
mod html;
pub mod matching;
pub mod page;
pub mod preference;
pub mod questions;
pub mod tokens;
pub mod url;

pub use backend::{
    censor_page, is_blocked_domain, CensorContext, FetchedContent, OfflineCorpus, SearchResult,
    WebBackend,
};
pub use env::{
    check_citations, parse_action, render_answer_prompt, replay, sample_action_budget, Action,
    BrowserState, BrowsingEnd, CitationReport, Divergence, EndReason, EnvConfig, EnvError, Episode, EpisodeRecord, Phase, Quote, QuoteSpec, RecordStep,
    StepEvents,
};
pub use matching::{match_in_page, MatchMode, Span};
pub use page::{
    format_link, page_from_plaintext, sanitize_special, simplify_html, ContentKind, Line, Link,
    PageKind, SimplifiedPage,
};
pub use tokens::TokenCounter;
