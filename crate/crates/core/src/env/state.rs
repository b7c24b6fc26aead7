use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use super::{Action, BrowsingEnd, EndReason, EnvConfig, EnvError, Phase, Quote, QuoteSpec};
use crate::backend::{censor_page, CensorContext, WebBackend};
use crate::matching::{locate, MatchMode, Needle};
use crate::page::SimplifiedPage;

/// What a step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Unparseable command: only the action budget changed.
    Invalid,
    /// A well-formed command with nothing to act on (unknown link, empty
    /// history, text not found, quote over budget).
    NoOp,
    Navigated,
    Scrolled,
    QuoteAdded,
    Ended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvents {
    pub outcome: StepOutcome,
    /// Phase after the step.
    pub phase: Phase,
}

/// Full state of one browsing episode.
#[derive(Debug, Clone, PartialEq)]
pub struct BrowserState {
    question: String,
    censor: CensorContext,
    quotes: Vec<Quote>,
    past_actions: Vec<String>,
    history: Vec<(SimplifiedPage, usize)>,
    current: SimplifiedPage,
    viewport_start: usize,
    actions_left: usize,
    quota_used: usize,
    phase: Phase,
    config: EnvConfig,
}

impl BrowserState {
    pub fn new(question: impl Into<String>, config: EnvConfig) -> Result<Self, EnvError> {
        let question = question.into();
        if question.trim().is_empty() {
            return Err(EnvError::EmptyQuestion);
        }
        config.validate()?;
        Ok(Self {
            censor: CensorContext::new(question.clone()),
            question,
            quotes: Vec::new(),
            past_actions: Vec::new(),
            history: Vec::new(),
            current: SimplifiedPage::blank(),
            viewport_start: 0,
            actions_left: config.max_actions,
            quota_used: 0,
            phase: Phase::Browsing,
            config,
        })
    }

    /// Also censor pages overlapping this reference answer.
    pub fn with_reference_answer(mut self, answer: impl Into<String>) -> Self {
        self.censor = self.censor.with_reference_answer(answer);
        self
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    pub fn quotes(&self) -> &[Quote] {
        &self.quotes
    }

    pub fn past_actions(&self) -> &[String] {
        &self.past_actions
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn current_page(&self) -> &SimplifiedPage {
        &self.current
    }

    pub fn viewport_start(&self) -> usize {
        self.viewport_start
    }

    /// Index one past the last visible line.
    pub fn viewport_end(&self) -> usize {
        (self.viewport_start + self.config.viewport_lines).min(self.current.body.len())
    }

    pub fn actions_left(&self) -> usize {
        self.actions_left
    }

    pub fn quota_used(&self) -> usize {
        self.quota_used
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn censor_context(&self) -> &CensorContext {
        &self.censor
    }

    fn expect_phase(&self, expected: &'static str, ok: bool) -> Result<(), EnvError> {
        if ok {
            Ok(())
        } else {
            Err(EnvError::WrongPhase {
                expected,
                actual: self.phase.name(),
            })
        }
    }

    pub(crate) fn require_browsing(&self) -> Result<(), EnvError> {
        self.expect_phase("browsing", self.phase == Phase::Browsing)
    }

    pub(crate) fn require_answering(&self) -> Result<(), EnvError> {
        self.expect_phase("answering", matches!(self.phase, Phase::Answering(_)))
    }

    fn navigate(&mut self, page: SimplifiedPage) {
        let previous = core::mem::replace(&mut self.current, page);
        self.history.push((previous, self.viewport_start));
        self.viewport_start = 0;
    }

    fn last_page_start(&self) -> usize {
        self.current.body.len().saturating_sub(self.config.viewport_lines)
    }

    /// Applies one command. Every command, valid or not, costs one action.
    pub fn step<B: WebBackend + ?Sized>(&mut self, action: &Action, backend: &B) -> Result<StepEvents, EnvError> {
        self.require_browsing()?;
        debug_assert!(self.actions_left > 0);
        self.actions_left -= 1;

        let outcome = match action {
            Action::Invalid(_) => StepOutcome::Invalid,
            Action::Search(query) => {
                self.past_actions.push(action.render());
                let page = backend.search(query, self.config.search_result_count);
                self.navigate(censor_page(page, &self.censor));
                StepOutcome::Navigated
            }
            Action::ClickLink(id) => match self.current.link(*id).cloned() {
                Some(link) => {
                    self.past_actions.push(format!("Click {} {}", link.text, link.domain()));
                    let page = backend.fetch(&link.url, &self.censor);
                    self.navigate(page);
                    StepOutcome::Navigated
                }
                None => {
                    self.past_actions.push(action.render());
                    StepOutcome::NoOp
                }
            },
            Action::FindInPage(text) => {
                self.past_actions.push(action.render());
                let from = self
                    .current
                    .body
                    .get(self.viewport_start + 1)
                    .map(|l| l.offset);
                let found = from.and_then(|from| locate(&self.current, Needle::Exact(text), MatchMode::Find, from));
                match found {
                    Some(m) => {
                        self.viewport_start = self.current.line_at(m.span.start);
                        StepOutcome::Scrolled
                    }
                    None => StepOutcome::NoOp,
                }
            }
            Action::Quote(spec) => {
                self.past_actions.push("Quote".to_string());
                let needle = match spec {
                    QuoteSpec::Exact(t) => Needle::Exact(t),
                    QuoteSpec::Abbreviated { start, end } => Needle::Abbreviated { start, end },
                };
                match locate(&self.current, needle, MatchMode::Quote, 0) {
                    Some(m) => {
                        let cost = self.config.token_counter.count(&m.extract);
                        if self.quota_used + cost <= self.config.max_quote_tokens {
                            self.quota_used += cost;
                            self.quotes.push(Quote {
                                page_title: self.current.title.clone(),
                                page_domain: self.current.domain.clone(),
                                extract: m.extract,
                            });
                            StepOutcome::QuoteAdded
                        } else {
                            StepOutcome::NoOp
                        }
                    }
                    None => StepOutcome::NoOp,
                }
            }
            Action::ScrollDown(n) => {
                self.past_actions.push(action.render());
                let target = self.viewport_start + usize::from(*n) * self.config.viewport_lines;
                self.viewport_start = target.min(self.last_page_start()).max(self.viewport_start);
                StepOutcome::Scrolled
            }
            Action::ScrollUp(n) => {
                self.past_actions.push(action.render());
                self.viewport_start = self
                    .viewport_start
                    .saturating_sub(usize::from(*n) * self.config.viewport_lines);
                StepOutcome::Scrolled
            }
            Action::Top => {
                self.past_actions.push(action.render());
                self.viewport_start = 0;
                StepOutcome::Scrolled
            }
            Action::Back => {
                self.past_actions.push(action.render());
                match self.history.pop() {
                    Some((page, viewport)) => {
                        self.current = page;
                        self.viewport_start = viewport;
                        StepOutcome::Navigated
                    }
                    None => StepOutcome::NoOp,
                }
            }
            Action::EndAnswer => {
                self.phase = if self.quotes.is_empty() {
                    Phase::Done(EndReason::SkippedNoReferences)
                } else {
                    Phase::Answering(BrowsingEnd::EndAnswer)
                };
                StepOutcome::Ended
            }
            Action::EndNonsense => {
                self.phase = Phase::Done(EndReason::SkippedNonsense);
                StepOutcome::Ended
            }
            Action::EndControversial => {
                self.phase = Phase::Done(EndReason::SkippedControversial);
                StepOutcome::Ended
            }
        };

        if self.phase == Phase::Browsing {
            if self.quota_used >= self.config.max_quote_tokens {
                // Only reachable with at least one quote.
                self.phase = Phase::Answering(BrowsingEnd::QuoteBudgetExhausted);
            } else if self.actions_left == 0 {
                self.phase = if self.quotes.is_empty() {
                    Phase::Done(EndReason::ActionBudgetExhausted)
                } else {
                    Phase::Answering(BrowsingEnd::ActionBudgetExhausted)
                };
            }
        }
        Ok(StepEvents {
            outcome,
            phase: self.phase,
        })
    }

    pub(crate) fn finish(&mut self, reason: EndReason) {
        self.phase = Phase::Done(reason);
    }

    /// A fresh answering-phase state with the same question and references.
    ///
    /// The source must have reached the answer phase (still answering, or
    /// already answered).
    pub fn spawn_answer_only(&self) -> Result<Self, EnvError> {
        let reached = matches!(self.phase, Phase::Answering(_) | Phase::Done(EndReason::Answered));
        self.expect_phase("answering", reached)?;
        let end = match self.phase {
            Phase::Answering(end) => end,
            _ => BrowsingEnd::EndAnswer,
        };
        Ok(Self {
            question: self.question.clone(),
            censor: self.censor.clone(),
            quotes: self.quotes.clone(),
            past_actions: Vec::new(),
            history: Vec::new(),
            current: SimplifiedPage::blank(),
            viewport_start: 0,
            actions_left: 0,
            quota_used: self.quota_used,
            phase: Phase::Answering(end),
            config: self.config.clone(),
        })
    }

    /// `config.answer_only_episodes` clones from [`Self::spawn_answer_only`].
    pub fn spawn_answer_only_batch(&self) -> Result<Vec<Self>, EnvError> {
        (0..self.config.answer_only_episodes)
            .map(|_| self.spawn_answer_only())
            .collect()
    }
}

/// Uniform action budget in `lo..=hi` (defaults elsewhere: 20 and 100).
pub fn sample_action_budget<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> Result<usize, EnvError> {
    if lo > hi {
        return Err(EnvError::InvalidRange { lo, hi });
    }
    Ok(rng.random_range(lo..=hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{FetchedContent, OfflineCorpus};
    use crate::env::parse_action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corpus() -> OfflineCorpus {
        let mut c = OfflineCorpus::new();
        let mut long = String::from("<title>Crow facts</title>");
        for i in 0..40 {
            long.push_str(&format!("<p>Crow fact number {i}.</p>"));
        }
        long.push_str("<p>Many animals give gifts to members of their own species.</p>");
        long.push_str("<p>See <a href='https://www.audubon.org/crows'>Audubon</a>.</p>");
        c.insert("https://crows.example.org/facts", FetchedContent::Html(long.into_bytes()));
        c.insert(
            "https://www.audubon.org/crows",
            FetchedContent::Html(b"<title>Audubon crows</title><p>Crows are smart.</p>".to_vec()),
        );
        c
    }

    fn state() -> BrowserState {
        BrowserState::new("How do crows give gifts?", EnvConfig::default()).unwrap()
    }

    fn run(s: &mut BrowserState, c: &OfflineCorpus, raw: &str) -> StepEvents {
        s.step(&parse_action(raw), c).unwrap()
    }

    #[test]
    fn invalid_action_only_costs_budget() {
        let c = corpus();
        let mut s = state();
        let before = s.clone();
        let ev = run(&mut s, &c, "please scroll down");
        assert_eq!(ev.outcome, StepOutcome::Invalid);
        assert_eq!(s.actions_left(), before.actions_left() - 1);
        assert!(s.past_actions().is_empty());
        assert_eq!(s.current_page(), before.current_page());
    }

    #[test]
    fn search_click_back_restores() {
        let c = corpus();
        let mut s = state();
        run(&mut s, &c, "Search crow facts");
        assert_eq!(s.current_page().title_line, "Search results for: crow facts");
        run(&mut s, &c, "Clicked on link 0");
        assert_eq!(s.current_page().url, "https://crows.example.org/facts");
        run(&mut s, &c, "Scrolled down 1");
        assert_eq!(s.viewport_start(), 12);
        let (page, vp) = (s.current_page().clone(), s.viewport_start());
        let links = s.current_page().links.len();
        run(&mut s, &c, &format!("Clicked on link {}", links - 1));
        assert_eq!(s.current_page().title, "Audubon crows");
        run(&mut s, &c, "Back");
        assert_eq!((s.current_page(), s.viewport_start()), (&page, vp));
        assert_eq!(
            s.past_actions(),
            [
                "Search crow facts",
                "Click Crow facts crows.example.org",
                "Scrolled down 1",
                "Click Audubon www.audubon.org",
                "Back"
            ]
        );
    }

    #[test]
    fn no_op_commands() {
        let c = corpus();
        let mut s = state();
        assert_eq!(run(&mut s, &c, "Back").outcome, StepOutcome::NoOp);
        assert_eq!(run(&mut s, &c, "Clicked on link 5").outcome, StepOutcome::NoOp);
        assert_eq!(run(&mut s, &c, "Quote: crows").outcome, StepOutcome::NoOp);
        assert_eq!(s.actions_left(), 97);
        assert_eq!(s.past_actions(), ["Back", "Clicked on link 5", "Quote"]);
    }

    #[test]
    fn scrolling_clamps_and_top() {
        let c = corpus();
        let mut s = state();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        let len = s.current_page().body.len();
        run(&mut s, &c, "Scrolled down 3");
        run(&mut s, &c, "Scrolled down 3");
        assert_eq!(s.viewport_start(), len - 12);
        run(&mut s, &c, "Scrolled up 1");
        assert_eq!(s.viewport_start(), len - 24);
        run(&mut s, &c, "Top");
        assert_eq!(s.viewport_start(), 0);
        run(&mut s, &c, "Scrolled up 2");
        assert_eq!(s.viewport_start(), 0);
    }

    #[test]
    fn find_moves_forward_without_wrapping() {
        let c = corpus();
        let mut s = state();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        assert_eq!(run(&mut s, &c, "Find in page: FACT NUMBER 30").outcome, StepOutcome::Scrolled);
        assert_eq!(s.viewport_start(), 30);
        // Line 30 itself is not searched again, and there is no wrap to the top.
        assert_eq!(run(&mut s, &c, "Find in page: fact number 2").outcome, StepOutcome::NoOp);
        assert_eq!(s.viewport_start(), 30);
        assert_eq!(run(&mut s, &c, "Find in page: many animals").outcome, StepOutcome::Scrolled);
        assert_eq!(s.viewport_start(), 40);
    }

    #[test]
    fn quote_is_case_insensitive_and_records_source() {
        let c = corpus();
        let mut s = state();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        let ev = run(&mut s, &c, "Quote: many ANIMALS give gifts");
        assert_eq!(ev.outcome, StepOutcome::QuoteAdded);
        assert_eq!(
            s.quotes(),
            [Quote {
                page_title: "Crow facts".into(),
                page_domain: "crows.example.org".into(),
                extract: "Many animals give gifts".into(),
            }]
        );
        assert_eq!(s.quota_used(), 4);
    }

    #[test]
    fn end_answer_paths() {
        let c = corpus();
        let mut s = state();
        assert_eq!(run(&mut s, &c, "End: Answer").phase, Phase::Done(EndReason::SkippedNoReferences));
        assert!(s.step(&Action::Top, &c).is_err());

        let mut s = state();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        run(&mut s, &c, "Quote: Crow fact number 1.");
        assert_eq!(run(&mut s, &c, "End: Answer").phase, Phase::Answering(BrowsingEnd::EndAnswer));

        let mut s = state();
        assert_eq!(run(&mut s, &c, "End: Nonsense").phase, Phase::Done(EndReason::SkippedNonsense));
        let mut s = state();
        assert_eq!(
            run(&mut s, &c, "End: Controversial").phase,
            Phase::Done(EndReason::SkippedControversial)
        );
    }

    #[test]
    fn action_budget_exhaustion() {
        let c = corpus();
        let config = EnvConfig { max_actions: 3, ..EnvConfig::default() };
        let mut s = BrowserState::new("q?", config.clone()).unwrap();
        for _ in 0..3 {
            run(&mut s, &c, "Top");
        }
        assert_eq!(s.phase(), Phase::Done(EndReason::ActionBudgetExhausted));

        let mut s = BrowserState::new("q?", config).unwrap();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        run(&mut s, &c, "Quote: Crow fact number 1.");
        assert_eq!(s.phase(), Phase::Answering(BrowsingEnd::ActionBudgetExhausted));
    }

    #[test]
    fn quote_budget() {
        let c = corpus();
        let config = EnvConfig { max_quote_tokens: 6, ..EnvConfig::default() };
        let mut s = BrowserState::new("q?", config).unwrap();
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        // 7 words: over budget, no-op
        assert_eq!(run(&mut s, &c, "Quote: Many animals give gifts to members of").outcome, StepOutcome::NoOp);
        assert_eq!(run(&mut s, &c, "Quote: Crow fact number 1.").outcome, StepOutcome::QuoteAdded);
        assert_eq!(s.phase(), Phase::Browsing);
        assert_eq!(run(&mut s, &c, "Quote: crow fact").outcome, StepOutcome::QuoteAdded);
        assert_eq!(s.phase(), Phase::Answering(BrowsingEnd::QuoteBudgetExhausted));
    }

    #[test]
    fn spawn_answer_only_clones_references() {
        let c = corpus();
        let mut s = state();
        assert!(s.spawn_answer_only().is_err());
        run(&mut s, &c, "Search crow facts");
        run(&mut s, &c, "Clicked on link 0");
        run(&mut s, &c, "Quote: Crow fact number 1.");
        run(&mut s, &c, "Quote: Crow fact number 2.");
        run(&mut s, &c, "End: Answer");
        let clone = s.spawn_answer_only().unwrap();
        assert_eq!(clone.quotes(), s.quotes());
        assert_eq!(clone.question(), s.question());
        assert!(matches!(clone.phase(), Phase::Answering(_)));
        assert_eq!(clone.history_len(), 0);
        let batch = s.spawn_answer_only_batch().unwrap();
        assert_eq!(batch.len(), 15);
        assert!(batch.iter().all(|b| *b == batch[0]));
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(BrowserState::new("  ", EnvConfig::default()).unwrap_err(), EnvError::EmptyQuestion);
        let bad = EnvConfig { viewport_lines: 0, ..EnvConfig::default() };
        assert_eq!(BrowserState::new("q", bad).unwrap_err(), EnvError::InvalidConfig("viewport_lines"));
    }

    #[test]
    fn action_budget_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_action_budget(&mut rng, 100, 100).unwrap(), 100);
        assert!(sample_action_budget(&mut rng, 5, 4).is_err());
        let draws: Vec<usize> = (0..100_000)
            .map(|_| sample_action_budget(&mut rng, 20, 100).unwrap())
            .collect();
        assert!(draws.iter().all(|d| (20..=100).contains(d)));
        let mean = draws.iter().sum::<usize>() as f64 / draws.len() as f64;
        assert!((mean - 60.0).abs() < 1.0, "mean {mean}");
        assert!(draws.contains(&20) && draws.contains(&100));
    }
}
