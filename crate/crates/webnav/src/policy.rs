//! Scripted policies for demos and tests, and the loop that runs one episode.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use webnav_core::page::strip_link_markers;
use webnav_core::{Action, BrowserState, EnvConfig, EnvError, Episode, EpisodeRecord, PageKind, Phase, QuoteSpec, WebBackend};

/// Words quoted at most by the heuristic policy.
const MAX_HEURISTIC_QUOTE_WORDS: usize = 100;
/// Minimum token-units of the paragraph the heuristic policy quotes.
pub const MIN_QUOTE_PARAGRAPH: usize = 20;

pub trait Policy {
    /// The next raw command while browsing.
    fn act(&mut self, state: &BrowserState) -> String;
    /// The final answer once browsing has ended with references.
    fn answer(&mut self, state: &BrowserState) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Heuristic,
    Random { seed: u64 },
}

impl PolicyKind {
    pub fn build(self) -> Box<dyn Policy> {
        match self {
            PolicyKind::Heuristic => Box::new(HeuristicPolicy::default()),
            PolicyKind::Random { seed } => Box::new(RandomPolicy::new(seed)),
        }
    }
}

/// Every extract in order, each followed by its citation.
pub fn concatenate_extracts(state: &BrowserState) -> String {
    state
        .quotes()
        .iter()
        .enumerate()
        .map(|(i, q)| format!("{} [{}]", collapse(&q.extract), i + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Search the question, open the first result, quote its first paragraph of
/// at least [`MIN_QUOTE_PARAGRAPH`] token-units, then end browsing.
#[derive(Debug, Clone, Default)]
pub struct HeuristicPolicy {
    stage: usize,
}

impl HeuristicPolicy {
    fn quote_target(state: &BrowserState) -> Option<String> {
        let counter = state.config().token_counter;
        state
            .current_page()
            .body
            .iter()
            .map(|line| strip_link_markers(&line.text))
            .find(|text| counter.count(text) >= MIN_QUOTE_PARAGRAPH)
            .map(|text| {
                text.split_whitespace()
                    .take(MAX_HEURISTIC_QUOTE_WORDS)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
    }
}

impl Policy for HeuristicPolicy {
    fn act(&mut self, state: &BrowserState) -> String {
        let stage = self.stage;
        self.stage += 1;
        let page = state.current_page();
        let action = match stage {
            0 => Action::Search(collapse(state.question())),
            1 if page.kind == PageKind::SearchResults && page.link(0).is_some() => Action::ClickLink(0),
            2 if page.kind == PageKind::Normal => match Self::quote_target(state) {
                Some(text) => Action::Quote(QuoteSpec::Exact(text)),
                None => Action::EndAnswer,
            },
            _ => Action::EndAnswer,
        };
        action.render()
    }

    fn answer(&mut self, state: &BrowserState) -> String {
        concatenate_extracts(state)
    }
}

/// Uniformly random commands, including malformed ones. Fully determined by
/// its seed and the pages it sees.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

const GIBBERISH: &[&str] = &["scroll please", "Clicked on link", "Scrolled down 7", "search crows", "Quote: ", "", "End"];

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn words(state: &BrowserState) -> Vec<String> {
        let mut words: Vec<String> = state.question().split_whitespace().map(str::to_string).collect();
        for line in &state.current_page().body {
            words.extend(strip_link_markers(&line.text).split_whitespace().map(str::to_string));
        }
        words
    }

    fn quote(&mut self, state: &BrowserState) -> Action {
        let lines: Vec<String> = state
            .current_page()
            .body
            .iter()
            .map(|l| strip_link_markers(&l.text))
            .filter(|t| !t.trim().is_empty())
            .collect();
        let Some(line) = lines.choose(&mut self.rng) else {
            return Action::Quote(QuoteSpec::Exact("nothing here".into()));
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let start = self.rng.random_range(0..words.len());
        let len = self.rng.random_range(1..=8.min(words.len() - start));
        if len >= 3 && self.rng.random_bool(0.3) {
            Action::Quote(QuoteSpec::Abbreviated {
                start: words[start].to_string(),
                end: words[start + len - 1].to_string(),
            })
        } else {
            Action::Quote(QuoteSpec::Exact(words[start..start + len].join(" ")))
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, state: &BrowserState) -> String {
        let words = Self::words(state);
        let pick = |rng: &mut ChaCha8Rng, n: usize| -> String {
            (0..n)
                .filter_map(|_| words.choose(rng).cloned())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let roll = self.rng.random_range(0..100);
        let action = match roll {
            0..=11 => {
                let n = self.rng.random_range(1..=3);
                Action::Search(pick(&mut self.rng, n))
            }
            12..=29 => Action::ClickLink(self.rng.random_range(0..state.current_page().links.len() + 2)),
            30..=37 => Action::FindInPage(pick(&mut self.rng, 1)),
            38..=51 => self.quote(state),
            52..=61 => Action::ScrollDown(self.rng.random_range(1..=3)),
            62..=67 => Action::ScrollUp(self.rng.random_range(1..=3)),
            68..=71 => Action::Top,
            72..=83 => Action::Back,
            84..=92 => return GIBBERISH.choose(&mut self.rng).copied().unwrap_or("").to_string(),
            93..=96 => Action::EndAnswer,
            97..=98 => Action::EndNonsense,
            _ => Action::EndControversial,
        };
        // An empty pick renders as a malformed command, which is fine here.
        action.render()
    }

    fn answer(&mut self, state: &BrowserState) -> String {
        concatenate_extracts(state)
    }
}

/// Runs the policy until the episode is over and returns its record.
pub fn run_episode<B: WebBackend + ?Sized>(
    question: &str,
    policy: &mut dyn Policy,
    backend: &B,
    config: EnvConfig,
) -> Result<EpisodeRecord, EnvError> {
    let mut episode = Episode::new(question, config)?;
    while episode.phase() == Phase::Browsing {
        let raw = policy.act(episode.state());
        episode.submit(&raw, backend)?;
    }
    if let Phase::Answering(_) = episode.phase() {
        let answer = policy.answer(episode.state());
        episode.answer(&answer)?;
    }
    Ok(episode.record())
}

#[cfg(test)]
mod tests {
    use super::*;
    use webnav_core::{EndReason, FetchedContent, OfflineCorpus};

    fn corpus() -> OfflineCorpus {
        let mut c = OfflineCorpus::new();
        c.insert(
            "https://birds.org/crows",
            FetchedContent::Html(
                b"<title>Crows</title><p>Short intro about crows.</p>\
                  <p>Crows are clever birds that remember faces and sometimes leave small shiny objects for people \
                  who feed them regularly over many months.</p>"
                    .to_vec(),
            ),
        );
        c
    }

    #[test]
    fn heuristic_answers_with_first_long_paragraph() {
        let c = corpus();
        let record = run_episode("Do crows bring gifts?", &mut HeuristicPolicy::default(), &c, EnvConfig::default()).unwrap();
        assert_eq!(record.end_reason, Some(EndReason::Answered));
        let actions: Vec<&str> = record.steps.iter().map(|s| s.action.as_str()).collect();
        assert_eq!(actions[..2], ["Search Do crows bring gifts?", "Clicked on link 0"]);
        assert_eq!(record.quotes.len(), 1);
        assert!(record.quotes[0].extract.starts_with("Crows are clever birds"));
        assert!(record.answer.as_deref().unwrap().ends_with("[1]"));
    }

    #[test]
    fn heuristic_skips_without_hits() {
        let c = corpus();
        let record = run_episode("zebra quagga", &mut HeuristicPolicy::default(), &c, EnvConfig::default()).unwrap();
        assert_eq!(record.end_reason, Some(EndReason::SkippedNoReferences));
        assert_eq!(record.answer, None);
    }

    #[test]
    fn random_policy_is_deterministic() {
        let c = corpus();
        let run = |seed| run_episode("crows gifts", &mut RandomPolicy::new(seed), &c, EnvConfig::default()).unwrap();
        assert_eq!(run(7), run(7));
        assert!((0..20).map(run).any(|r| r.steps.len() > 3));
    }
}
