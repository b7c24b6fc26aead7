#![allow(dead_code)]

use std::path::PathBuf;

use webnav::corpus::load_corpus;
use webnav_core::env::StepOutcome;
use webnav_core::{EnvConfig, Episode, OfflineCorpus};

pub const CROW_QUESTION: &str = "How can I train the crows in my neighborhood to bring me gifts?";

pub const CROW_ACTIONS: [&str; 4] = [
    "Search how to train crows to bring you gifts",
    "Clicked on link 1",
    "Quote: Many animals give gifts to members of their own species but crows and other corvids are the only ones known to give gifts to humans.",
    "Back",
];

/// Questions for heuristic and random episodes on the fixture corpus.
pub const FIXTURE_QUESTIONS: [&str; 6] = [
    CROW_QUESTION,
    "Why is the sky blue?",
    "How do magnets work?",
    "What is gravity?",
    "What do American crows eat?",
    "zzzz qqqq",
];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures().join("corpus")
}

pub fn corpus() -> OfflineCorpus {
    load_corpus(&corpus_dir()).expect("fixture corpus loads")
}

/// The four browsing steps behind the crow observation.
pub fn crow_episode(corpus: &OfflineCorpus) -> Episode {
    let mut episode = Episode::new(CROW_QUESTION, EnvConfig::default()).unwrap();
    for raw in CROW_ACTIONS {
        let events = episode.submit(raw, corpus).unwrap();
        assert!(
            !matches!(events.outcome, StepOutcome::Invalid | StepOutcome::NoOp),
            "{raw} had no effect"
        );
    }
    episode
}

/// Compares `actual` with the golden file, or rewrites it when
/// `WEBNAV_BLESS` is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = fixtures().join("goldens").join(name);
    if std::env::var_os("WEBNAV_BLESS").is_some() {
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let (line, e, a) = webnav::records::first_line_difference(&expected, actual);
        Err(format!("{name} differs at line {line}: expected {e:?}, got {a:?}"))
    }
}
