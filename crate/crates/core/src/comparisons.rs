//! Comparison dataset records: two answers to one question, each with a
//! preference score in `[-1, 1]`, where the pair's scores sum to zero.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::preference::PreferenceLabel;

/// Tolerance for the zero-sum check.
pub const SCORE_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonQuestion {
    pub text: String,
    pub dataset: String,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonQuote {
    pub title: String,
    pub extract: String,
}

/// Tokenizer output carried through verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonTokens {
    pub prefix: Vec<u64>,
    pub completion: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonRecord {
    pub question: ComparisonQuestion,
    pub quotes: Vec<ComparisonQuote>,
    pub answer: String,
    pub tokens: ComparisonTokens,
    /// Positive iff this answer is preferred.
    pub score: f64,
}

pub type ComparisonPair = [ComparisonRecord; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum PairViolation {
    QuestionMismatch,
    ScoreSum { sum: f64 },
    ScoreOutOfRange { side: usize, score: f64 },
    EmptyAnswer { side: usize },
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairViolation::QuestionMismatch => f.write_str("the two records have different questions"),
            PairViolation::ScoreSum { sum } => write!(f, "scores sum to {sum}, not 0"),
            PairViolation::ScoreOutOfRange { side, score } => write!(f, "record {side} has score {score} outside [-1, 1]"),
            PairViolation::EmptyAnswer { side } => write!(f, "record {side} has an empty answer"),
        }
    }
}

/// Every invariant the pair breaks, in a fixed order.
pub fn check_pair(pair: &ComparisonPair) -> Vec<PairViolation> {
    let mut out = Vec::new();
    let (a, b) = (&pair[0], &pair[1]);
    if a.question.text != b.question.text || a.question.id != b.question.id {
        out.push(PairViolation::QuestionMismatch);
    }
    for (side, record) in pair.iter().enumerate() {
        if record.score.is_nan() || record.score.abs() > 1.0 {
            out.push(PairViolation::ScoreOutOfRange { side, score: record.score });
        }
    }
    let sum = a.score + b.score;
    if sum.is_nan() || sum.abs() > SCORE_SUM_TOLERANCE {
        out.push(PairViolation::ScoreSum { sum });
    }
    for (side, record) in pair.iter().enumerate() {
        if record.answer.trim().is_empty() {
            out.push(PairViolation::EmptyAnswer { side });
        }
    }
    out
}

/// Score 0 is a soft tie; otherwise the positive side is preferred.
pub fn label_from_scores(first: f64, second: f64) -> PreferenceLabel {
    if first > second {
        PreferenceLabel::FirstPreferred
    } else if first < second {
        PreferenceLabel::SecondPreferred
    } else {
        PreferenceLabel::Tie
    }
}

/// Training label for a pair, or its violations if it is invalid.
pub fn comparison_label(pair: &ComparisonPair) -> Result<PreferenceLabel, Vec<PairViolation>> {
    let violations = check_pair(pair);
    if violations.is_empty() {
        Ok(label_from_scores(pair[0].score, pair[1].score))
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The line could not be decoded as a pair.
    Malformed(String),
    Pair(PairViolation),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed(msg) => write!(f, "malformed record: {msg}"),
            Violation::Pair(v) => v.fmt(f),
        }
    }
}

/// Running totals over a comparison file. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub pairs: usize,
    pub valid: usize,
    pub ties: usize,
    pub violations: Vec<(usize, Violation)>,
}

impl ValidationReport {
    /// Checks one pair whose records sit on `lines` (the same line twice
    /// when a line holds the whole pair). Violations about one record are
    /// reported at that record's line, the rest at the first line.
    pub fn add_pair(&mut self, lines: [usize; 2], pair: &ComparisonPair) {
        self.pairs += 1;
        match comparison_label(pair) {
            Ok(label) => {
                self.valid += 1;
                if label == PreferenceLabel::Tie {
                    self.ties += 1;
                }
            }
            Err(violations) => self.violations.extend(violations.into_iter().map(|v| {
                let line = match v {
                    PairViolation::ScoreOutOfRange { side, .. } | PairViolation::EmptyAnswer { side } => lines[side],
                    _ => lines[0],
                };
                (line, Violation::Pair(v))
            })),
        }
    }

    /// A pair that could not be checked because a record failed to decode.
    pub fn add_undecodable_pair(&mut self) {
        self.pairs += 1;
    }

    pub fn add_malformed(&mut self, line: usize, message: impl Into<String>) {
        self.violations.push((line, Violation::Malformed(message.into())));
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Distinct line numbers with at least one violation.
    pub fn failing_lines(&self) -> Vec<usize> {
        let mut lines: Vec<usize> = self.violations.iter().map(|(l, _)| *l).collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(answer: &str, score: f64) -> ComparisonRecord {
        ComparisonRecord {
            question: ComparisonQuestion {
                text: "Why is the sky blue?".into(),
                dataset: "eli5".into(),
                id: "q1".into(),
            },
            quotes: alloc::vec![ComparisonQuote {
                title: "Sky".into(),
                extract: "Rayleigh scattering".into(),
            }],
            answer: answer.into(),
            tokens: ComparisonTokens::default(),
            score,
        }
    }

    fn pair(a: f64, b: f64) -> ComparisonPair {
        [record("A", a), record("B", b)]
    }

    #[test]
    fn labels() {
        assert_eq!(comparison_label(&pair(0.9, -0.9)), Ok(PreferenceLabel::FirstPreferred));
        assert_eq!(comparison_label(&pair(0.0, 0.0)), Ok(PreferenceLabel::Tie));
        assert_eq!(comparison_label(&pair(-0.2, 0.2)), Ok(PreferenceLabel::SecondPreferred));
    }

    #[test]
    fn violations() {
        assert_eq!(check_pair(&pair(0.5, -0.5)), alloc::vec![]);
        assert!(matches!(check_pair(&pair(0.5, -0.4))[..], [PairViolation::ScoreSum { .. }]));
        assert!(matches!(
            check_pair(&pair(1.5, -1.5))[..],
            [PairViolation::ScoreOutOfRange { side: 0, .. }, PairViolation::ScoreOutOfRange { side: 1, .. }]
        ));
        assert!(matches!(check_pair(&pair(f64::NAN, 0.0))[..], [PairViolation::ScoreOutOfRange { side: 0, .. }, PairViolation::ScoreSum { .. }]));
        let mut p = pair(0.5, -0.5);
        p[1].question.id = "q2".into();
        p[0].answer = " ".into();
        assert_eq!(check_pair(&p), alloc::vec![PairViolation::QuestionMismatch, PairViolation::EmptyAnswer { side: 0 }]);
    }

    #[test]
    fn report_counts() {
        let mut r = ValidationReport::default();
        r.add_pair([1, 1], &pair(0.5, -0.5));
        r.add_pair([2, 2], &pair(0.0, 0.0));
        r.add_pair([3, 3], &pair(0.5, -0.4));
        r.add_malformed(4, "eof");
        let mut p = pair(0.5, -0.5);
        p[1].answer.clear();
        r.add_pair([5, 6], &p);
        assert_eq!((r.pairs, r.valid, r.ties), (4, 2, 1));
        assert_eq!(r.failing_lines(), alloc::vec![3, 4, 6]);
        assert!(!r.is_clean());
    }
}
