//! Question post-processing and the formatting templates for non-ELI5
//! question sources.

use alloc::format;
use alloc::string::String;

/// Words that mark text as already phrased as a question.
pub const QUESTION_WORDS: &[&str] = &[
    "explain", "eli5", "which", "what", "whats", "whose", "who", "whos", "whom", "where", "wheres", "when", "whens",
    "how", "hows", "why", "whys", "am", "is", "isn", "isnt", "are", "aren", "arent", "was", "wasn", "wasnt", "were",
    "weren", "werent", "do", "don", "dont", "does", "doesn", "doesnt", "did", "didn", "didnt", "can", "cant", "could",
    "couldn", "couldnt", "have", "haven", "havent", "has", "hasn", "hasnt", "may", "might", "must", "mustn", "mustnt",
    "shall", "shant", "should", "shouldn", "shouldnt", "will", "wont", "would", "wouldn", "wouldnt",
];

/// Titles that mark a removed post.
pub const DELETED_TITLE: &str = "[deleted by user]";
/// Selftext values treated as absent.
pub const DELETED_SELFTEXTS: &[&str] = &["[deleted]", "[removed]"];
pub const EXPLAIN_PREFIX: &str = "Explain: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DatasetSource {
    #[default]
    Eli5,
    Triviaqa,
    ArcChallenge,
    ArcEasy,
    HandWritten,
    Eli5FactCheck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawQuestion {
    pub title: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub selftext: Option<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub source_dataset: DatasetSource,
    #[cfg_attr(feature = "serde", serde(default))]
    pub id: String,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// True if the text has a `?` or a listed word bounded by `\b` on both sides.
///
/// A pattern made only of word characters matches between two word
/// boundaries exactly when it equals a maximal run of word characters.
pub fn is_actual_question(text: &str) -> bool {
    text.contains('?')
        || text
            .split(|c: char| !is_word_char(c))
            .filter(|run| !run.is_empty())
            .any(|run| {
                let lower = run.to_lowercase();
                QUESTION_WORDS.contains(&lower.as_str())
            })
}

/// Title plus any meaningful selftext, prefixed with `Explain: ` for ELI5
/// posts that are not phrased as questions. `None` for deleted posts.
pub fn preprocess_question(raw: &RawQuestion) -> Option<String> {
    if raw.title == DELETED_TITLE {
        return None;
    }
    let mut text = raw.title.clone();
    if let Some(body) = raw.selftext.as_deref() {
        if !body.trim().is_empty() && !DELETED_SELFTEXTS.contains(&body.trim()) {
            text.push_str("\n\n");
            text.push_str(body);
        }
    }
    if raw.source_dataset == DatasetSource::Eli5 && !is_actual_question(&text) {
        text.insert_str(0, EXPLAIN_PREFIX);
    }
    Some(text)
}

/// Multiple-choice question rendered as `<question>\nA. <option A>\nB. ...`.
pub fn format_arc_question<S: AsRef<str>>(question: &str, options: &[S]) -> String {
    let mut out = String::from(question);
    for (i, option) in options.iter().enumerate() {
        let letter = char::from(b'A' + (i % 26) as u8);
        out.push_str(&format!("\n{letter}. {}", option.as_ref()));
    }
    out
}

pub fn format_fact_check_question(question: &str, answer: &str) -> String {
    format!("Fact-check each of the claims in the following answer.\n\nQuestion: {question}\n\nAnswer: {answer}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eli5(title: &str, selftext: Option<&str>) -> RawQuestion {
        RawQuestion {
            title: title.into(),
            selftext: selftext.map(Into::into),
            source_dataset: DatasetSource::Eli5,
            id: "x".into(),
        }
    }

    #[test]
    fn examples() {
        assert_eq!(preprocess_question(&eli5("gravity", None)).unwrap(), "Explain: gravity");
        assert_eq!(preprocess_question(&eli5("[deleted by user]", Some("body"))), None);
        assert_eq!(preprocess_question(&eli5("How do magnets work?", None)).unwrap(), "How do magnets work?");
        assert_eq!(preprocess_question(&eli5("Magnets", Some("[removed]"))).unwrap(), "Explain: Magnets");
        assert_eq!(preprocess_question(&eli5("Magnets", Some("[deleted]"))).unwrap(), "Explain: Magnets");
        assert_eq!(
            preprocess_question(&eli5("Magnets", Some("see https://x.org/why"))).unwrap(),
            "Magnets\n\nsee https://x.org/why"
        );
        assert_eq!(
            preprocess_question(&eli5("Magnets", Some("see https://x.org/a"))).unwrap(),
            "Explain: Magnets\n\nsee https://x.org/a"
        );
    }

    #[test]
    fn word_boundaries() {
        assert!(is_actual_question("whats up"));
        assert!(is_actual_question("WHY not"));
        assert!(is_actual_question("it's what's-next"));
        assert!(is_actual_question("x?"));
        assert!(!is_actual_question("the cantaloupe harvest"));
        assert!(!is_actual_question(""));
        assert!(!is_actual_question("_can_"));
        assert!(!is_actual_question("can1"));
    }

    #[test]
    fn templates() {
        assert_eq!(format_arc_question("Which is a gas?", &["Ice", "Steam"]), "Which is a gas?\nA. Ice\nB. Steam");
        assert_eq!(
            format_fact_check_question("Why?", "Because."),
            "Fact-check each of the claims in the following answer.\n\nQuestion: Why?\n\nAnswer: Because."
        );
        let raw = RawQuestion {
            title: "Water boils at".into(),
            selftext: None,
            source_dataset: DatasetSource::Triviaqa,
            id: "t".into(),
        };
        assert_eq!(preprocess_question(&raw).unwrap(), "Water boils at");
    }

    proptest! {
        #[test]
        fn idempotent(title in "\\PC{0,30}", body in proptest::option::of("\\PC{0,30}")) {
            if let Some(once) = preprocess_question(&eli5(&title, body.as_deref())) {
                prop_assert_eq!(preprocess_question(&eli5(&once, None)), Some(once.clone()));
            }
        }

        #[test]
        fn listed_words_never_match_inside_longer_words(
            idx in 0..QUESTION_WORDS.len(),
            pre in "[a-z0-9_]{0,3}",
            post in "[a-z0-9_]{0,3}",
        ) {
            prop_assume!(!pre.is_empty() || !post.is_empty());
            let word = QUESTION_WORDS[idx];
            let embedded = format!("the {pre}{word}{post} harvest");
            let expect = QUESTION_WORDS.contains(&format!("{pre}{word}{post}").as_str());
            prop_assert_eq!(is_actual_question(&embedded), expect);
            let bare = format!("the {word} harvest");
            let shouted = format!("({}).", word.to_uppercase());
            prop_assert!(is_actual_question(&bare));
            prop_assert!(is_actual_question(&shouted));
        }
    }
}
