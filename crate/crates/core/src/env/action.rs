use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::matching::ABBREVIATION;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QuoteSpec {
    Exact(String),
    /// `<start>━<end>`: the shortest span from `start` to `end`.
    Abbreviated { start: String, end: String },
}

impl QuoteSpec {
    pub fn render(&self) -> String {
        match self {
            QuoteSpec::Exact(text) => text.clone(),
            QuoteSpec::Abbreviated { start, end } => format!("{start}{ABBREVIATION}{end}"),
        }
    }
}

/// A browsing command. Anything that does not parse is `Invalid`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Search(String),
    ClickLink(usize),
    FindInPage(String),
    Quote(QuoteSpec),
    ScrollDown(u8),
    ScrollUp(u8),
    Top,
    Back,
    EndAnswer,
    EndNonsense,
    EndControversial,
    Invalid(String),
}

const SEARCH: &str = "Search ";
const CLICK: &str = "Clicked on link ";
const FIND: &str = "Find in page: ";
const QUOTE: &str = "Quote: ";
const SCROLL_DOWN: &str = "Scrolled down ";
const SCROLL_UP: &str = "Scrolled up ";

fn non_blank(text: &str) -> Option<&str> {
    (!text.trim().is_empty()).then_some(text)
}

fn scroll_steps(text: &str) -> Option<u8> {
    match text {
        "1" => Some(1),
        "2" => Some(2),
        "3" => Some(3),
        _ => None,
    }
}

fn parse_quote(text: &str) -> Option<QuoteSpec> {
    let text = non_blank(text)?;
    if !text.contains(ABBREVIATION) {
        return Some(QuoteSpec::Exact(text.to_string()));
    }
    let mut parts = text.split(ABBREVIATION);
    match (parts.next(), parts.next(), parts.next()) {
        (Some(start), Some(end), None) if !start.trim().is_empty() && !end.trim().is_empty() => {
            Some(QuoteSpec::Abbreviated {
                start: start.to_string(),
                end: end.to_string(),
            })
        }
        _ => None,
    }
}

/// Parses one complete command string.
///
/// Matching is by exact prefix; arguments must be non-blank, link ids decimal,
/// and scroll counts 1, 2 or 3.
pub fn parse_action(raw: &str) -> Action {
    let parsed = match raw {
        "Top" => Some(Action::Top),
        "Back" => Some(Action::Back),
        "End: Answer" => Some(Action::EndAnswer),
        "End: Nonsense" => Some(Action::EndNonsense),
        "End: Controversial" => Some(Action::EndControversial),
        _ => {
            if let Some(q) = raw.strip_prefix(SEARCH) {
                non_blank(q).map(|q| Action::Search(q.to_string()))
            } else if let Some(id) = raw.strip_prefix(CLICK) {
                (!id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()))
                    .then(|| id.parse().ok())
                    .flatten()
                    .map(Action::ClickLink)
            } else if let Some(t) = raw.strip_prefix(FIND) {
                non_blank(t).map(|t| Action::FindInPage(t.to_string()))
            } else if let Some(t) = raw.strip_prefix(QUOTE) {
                parse_quote(t).map(Action::Quote)
            } else if let Some(n) = raw.strip_prefix(SCROLL_DOWN) {
                scroll_steps(n).map(Action::ScrollDown)
            } else if let Some(n) = raw.strip_prefix(SCROLL_UP) {
                scroll_steps(n).map(Action::ScrollUp)
            } else {
                None
            }
        }
    };
    parsed.unwrap_or_else(|| Action::Invalid(raw.to_string()))
}

impl Action {
    pub fn parse(raw: &str) -> Self {
        parse_action(raw)
    }

    /// The command string for this action; `Invalid` renders its raw text.
    pub fn render(&self) -> String {
        match self {
            Action::Search(q) => format!("{SEARCH}{q}"),
            Action::ClickLink(id) => format!("{CLICK}{id}"),
            Action::FindInPage(t) => format!("{FIND}{t}"),
            Action::Quote(spec) => format!("{QUOTE}{}", spec.render()),
            Action::ScrollDown(n) => format!("{SCROLL_DOWN}{n}"),
            Action::ScrollUp(n) => format!("{SCROLL_UP}{n}"),
            Action::Top => "Top".into(),
            Action::Back => "Back".into(),
            Action::EndAnswer => "End: Answer".into(),
            Action::EndNonsense => "End: Nonsense".into(),
            Action::EndControversial => "End: Controversial".into(),
            Action::Invalid(raw) => raw.clone(),
        }
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Action::Invalid(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_commands() {
        assert_eq!(
            parse_action("Search how to train crows to bring you gifts"),
            Action::Search("how to train crows to bring you gifts".into())
        );
        assert_eq!(parse_action("Back"), Action::Back);
        assert_eq!(parse_action("Clicked on link 12"), Action::ClickLink(12));
        assert_eq!(parse_action("Find in page: crow"), Action::FindInPage("crow".into()));
        assert_eq!(parse_action("Scrolled down 3"), Action::ScrollDown(3));
        assert_eq!(parse_action("Scrolled up 1"), Action::ScrollUp(1));
        assert_eq!(parse_action("Top"), Action::Top);
        assert_eq!(parse_action("End: Answer"), Action::EndAnswer);
        assert_eq!(parse_action("End: Nonsense"), Action::EndNonsense);
        assert_eq!(parse_action("End: Controversial"), Action::EndControversial);
        assert_eq!(
            parse_action("Quote: Many animals give gifts"),
            Action::Quote(QuoteSpec::Exact("Many animals give gifts".into()))
        );
        assert_eq!(
            parse_action("Quote: Many animals━to humans."),
            Action::Quote(QuoteSpec::Abbreviated {
                start: "Many animals".into(),
                end: "to humans.".into()
            })
        );
    }

    #[test]
    fn rejects_everything_else() {
        for raw in [
            "please scroll down",
            "Scrolled down 4",
            "Scrolled down",
            "Clicked on link",
            "Clicked on link -1",
            "Clicked on link one",
            "Search ",
            "Search    ",
            "search crows",
            "Quote: ",
            "Quote: a━",
            "Quote: a━b━c",
            "Find in page:",
            "End: answer",
            "Back ",
            "",
        ] {
            assert_eq!(parse_action(raw), Action::Invalid(raw.into()), "{raw:?}");
        }
    }

    fn text() -> impl Strategy<Value = String> {
        "[a-zA-Z0-9 .,'?!-]{0,20}[a-zA-Z0-9]".prop_map(|s| s)
    }

    fn action() -> impl Strategy<Value = Action> {
        prop_oneof![
            text().prop_map(Action::Search),
            any::<u16>().prop_map(|i| Action::ClickLink(i as usize)),
            text().prop_map(Action::FindInPage),
            text().prop_map(|t| Action::Quote(QuoteSpec::Exact(t))),
            (text(), text()).prop_map(|(start, end)| Action::Quote(QuoteSpec::Abbreviated { start, end })),
            (1u8..=3).prop_map(Action::ScrollDown),
            (1u8..=3).prop_map(Action::ScrollUp),
            Just(Action::Top),
            Just(Action::Back),
            Just(Action::EndAnswer),
            Just(Action::EndNonsense),
            Just(Action::EndControversial),
        ]
    }

    proptest! {
        #[test]
        fn render_then_parse_roundtrips(a in action()) {
            prop_assert_eq!(parse_action(&a.render()), a);
        }

        #[test]
        fn parse_never_panics(raw in "\\PC{0,40}") {
            let a = parse_action(&raw);
            if !a.is_invalid() {
                prop_assert_eq!(parse_action(&a.render()), a);
            }
        }
    }
}
