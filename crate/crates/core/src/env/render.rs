use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{BrowserState, EnvError, Quote};

/// Marks the end of the question and of each quote in the answer prompt.
pub const END_MARK: char = '◼';
/// Prefix of every observation section heading.
pub const SECTION_MARK: char = '♦';

/// Renders the browsing observation.
///
/// Sections appear in a fixed order, each under a `♦<name>` heading and
/// separated by a blank line: Question, Quotes, Past actions, Title, then
/// `Scrollbar: <first> - <last>` directly followed by Text, and finally
/// `Actions left: <n>` followed by `Next action`.
pub fn render_observation(state: &BrowserState) -> Result<String, EnvError> {
    state.require_browsing()?;
    let page = state.current_page();
    let first = state.viewport_start();
    let visible: Vec<&str> = page.body[first..state.viewport_end()]
        .iter()
        .map(|l| l.text.as_str())
        .collect();

    let render = |shown: usize| {
        let last = if shown == 0 { first } else { first + shown - 1 };
        let mut blocks: Vec<String> = Vec::with_capacity(6);
        blocks.push(format!("{SECTION_MARK}Question\n{}", state.question()));
        let mut quotes = format!("{SECTION_MARK}Quotes");
        for (i, q) in state.quotes().iter().enumerate() {
            if i > 0 {
                quotes.push('\n');
            }
            quotes.push_str(&format!("\nFrom {} ({})", q.page_title, q.page_domain));
            for line in q.extract.split('\n') {
                quotes.push_str("\n> ");
                quotes.push_str(line);
            }
        }
        blocks.push(quotes);
        let mut past = format!("{SECTION_MARK}Past actions");
        for a in state.past_actions() {
            past.push('\n');
            past.push_str(a);
        }
        blocks.push(past);
        blocks.push(format!("{SECTION_MARK}Title\n{}", page.title_line));
        let mut text = format!("{SECTION_MARK}Scrollbar: {first} - {last}\n{SECTION_MARK}Text");
        for line in &visible[..shown] {
            text.push('\n');
            text.push_str(line);
        }
        blocks.push(text);
        blocks.push(format!(
            "{SECTION_MARK}Actions left: {}\n{SECTION_MARK}Next action",
            state.actions_left()
        ));
        blocks.join("\n\n")
    };

    let mut shown = visible.len();
    let mut out = render(shown);
    if let Some(cap) = state.config().max_observation_chars {
        while shown > 0 && out.chars().count() > cap {
            shown -= 1;
            out = render(shown);
        }
    }
    Ok(out)
}

/// Renders the answer-phase prompt: `<question>◼` followed by each quote as
/// `[<n>] <title> (<domain>)`, a blank line, and `<extract>◼`.
pub fn render_answer_prompt(question: &str, quotes: &[Quote]) -> Result<String, EnvError> {
    if quotes.is_empty() {
        return Err(EnvError::NoQuotes);
    }
    let mut out = format!("{question}{END_MARK}");
    for (i, q) in quotes.iter().enumerate() {
        out.push_str(&format!(
            "[{}] {} ({})\n\n{}{END_MARK}",
            i + 1,
            q.page_title,
            q.page_domain,
            q.extract
        ));
    }
    Ok(out)
}

impl BrowserState {
    pub fn observation(&self) -> Result<String, EnvError> {
        render_observation(self)
    }

    pub fn answer_prompt(&self) -> Result<String, EnvError> {
        self.require_answering()?;
        render_answer_prompt(self.question(), self.quotes())
    }
}
