use core::fmt;

/// Counting rule for budgets expressed in token-units.
///
/// The default counts whitespace-delimited words. Deployments with a real
/// subword tokenizer can plug in their own function with [`TokenCounter::new`].
#[derive(Clone, Copy)]
pub struct TokenCounter {
    name: &'static str,
    count: fn(&str) -> usize,
}

fn count_words(text: &str) -> usize {
    text.split_whitespace().count()
}

impl TokenCounter {
    pub const WORDS: TokenCounter = TokenCounter {
        name: "words",
        count: count_words,
    };

    pub const fn new(name: &'static str, count: fn(&str) -> usize) -> Self {
        Self { name, count }
    }

    pub fn count(&self, text: &str) -> usize {
        (self.count)(text)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }
}

impl Default for TokenCounter {
    fn default() -> Self {
        Self::WORDS
    }
}

impl fmt::Debug for TokenCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("TokenCounter").field(&self.name).finish()
    }
}

impl PartialEq for TokenCounter {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for TokenCounter {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words() {
        assert_eq!(TokenCounter::WORDS.count("  many animals\tgive\ngifts "), 4);
        assert_eq!(TokenCounter::default().count(""), 0);
    }

    #[test]
    fn custom_counter() {
        let chars = TokenCounter::new("chars", |t| t.chars().count());
        assert_eq!(chars.count("abc"), 3);
        assert_ne!(chars, TokenCounter::WORDS);
    }
}
