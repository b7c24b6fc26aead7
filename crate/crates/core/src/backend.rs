//! Page sources for the environment.
//!
//! A [`WebBackend`] only has to answer two raw questions: which results a
//! query returns, and what content lives at a URL. Everything the environment
//! shows is derived here from those answers: the search results page, content
//! dispatch, blocked-domain filtering and 10-gram censoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::page::{
    format_link, page_from_plaintext, sanitize_special, simplify_html_bytes, strip_link_markers,
    ContentKind, Link, PageKind, SimplifiedPage, SEARCH_RESULTS_DOMAIN,
};
pub use crate::page::is_blocked_domain;
use crate::url;

/// Length of the word n-grams that trigger censoring.
pub const CENSOR_NGRAM: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchResult {
    pub title: String,
    pub url: String,
    pub snippet: String,
}

/// Text a page must not overlap with.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CensorContext {
    pub question: String,
    pub reference_answer: Option<String>,
}

impl CensorContext {
    pub fn new(question: impl Into<String>) -> Self {
        Self {
            question: question.into(),
            reference_answer: None,
        }
    }

    pub fn with_reference_answer(mut self, answer: impl Into<String>) -> Self {
        self.reference_answer = Some(answer.into());
        self
    }

    fn forbidden_ngrams(&self) -> BTreeSet<Vec<String>> {
        let mut grams = BTreeSet::new();
        let sources = core::iter::once(self.question.as_str()).chain(self.reference_answer.as_deref());
        for source in sources {
            let toks = ngram_tokens(source);
            for w in toks.windows(CENSOR_NGRAM) {
                grams.insert(w.to_vec());
            }
        }
        grams
    }
}

/// Raw content as returned by a fetcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchedContent {
    Html(Vec<u8>),
    /// Any other text-based content type.
    Text(Vec<u8>),
    /// A PDF, with its text if the deployment has an extractor.
    Pdf { text: Option<String> },
    Unsupported { content_type: String },
}

impl FetchedContent {
    /// Classifies a body by its MIME type (parameters such as `charset` ignored).
    pub fn from_mime(content_type: &str, body: Vec<u8>) -> Self {
        let mime = content_type
            .split(';')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase();
        match mime.as_str() {
            "text/html" | "application/xhtml+xml" => FetchedContent::Html(body),
            "application/pdf" => FetchedContent::Pdf { text: None },
            "application/json" | "application/xml" | "application/javascript" => FetchedContent::Text(body),
            m if m.starts_with("text/") || m.ends_with("+xml") || m.ends_with("+json") => {
                FetchedContent::Text(body)
            }
            _ => FetchedContent::Unsupported { content_type: mime },
        }
    }

    /// Converts the content into a page (no censoring applied).
    pub fn into_page(self, page_url: &str) -> SimplifiedPage {
        match self {
            FetchedContent::Html(bytes) => simplify_html_bytes(&bytes, page_url),
            FetchedContent::Text(bytes) => {
                page_from_plaintext(&String::from_utf8_lossy(&bytes), page_url, ContentKind::PlainText)
            }
            FetchedContent::Pdf { text: Some(text) } => page_from_plaintext(&text, page_url, ContentKind::Pdf),
            FetchedContent::Pdf { text: None } => SimplifiedPage::error(
                page_url,
                &format!("Error: no PDF text extractor is available for {page_url}"),
            ),
            FetchedContent::Unsupported { content_type } => SimplifiedPage::error(
                page_url,
                &format!("Error: unsupported content type {content_type} at {page_url}"),
            ),
        }
    }
}

/// A source of search results and page content.
pub trait WebBackend {
    /// Raw results for `query`, at most `count`. `Err` carries a message for
    /// the error page.
    fn search_results(&self, query: &str, count: usize) -> Result<Vec<SearchResult>, String>;

    fn fetch_content(&self, url: &str) -> Result<FetchedContent, String>;

    /// The search results page for `query`. Never fails.
    fn search(&self, query: &str, count: usize) -> SimplifiedPage {
        match self.search_results(query, count) {
            Ok(results) => search_results_page(query, &results),
            Err(msg) => SimplifiedPage::error(&search_url(query), &format!("Error: search failed: {msg}")),
        }
    }

    /// The page at `url`, censored against `censor`. Never fails.
    fn fetch(&self, url: &str, censor: &CensorContext) -> SimplifiedPage {
        let page = if !url::is_http(url) {
            SimplifiedPage::error(url, &format!("Error: cannot fetch {url}"))
        } else if is_blocked_domain(&url::domain_of(url)) {
            SimplifiedPage::error(url, &format!("Error: {url} is on a blocked domain"))
        } else {
            match self.fetch_content(url) {
                Ok(content) => content.into_page(url),
                Err(msg) => SimplifiedPage::error(url, &format!("Error fetching {url}: {msg}")),
            }
        };
        censor_page(page, censor)
    }
}

impl<B: WebBackend + ?Sized> WebBackend for &B {
    fn search_results(&self, query: &str, count: usize) -> Result<Vec<SearchResult>, String> {
        (**self).search_results(query, count)
    }

    fn fetch_content(&self, url: &str) -> Result<FetchedContent, String> {
        (**self).fetch_content(url)
    }
}

impl<B: WebBackend + ?Sized> WebBackend for alloc::sync::Arc<B> {
    fn search_results(&self, query: &str, count: usize) -> Result<Vec<SearchResult>, String> {
        (**self).search_results(query, count)
    }

    fn fetch_content(&self, url: &str) -> Result<FetchedContent, String> {
        (**self).fetch_content(url)
    }
}

fn search_url(query: &str) -> String {
    format!("about:search?q={query}")
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Builds the results page: one link line per result followed by its snippet,
/// results separated by a blank line. Results on blocked domains or without
/// an http(s) URL are dropped before ids are assigned.
pub fn search_results_page(query: &str, results: &[SearchResult]) -> SimplifiedPage {
    let mut lines = Vec::new();
    let mut links = Vec::new();
    for result in results {
        if !url::is_http(&result.url) || is_blocked_domain(&url::domain_of(&result.url)) {
            continue;
        }
        let id = links.len();
        let mut text = collapse(&sanitize_special(&result.title));
        if text.is_empty() {
            text = sanitize_special(&result.url);
        }
        if id > 0 {
            lines.push(String::new());
        }
        lines.push(format_link(id, &text, &url::domain_of(&result.url), SEARCH_RESULTS_DOMAIN));
        let snippet = collapse(&sanitize_special(&result.snippet));
        if !snippet.is_empty() {
            lines.push(snippet);
        }
        links.push(Link {
            id,
            text,
            url: result.url.clone(),
        });
    }
    if links.is_empty() {
        lines.push("No results found.".to_string());
    }
    let title = format!("Search results for: {}", collapse(&sanitize_special(query)));
    SimplifiedPage::assemble(
        search_url(query),
        SEARCH_RESULTS_DOMAIN.into(),
        title.clone(),
        title,
        lines,
        links,
        PageKind::SearchResults,
    )
}

/// Lowercases, strips punctuation and splits on whitespace.
pub fn ngram_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// True if `tokens` shares a run of [`CENSOR_NGRAM`] tokens with the question
/// or reference answer.
pub fn overlaps_censor(tokens: &[String], censor: &CensorContext) -> bool {
    if tokens.len() < CENSOR_NGRAM {
        return false;
    }
    let forbidden = censor.forbidden_ngrams();
    !forbidden.is_empty() && tokens.windows(CENSOR_NGRAM).any(|w| forbidden.contains(w))
}

/// Replaces the page with an error page if its body shares a 10-gram with the
/// question or reference answer.
pub fn censor_page(page: SimplifiedPage, censor: &CensorContext) -> SimplifiedPage {
    let tokens = ngram_tokens(&strip_link_markers(&page.text()));
    if overlaps_censor(&tokens, censor) {
        SimplifiedPage::error(
            &page.url,
            "Error: this page was censored because it overlaps with the question.",
        )
    } else {
        page
    }
}

#[derive(Debug, Clone)]
struct CorpusDocument {
    content: FetchedContent,
    page: SimplifiedPage,
}

/// In-memory document collection with a term index. Searching is
/// deterministic: documents are ranked by the summed frequency of the query
/// terms, ties broken by URL.
#[derive(Debug, Clone, Default)]
pub struct OfflineCorpus {
    docs: BTreeMap<String, CorpusDocument>,
    index: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Snippet length in words.
const SNIPPET_WORDS: usize = 30;

impl OfflineCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or replaces) the document at `url`.
    pub fn insert(&mut self, url: &str, content: FetchedContent) {
        self.remove(url);
        let page = content.clone().into_page(url);
        let mut text = page.title.clone();
        text.push('\n');
        text.push_str(&strip_link_markers(&page.text()));
        for term in ngram_tokens(&text) {
            *self
                .index
                .entry(term)
                .or_default()
                .entry(url.to_string())
                .or_default() += 1;
        }
        self.docs.insert(url.to_string(), CorpusDocument { content, page });
    }

    pub fn remove(&mut self, url: &str) -> bool {
        if self.docs.remove(url).is_none() {
            return false;
        }
        self.index.retain(|_, postings| {
            postings.remove(url);
            !postings.is_empty()
        });
        true
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn contains(&self, url: &str) -> bool {
        self.docs.contains_key(url)
    }

    pub fn urls(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    /// Uncensored page for a stored document.
    pub fn page(&self, url: &str) -> Option<&SimplifiedPage> {
        self.docs.get(url).map(|d| &d.page)
    }

    /// Posting list of a normalized term: `(url, term frequency)`.
    pub fn postings(&self, term: &str) -> impl Iterator<Item = (&str, usize)> {
        self.index
            .get(term)
            .into_iter()
            .flat_map(|p| p.iter().map(|(u, &n)| (u.as_str(), n)))
    }

    /// Ranked `(url, score)` for a query; zero-score documents excluded.
    pub fn rank(&self, query: &str) -> Vec<(String, usize)> {
        let mut scores: BTreeMap<&str, usize> = BTreeMap::new();
        for term in ngram_tokens(query) {
            for (url, tf) in self.postings(&term) {
                *scores.entry(url).or_default() += tf;
            }
        }
        let mut ranked: Vec<(String, usize)> = scores
            .into_iter()
            .map(|(u, s)| (u.to_string(), s))
            .collect();
        // BTreeMap iteration already orders by url; the sort is stable.
        ranked.sort_by_key(|r| core::cmp::Reverse(r.1));
        ranked
    }

    fn snippet(page: &SimplifiedPage, terms: &BTreeSet<String>) -> String {
        let lines: Vec<String> = page.body.iter().map(|l| strip_link_markers(&l.text)).collect();
        // The line with the most query-term occurrences, earliest on ties.
        let hits = |l: &String| ngram_tokens(l).iter().filter(|t| terms.contains(*t)).count();
        let chosen = lines
            .iter()
            .map(|l| (hits(l), l))
            .filter(|(h, _)| *h > 0)
            .fold(None, |best: Option<(usize, &String)>, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            })
            .map(|(_, l)| l)
            .or_else(|| lines.iter().find(|l| !l.trim().is_empty()));
        let Some(line) = chosen else {
            return String::new();
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() > SNIPPET_WORDS {
            let mut s = words[..SNIPPET_WORDS].join(" ");
            s.push_str(" ...");
            s
        } else {
            words.join(" ")
        }
    }
}

impl WebBackend for OfflineCorpus {
    fn search_results(&self, query: &str, count: usize) -> Result<Vec<SearchResult>, String> {
        let terms: BTreeSet<String> = ngram_tokens(query).into_iter().collect();
        Ok(self
            .rank(query)
            .into_iter()
            .take(count)
            .map(|(url, _)| {
                let page = &self.docs[&url].page;
                SearchResult {
                    title: page.title.clone(),
                    snippet: Self::snippet(page, &terms),
                    url,
                }
            })
            .collect())
    }

    fn fetch_content(&self, url: &str) -> Result<FetchedContent, String> {
        self.docs
            .get(url)
            .map(|d| d.content.clone())
            .ok_or_else(|| format!("no document at {url}"))
    }
}
