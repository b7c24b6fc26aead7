//! Simplified page representation and the rules for producing it.
//!
//! A page is a title line plus a body of display [`Line`]s. Links are rendered
//! inline as `【<id>†<text>†<domain>】` (the domain is omitted for same-domain
//! links), superscripts/subscripts as `^`/`_`, and images as
//! `[Image: <alt>]`. The characters used by these markers and by the
//! observation layout are reserved; any occurrence in page text is replaced.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::html::{decode_entities, Token, Tokenizer};
use crate::url;

/// Characters with structural meaning in renderings, and their stand-ins.
pub const RESERVED_SUBSTITUTIONS: [(char, char); 6] = [
    ('【', '['),
    ('】', ']'),
    ('†', '|'),
    ('◼', '#'),
    ('━', '-'),
    ('♦', '*'),
];

pub const LINK_OPEN: char = '【';
pub const LINK_CLOSE: char = '】';
pub const LINK_SEP: char = '†';

/// Domain used as the source of links on search result pages.
pub const SEARCH_RESULTS_DOMAIN: &str = "search-results";

/// Sites whose pages and links are never shown.
pub const BLOCKED_DOMAINS: [&str; 2] = ["reddit.com", "quora.com"];

/// True for `reddit.com`, `quora.com` and any of their subdomains.
pub fn is_blocked_domain(host: &str) -> bool {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    BLOCKED_DOMAINS.iter().any(|d| {
        host == *d
            || (host.len() > d.len()
                && host.ends_with(d)
                && host.as_bytes()[host.len() - d.len() - 1] == b'.')
    })
}

pub fn is_reserved(c: char) -> bool {
    RESERVED_SUBSTITUTIONS.iter().any(|&(r, _)| r == c)
}

/// Replaces every reserved character with its stand-in.
pub fn sanitize_special(text: &str) -> String {
    text.chars()
        .map(|c| {
            RESERVED_SUBSTITUTIONS
                .iter()
                .find(|&&(r, _)| r == c)
                .map_or(c, |&(_, s)| s)
        })
        .collect()
}

/// Renders a link marker. The destination domain is shown only when it
/// differs from the page's own domain.
pub fn format_link(link_id: usize, link_text: &str, target_domain: &str, source_domain: &str) -> String {
    if target_domain == source_domain {
        format!("{LINK_OPEN}{link_id}{LINK_SEP}{link_text}{LINK_CLOSE}")
    } else {
        format!("{LINK_OPEN}{link_id}{LINK_SEP}{link_text}{LINK_SEP}{target_domain}{LINK_CLOSE}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PageKind {
    Normal,
    SearchResults,
    Error,
}

/// What kind of already-extracted text is handed to [`page_from_plaintext`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentKind {
    PlainText,
    /// Text extracted from a PDF upstream.
    Pdf,
    /// An error message.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Line {
    pub text: String,
    /// Byte offset of this line in [`SimplifiedPage::text`].
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Link {
    pub id: usize,
    pub text: String,
    pub url: String,
}

impl Link {
    pub fn domain(&self) -> String {
        url::domain_of(&self.url)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimplifiedPage {
    pub url: String,
    pub domain: String,
    /// Bare page title (search pages: `Search results for: <query>`).
    pub title: String,
    pub title_line: String,
    pub body: Vec<Line>,
    pub links: Vec<Link>,
    pub kind: PageKind,
}

impl SimplifiedPage {
    pub(crate) fn assemble(
        url: String,
        domain: String,
        title: String,
        title_line: String,
        lines: Vec<String>,
        links: Vec<Link>,
        kind: PageKind,
    ) -> Self {
        let mut offset = 0;
        let body = lines
            .into_iter()
            .map(|text| {
                debug_assert!(!text.contains('\n'));
                let line = Line { text, offset };
                offset += line.text.len() + 1;
                line
            })
            .collect();
        Self {
            url,
            domain,
            title,
            title_line,
            body,
            links,
            kind,
        }
    }

    /// The page shown before anything has been searched or clicked.
    pub fn blank() -> Self {
        Self::assemble(
            "about:blank".into(),
            String::new(),
            String::new(),
            String::new(),
            Vec::new(),
            Vec::new(),
            PageKind::Normal,
        )
    }

    /// Error page carrying `message` as its body.
    pub fn error(url: &str, message: &str) -> Self {
        let domain = url::domain_of(url);
        let lines = message
            .lines()
            .map(|l| sanitize_special(l.trim_end_matches('\r')))
            .collect();
        Self::assemble(
            url.to_string(),
            domain.clone(),
            "Error".into(),
            title_line("Error", &domain),
            lines,
            Vec::new(),
            PageKind::Error,
        )
    }

    /// Body lines joined by `\n`; line offsets index into this string.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, line) in self.body.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&line.text);
        }
        out
    }

    /// Index of the line containing byte `offset` of [`Self::text`].
    pub fn line_at(&self, offset: usize) -> usize {
        match self.body.binary_search_by(|l| l.offset.cmp(&offset)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    pub fn link(&self, id: usize) -> Option<&Link> {
        self.links.get(id)
    }
}

/// `<title> (<domain>)`, or the bare title for pages without a host.
pub fn title_line(title: &str, domain: &str) -> String {
    if domain.is_empty() {
        title.to_string()
    } else {
        format!("{title} ({domain})")
    }
}

/// A link marker found in rendered text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerRef {
    pub id: usize,
    pub text: String,
    pub domain: Option<String>,
    /// Byte range of the whole marker.
    pub start: usize,
    pub end: usize,
}

/// Scans rendered text for well-formed link markers, in order.
pub fn parse_link_markers(text: &str) -> Vec<MarkerRef> {
    let mut out = Vec::new();
    let mut search = 0;
    while let Some(rel) = text[search..].find(LINK_OPEN) {
        let start = search + rel;
        let inner_start = start + LINK_OPEN.len_utf8();
        let Some(close_rel) = text[inner_start..].find(LINK_CLOSE) else {
            break;
        };
        let inner = &text[inner_start..inner_start + close_rel];
        let end = inner_start + close_rel + LINK_CLOSE.len_utf8();
        let mut parts = inner.split(LINK_SEP);
        let id = parts.next().and_then(|p| p.parse::<usize>().ok());
        let link_text = parts.next();
        let domain = parts.next();
        if let (Some(id), Some(link_text), None) = (id, link_text, parts.next()) {
            out.push(MarkerRef {
                id,
                text: link_text.to_string(),
                domain: domain.map(ToString::to_string),
                start,
                end,
            });
        }
        search = end;
    }
    out
}

/// Replaces every link marker with its link text.
pub fn strip_link_markers(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for m in parse_link_markers(text) {
        out.push_str(&text[last..m.start]);
        out.push_str(&m.text);
        last = m.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Wraps already-extracted text (plain text, PDF text, or an error message)
/// as a page. Lines are split on newlines; links are never produced.
pub fn page_from_plaintext(text: &str, page_url: &str, content_kind: ContentKind) -> SimplifiedPage {
    if content_kind == ContentKind::Error {
        return SimplifiedPage::error(page_url, text);
    }
    let domain = url::domain_of(page_url);
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| sanitize_special(l.trim_end_matches('\r')))
        .collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let title = title_from_url(page_url);
    SimplifiedPage::assemble(
        page_url.to_string(),
        domain.clone(),
        title.clone(),
        title_line(&title, &domain),
        lines,
        Vec::new(),
        PageKind::Normal,
    )
}

/// Last non-empty path segment, else the host, else the URL itself.
fn title_from_url(page_url: &str) -> String {
    let without_query = page_url.split(['?', '#']).next().unwrap_or(page_url);
    let after_scheme = without_query
        .split_once("://")
        .map_or(without_query, |(_, r)| r);
    let mut segments = after_scheme.split('/');
    let host = segments.next().unwrap_or("");
    let title = segments.rfind(|s| !s.is_empty()).unwrap_or(host);
    let title = if title.is_empty() { page_url } else { title };
    sanitize_special(&decode_entities(title))
}

/// Lossy UTF-8 front end for [`simplify_html`].
pub fn simplify_html_bytes(html: &[u8], page_url: &str) -> SimplifiedPage {
    simplify_html(&String::from_utf8_lossy(html), page_url)
}

const DROPPED: &[&str] = &[
    "script", "style", "noscript", "iframe", "form", "header", "footer", "nav", "aside", "svg",
    "template",
];

const BLOCKS: &[&str] = &[
    "address", "article", "blockquote", "body", "br", "caption", "dd", "details", "div", "dl",
    "dt", "fieldset", "figcaption", "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "html",
    "legend", "li", "main", "ol", "p", "pre", "section", "summary", "table", "tbody", "tfoot",
    "thead", "tr", "ul",
];

struct OpenLink {
    url: String,
    domain: String,
    text: String,
    pending_space: bool,
}

struct Renderer<'a> {
    base_url: &'a str,
    source_domain: String,
    lines: Vec<String>,
    line: String,
    pending_space: bool,
    link: Option<OpenLink>,
    links: Vec<Link>,
    title: String,
    in_title: bool,
    in_head: bool,
    skip: Option<(String, usize)>,
    pre_depth: usize,
}

/// Appends `text` to `buf`, collapsing whitespace runs to one space and
/// dropping leading whitespace.
fn append_collapsed(buf: &mut String, pending: &mut bool, text: &str) {
    for c in text.chars() {
        if c.is_whitespace() {
            if !buf.is_empty() {
                *pending = true;
            }
        } else {
            if *pending {
                buf.push(' ');
                *pending = false;
            }
            buf.push(c);
        }
    }
}

fn collapse(text: &str) -> String {
    let mut out = String::new();
    append_collapsed(&mut out, &mut false, text);
    out
}

impl<'a> Renderer<'a> {
    fn new(base_url: &'a str) -> Self {
        Self {
            base_url,
            source_domain: url::domain_of(base_url),
            lines: Vec::new(),
            line: String::new(),
            pending_space: false,
            link: None,
            links: Vec::new(),
            title: String::new(),
            in_title: false,
            in_head: false,
            skip: None,
            pre_depth: 0,
        }
    }

    fn flush_line(&mut self) {
        if !self.line.is_empty() {
            self.lines.push(core::mem::take(&mut self.line));
        }
        self.pending_space = false;
    }

    fn block_break(&mut self) {
        match &mut self.link {
            Some(link) => {
                if !link.text.is_empty() {
                    link.pending_space = true;
                }
            }
            None => self.flush_line(),
        }
    }

    /// Appends an atomic piece of rendered text (marker, `^`, image tag).
    fn push_inline(&mut self, piece: &str) {
        let (buf, pending) = match &mut self.link {
            Some(link) => (&mut link.text, &mut link.pending_space),
            None => (&mut self.line, &mut self.pending_space),
        };
        if *pending {
            buf.push(' ');
            *pending = false;
        }
        buf.push_str(piece);
    }

    fn push_text(&mut self, raw: &str) {
        let text = sanitize_special(&decode_entities(raw));
        if self.pre_depth > 0 && self.link.is_none() {
            let mut first = true;
            for segment in text.split('\n') {
                if !first {
                    self.flush_line();
                }
                first = false;
                append_collapsed(&mut self.line, &mut self.pending_space, segment);
            }
            return;
        }
        let (buf, pending) = match &mut self.link {
            Some(link) => (&mut link.text, &mut link.pending_space),
            None => (&mut self.line, &mut self.pending_space),
        };
        append_collapsed(buf, pending, &text);
    }

    fn open_link(&mut self, href: &str) {
        if self.link.is_some() {
            return;
        }
        let Some(target) = url::resolve(self.base_url, href) else {
            return;
        };
        if !url::is_http(&target) {
            return;
        }
        let domain = url::domain_of(&target);
        if is_blocked_domain(&domain) {
            // Rendered as plain text.
            return;
        }
        self.link = Some(OpenLink {
            url: target,
            domain,
            text: String::new(),
            pending_space: false,
        });
    }

    fn close_link(&mut self) {
        let Some(link) = self.link.take() else {
            return;
        };
        if !link.text.is_empty() {
            let id = self.links.len();
            let marker = format_link(id, &link.text, &link.domain, &self.source_domain);
            self.push_inline(&marker);
            self.links.push(Link {
                id,
                text: link.text,
                url: link.url,
            });
        }
        if link.pending_space && !self.line.is_empty() {
            self.pending_space = true;
        }
    }

    fn image(&mut self, alt: Option<&str>) {
        let alt = alt.map(|a| collapse(&sanitize_special(a))).unwrap_or_default();
        if alt.is_empty() {
            self.push_inline("[Image]");
        } else {
            self.push_inline(&format!("[Image: {alt}]"));
        }
    }

    fn token(&mut self, tok: Token<'_>) {
        if let Some((skip_name, depth)) = &mut self.skip {
            match &tok {
                Token::Start { name, self_closing, .. }
                    if name == skip_name && !self_closing =>
                {
                    *depth += 1;
                }
                Token::End { name } if name == skip_name => {
                    *depth -= 1;
                    if *depth == 0 {
                        self.skip = None;
                    }
                }
                _ => {}
            }
            return;
        }
        match tok {
            Token::Text(raw) => {
                if self.in_title {
                    if self.title.is_empty() {
                        self.title = collapse(&sanitize_special(&decode_entities(raw)));
                    }
                } else if !self.in_head {
                    self.push_text(raw);
                }
            }
            Token::Start {
                ref name,
                self_closing,
                ..
            } => {
                let name = name.as_str();
                if DROPPED.contains(&name) {
                    if !self_closing {
                        self.skip = Some((name.to_string(), 1));
                    }
                    return;
                }
                match name {
                    "head" => self.in_head = true,
                    "body" => self.in_head = false,
                    "title" => self.in_title = !self_closing,
                    "a" => {
                        if let Some(href) = tok.attr("href") {
                            let href = href.to_string();
                            self.open_link(&href);
                        }
                    }
                    "img" => {
                        if !self.in_head {
                            self.image(tok.attr("alt"));
                        }
                    }
                    "sup" => self.push_inline("^"),
                    "sub" => self.push_inline("_"),
                    "td" | "th" if !self.line.is_empty() => self.pending_space = true,
                    _ => {}
                }
                if BLOCKS.contains(&name) {
                    self.block_break();
                    if name == "li" && self.link.is_none() {
                        self.push_inline("* ");
                        self.pending_space = false;
                    }
                    if name == "pre" && !self_closing {
                        self.pre_depth += 1;
                    }
                }
            }
            Token::End { name } => match name.as_str() {
                "head" => self.in_head = false,
                "title" => self.in_title = false,
                "a" => self.close_link(),
                n if BLOCKS.contains(&n) => {
                    if n == "pre" {
                        self.pre_depth = self.pre_depth.saturating_sub(1);
                    }
                    self.block_break();
                }
                _ => {}
            },
        }
    }

    fn finish(mut self, page_url: &str) -> SimplifiedPage {
        self.close_link();
        self.flush_line();
        let domain = self.source_domain.clone();
        let title = if self.title.is_empty() {
            title_from_url(page_url)
        } else {
            self.title
        };
        SimplifiedPage::assemble(
            page_url.to_string(),
            domain.clone(),
            title.clone(),
            title_line(&title, &domain),
            self.lines,
            self.links,
            PageKind::Normal,
        )
    }
}

/// Reduces an HTML document to a [`SimplifiedPage`].
///
/// Boilerplate subtrees (scripts, styles, navigation, headers, footers, forms,
/// asides, frames) are dropped; each block element becomes its own line with
/// whitespace collapsed. Links to blocked domains become plain text.
/// Malformed markup never fails, it just degrades to text.
pub fn simplify_html(html: &str, page_url: &str) -> SimplifiedPage {
    let mut renderer = Renderer::new(page_url);
    for tok in Tokenizer::new(html) {
        renderer.token(tok);
    }
    renderer.finish(page_url)
}
