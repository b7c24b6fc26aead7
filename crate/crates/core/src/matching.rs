//! Find-in-page and quote matching.
//!
//! Both compare against the page text with every link marker reduced to its
//! link text, ignoring case. Quote matching also ignores whitespace entirely
//! and accepts the abbreviated `<start>━<end>` form, which selects the shortest
//! span that begins with `<start>` and ends with `<end>`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::page::{parse_link_markers, SimplifiedPage};

/// Separator of the abbreviated quote form.
pub const ABBREVIATION: char = '━';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Find,
    Quote,
}

/// Byte range into [`SimplifiedPage::text`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageMatch {
    pub span: Span,
    /// The matched text as shown with links stripped, original case and spacing.
    pub extract: String,
}

/// What to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needle<'a> {
    Exact(&'a str),
    Abbreviated { start: &'a str, end: &'a str },
}

impl<'a> Needle<'a> {
    /// Interprets `text` the way a quote command does.
    pub fn for_quote(text: &'a str) -> Self {
        let mut parts = text.split(ABBREVIATION);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(start), Some(end), None) if !start.trim().is_empty() && !end.trim().is_empty() => {
                Needle::Abbreviated { start, end }
            }
            _ => Needle::Exact(text),
        }
    }
}

/// Link-stripped view of a page: each visible char with its byte range in the
/// original text.
struct StrippedView {
    chars: Vec<(char, usize, usize)>,
}

impl StrippedView {
    fn new(text: &str) -> Self {
        let mut chars = Vec::with_capacity(text.len());
        let push_range = |chars: &mut Vec<(char, usize, usize)>, from: usize, to: usize| {
            for (i, c) in text[from..to].char_indices() {
                let at = from + i;
                chars.push((c, at, at + c.len_utf8()));
            }
        };
        let mut last = 0;
        for m in parse_link_markers(text) {
            push_range(&mut chars, last, m.start);
            // `【<id>†<text>...` : link text starts after the first separator.
            let inner = &text[m.start..m.end];
            let sep = inner.find(crate::page::LINK_SEP).expect("marker has separator");
            let text_start = m.start + sep + crate::page::LINK_SEP.len_utf8();
            push_range(&mut chars, text_start, text_start + m.text.len());
            last = m.end;
        }
        push_range(&mut chars, last, text.len());
        Self { chars }
    }

    /// Lowercased chars, each tagged with its index in `self.chars`.
    fn normalized(&self, skip_whitespace: bool) -> Vec<(char, usize)> {
        let mut out = Vec::with_capacity(self.chars.len());
        for (i, &(c, _, _)) in self.chars.iter().enumerate() {
            if skip_whitespace && c.is_whitespace() {
                continue;
            }
            for lc in c.to_lowercase() {
                out.push((lc, i));
            }
        }
        out
    }
}

fn normalize_needle(needle: &str, skip_whitespace: bool) -> Vec<char> {
    needle
        .chars()
        .filter(|c| !(skip_whitespace && c.is_whitespace()))
        .flat_map(char::to_lowercase)
        .collect()
}

fn occurrences<'a>(
    hay: &'a [(char, usize)],
    needle: &'a [char],
) -> impl Iterator<Item = usize> + 'a {
    let n = needle.len();
    (0..(hay.len() + 1).saturating_sub(n))
        .filter(move |&i| n > 0 && hay[i..i + n].iter().map(|&(c, _)| c).eq(needle.iter().copied()))
}

/// Locates `needle` at or after byte `min_offset` of the page text.
pub fn locate(page: &SimplifiedPage, needle: Needle<'_>, mode: MatchMode, min_offset: usize) -> Option<PageMatch> {
    let text = page.text();
    let view = StrippedView::new(&text);
    let skip_ws = mode == MatchMode::Quote;
    let hay = view.normalized(skip_ws);
    let starts_ok = |i: usize| view.chars[hay[i].1].1 >= min_offset;

    let (first, last) = match needle {
        Needle::Exact(s) => {
            let pat = normalize_needle(s, skip_ws);
            let i = occurrences(&hay, &pat).find(|&i| starts_ok(i))?;
            (i, i + pat.len() - 1)
        }
        Needle::Abbreviated { start, end } => {
            let head = normalize_needle(start, skip_ws);
            let tail = normalize_needle(end, skip_ws);
            if head.is_empty() || tail.is_empty() {
                return None;
            }
            let tails: Vec<usize> = occurrences(&hay, &tail).collect();
            let mut best: Option<(usize, usize)> = None;
            for p in occurrences(&hay, &head).filter(|&i| starts_ok(i)) {
                let from = p + head.len();
                let k = tails.partition_point(|&q| q < from);
                if let Some(&q) = tails.get(k) {
                    let last = q + tail.len() - 1;
                    if best.is_none_or(|(bp, bl)| last - p < bl - bp) {
                        best = Some((p, last));
                    }
                }
            }
            best?
        }
    };
    let (ci, cj) = (hay[first].1, hay[last].1);
    let extract: String = view.chars[ci..=cj].iter().map(|&(c, _, _)| c).collect();
    Some(PageMatch {
        span: Span {
            start: view.chars[ci].1,
            end: view.chars[cj].2,
        },
        extract,
    })
}

/// Searches the whole page for `needle`. In quote mode, `start━end` is the
/// abbreviated form.
pub fn match_in_page(page: &SimplifiedPage, needle: &str, mode: MatchMode) -> Option<Span> {
    let needle = match mode {
        MatchMode::Find => Needle::Exact(needle),
        MatchMode::Quote => Needle::for_quote(needle),
    };
    locate(page, needle, mode, 0).map(|m| m.span)
}
