//! A forgiving HTML tokenizer.
//!
//! Produces a flat stream of start tags, end tags and text. It never fails:
//! anything that does not look like markup is text. Contents of `script`,
//! `style` and `title`-like elements are returned as a single raw text token.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token<'a> {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
    /// Undecoded text; run it through [`decode_entities`].
    Text(&'a str),
}

impl Token<'_> {
    pub(crate) fn attr(&self, key: &str) -> Option<&str> {
        match self {
            Token::Start { attrs, .. } => attrs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str()),
            _ => None,
        }
    }
}

/// Elements whose content is not markup.
const RAW_TEXT: &[&str] = &["script", "style", "title", "textarea", "xmp"];

pub(crate) struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    raw_until: Option<String>,
}

impl<'a> Tokenizer<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            raw_until: None,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_past(&mut self, pat: &str) {
        match self.rest().find(pat) {
            Some(i) => self.pos += i + pat.len(),
            None => self.pos = self.src.len(),
        }
    }

    fn raw_text(&mut self, name: String) -> Token<'a> {
        let rest = self.rest();
        let lower = rest.to_ascii_lowercase();
        let close = alloc::format!("</{name}");
        let end = lower.find(&close).unwrap_or(rest.len());
        self.pos += end;
        Token::Text(&rest[..end])
    }

    fn tag_name(&mut self) -> String {
        let rest = self.rest();
        let end = rest
            .find(|c: char| c.is_ascii_whitespace() || c == '/' || c == '>')
            .unwrap_or(rest.len());
        self.pos += end;
        rest[..end].to_ascii_lowercase()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let n = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_whitespace()).len();
        self.pos += n;
    }

    fn start_tag(&mut self) -> Token<'a> {
        self.pos += 1; // '<'
        let name = self.tag_name();
        let mut attrs = Vec::new();
        let mut self_closing = false;
        loop {
            self.skip_ws();
            let rest = self.rest();
            if rest.is_empty() {
                break;
            }
            if rest.starts_with('>') {
                self.pos += 1;
                break;
            }
            if rest.starts_with("/>") {
                self.pos += 2;
                self_closing = true;
                break;
            }
            if rest.starts_with('/') {
                self.pos += 1;
                continue;
            }
            let key_end = rest
                .find(|c: char| c.is_ascii_whitespace() || matches!(c, '=' | '>' | '/'))
                .unwrap_or(rest.len())
                .max(1.min(rest.len()));
            let key = rest[..key_end].to_ascii_lowercase();
            self.pos += key_end;
            self.skip_ws();
            let mut value = String::new();
            if self.rest().starts_with('=') {
                self.pos += 1;
                self.skip_ws();
                let rest = self.rest();
                match rest.chars().next() {
                    Some(q @ ('"' | '\'')) => {
                        let body = &rest[1..];
                        let end = body.find(q).unwrap_or(body.len());
                        value = decode_entities(&body[..end]).into_owned();
                        self.pos += 1 + end + usize::from(end < body.len());
                    }
                    _ => {
                        let end = rest
                            .find(|c: char| c.is_ascii_whitespace() || c == '>')
                            .unwrap_or(rest.len());
                        value = decode_entities(&rest[..end]).into_owned();
                        self.pos += end;
                    }
                }
            }
            if !attrs.iter().any(|(k, _)| *k == key) {
                attrs.push((key, value));
            }
        }
        if !self_closing && RAW_TEXT.contains(&name.as_str()) {
            self.raw_until = Some(name.clone());
        }
        Token::Start {
            name,
            attrs,
            self_closing,
        }
    }
}

impl<'a> Iterator for Tokenizer<'a> {
    type Item = Token<'a>;

    fn next(&mut self) -> Option<Token<'a>> {
        loop {
            if self.pos >= self.src.len() {
                return None;
            }
            if let Some(name) = self.raw_until.take() {
                let tok = self.raw_text(name);
                if matches!(tok, Token::Text(t) if t.is_empty()) {
                    continue;
                }
                return Some(tok);
            }
            let rest = self.rest();
            if let Some(after) = rest.strip_prefix('<') {
                if after.starts_with("!--") {
                    self.pos += 4;
                    self.skip_past("-->");
                    continue;
                }
                if after.starts_with('!') || after.starts_with('?') {
                    self.skip_past(">");
                    continue;
                }
                if let Some(close) = after.strip_prefix('/') {
                    if close.starts_with(|c: char| c.is_ascii_alphabetic()) {
                        self.pos += 2;
                        let name = self.tag_name();
                        self.skip_past(">");
                        return Some(Token::End { name });
                    }
                    // `</>` or `</ ...`: bogus comment
                    self.skip_past(">");
                    continue;
                }
                if after.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Some(self.start_tag());
                }
                // Stray '<' is text.
                let end = after.find('<').map_or(rest.len(), |i| i + 1);
                self.pos += end;
                return Some(Token::Text(&rest[..end]));
            }
            let end = rest.find('<').unwrap_or(rest.len());
            self.pos += end;
            return Some(Token::Text(&rest[..end]));
        }
    }
}

fn named_entity(name: &str) -> Option<&'static str> {
    Some(match name {
        "amp" => "&",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        "nbsp" => "\u{a0}",
        "ndash" => "\u{2013}",
        "mdash" => "\u{2014}",
        "hellip" => "\u{2026}",
        "lsquo" => "\u{2018}",
        "rsquo" => "\u{2019}",
        "ldquo" => "\u{201c}",
        "rdquo" => "\u{201d}",
        "laquo" => "\u{ab}",
        "raquo" => "\u{bb}",
        "copy" => "\u{a9}",
        "reg" => "\u{ae}",
        "trade" => "\u{2122}",
        "times" => "\u{d7}",
        "divide" => "\u{f7}",
        "deg" => "\u{b0}",
        "middot" => "\u{b7}",
        "bull" => "\u{2022}",
        "dagger" => "\u{2020}",
        "euro" => "\u{20ac}",
        "pound" => "\u{a3}",
        "cent" => "\u{a2}",
        "sect" => "\u{a7}",
        "para" => "\u{b6}",
        "plusmn" => "\u{b1}",
        "frac12" => "\u{bd}",
        "micro" => "\u{b5}",
        "shy" => "",
        "zwj" => "\u{200d}",
        "zwnj" => "\u{200c}",
        _ => return None,
    })
}

/// Decodes character references. Unknown or malformed references are kept
/// verbatim.
pub(crate) fn decode_entities(s: &str) -> Cow<'_, str> {
    if !s.contains('&') {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let body = &rest[1..];
        let semi = body
            .char_indices()
            .take(32)
            .find(|&(_, c)| c == ';')
            .map(|(i, _)| i);
        let decoded = semi.and_then(|semi| {
            let name = &body[..semi];
            let text = if let Some(num) = name.strip_prefix('#') {
                let code = match num.strip_prefix(['x', 'X']) {
                    Some(hex) => u32::from_str_radix(hex, 16).ok(),
                    None => num.parse::<u32>().ok(),
                };
                let ch = code.map(|c| char::from_u32(c).unwrap_or('\u{fffd}'))?;
                let mut buf = String::new();
                buf.push(ch);
                Cow::Owned(buf)
            } else {
                Cow::Borrowed(named_entity(name)?)
            };
            Some((text, semi + 2))
        });
        match decoded {
            Some((text, consumed)) => {
                out.push_str(&text);
                rest = &rest[consumed..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Cow::Owned(out)
}
