//! Minimal absolute-URL handling: host extraction and reference resolution.
//!
//! Only what page simplification needs. Hosts are returned as written
//! (lowercased), so `www.` prefixes are preserved.

use alloc::format;
use alloc::string::{String, ToString};

/// Splits `scheme://authority/rest` into its three parts.
fn split(url: &str) -> Option<(&str, &str, &str)> {
    let colon = url.find("://")?;
    let scheme = &url[..colon];
    if scheme.is_empty()
        || !scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
    {
        return None;
    }
    let after = &url[colon + 3..];
    let end = after.find(['/', '?', '#']).unwrap_or(after.len());
    Some((scheme, &after[..end], &after[end..]))
}

/// Lowercased host of an absolute URL, without userinfo or port.
pub fn host(url: &str) -> Option<String> {
    let (_, authority, _) = split(url)?;
    let authority = authority.rsplit('@').next().unwrap_or(authority);
    let host = if let Some(rest) = authority.strip_prefix('[') {
        // IPv6 literal
        rest.split(']').next().unwrap_or(rest)
    } else {
        authority.split(':').next().unwrap_or(authority)
    };
    if host.is_empty() {
        None
    } else {
        Some(host.to_ascii_lowercase())
    }
}

/// Host of `url`, or the empty string when it has none.
pub fn domain_of(url: &str) -> String {
    host(url).unwrap_or_default()
}

pub fn is_absolute(url: &str) -> bool {
    split(url).is_some()
}

pub fn is_http(url: &str) -> bool {
    matches!(split(url), Some((s, a, _)) if !a.is_empty() && (s.eq_ignore_ascii_case("http") || s.eq_ignore_ascii_case("https")))
}

/// Resolves `reference` against the absolute `base`.
///
/// Returns `None` for references that cannot name a fetchable page
/// (`javascript:`, `mailto:`, fragment-only, empty).
pub fn resolve(base: &str, reference: &str) -> Option<String> {
    let reference = reference.trim();
    if reference.is_empty() || reference.starts_with('#') {
        return None;
    }
    if is_absolute(reference) {
        return Some(reference.to_string());
    }
    if let Some(colon) = reference.find(':') {
        // Some other scheme (mailto:, javascript:, data:, ...).
        let head = &reference[..colon];
        if !head.contains(['/', '?', '#']) {
            return None;
        }
    }
    let (scheme, authority, rest) = split(base)?;
    if let Some(r) = reference.strip_prefix("//") {
        return Some(format!("{scheme}://{r}"));
    }
    if reference.starts_with('/') {
        return Some(format!("{scheme}://{authority}{}", normalize_path(reference)));
    }
    let base_path = rest.split(['?', '#']).next().unwrap_or("");
    if reference.starts_with('?') {
        let path = if base_path.is_empty() { "/" } else { base_path };
        return Some(format!("{scheme}://{authority}{path}{reference}"));
    }
    let dir = match base_path.rfind('/') {
        Some(i) => &base_path[..=i],
        None => "/",
    };
    let joined = format!("{dir}{reference}");
    Some(format!("{scheme}://{authority}{}", normalize_path(&joined)))
}

/// Removes `.` and `..` segments from a path (query/fragment untouched).
fn normalize_path(path_and_more: &str) -> String {
    let split_at = path_and_more.find(['?', '#']).unwrap_or(path_and_more.len());
    let (path, tail) = path_and_more.split_at(split_at);
    let mut out: alloc::vec::Vec<&str> = alloc::vec::Vec::new();
    let segments: alloc::vec::Vec<&str> = path.split('/').skip(1).collect();
    let last = segments.len().saturating_sub(1);
    let mut trailing_slash = false;
    for (i, seg) in segments.iter().enumerate() {
        match *seg {
            "." => trailing_slash = i == last,
            ".." => {
                out.pop();
                trailing_slash = i == last;
            }
            s => {
                out.push(s);
                trailing_slash = false;
            }
        }
    }
    let mut result = String::new();
    for seg in &out {
        result.push('/');
        result.push_str(seg);
    }
    if trailing_slash || result.is_empty() {
        result.push('/');
    }
    result.push_str(tail);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_keeps_www() {
        assert_eq!(
            host("https://www.birdsoutsidemywindow.org/2010/07/02/gifts/").as_deref(),
            Some("www.birdsoutsidemywindow.org")
        );
        assert_eq!(host("http://user@Example.COM:8080/x").as_deref(), Some("example.com"));
        assert_eq!(host("not a url"), None);
    }

    #[test]
    fn resolves_relative_references() {
        let base = "https://example.com/a/b/page.html?q=1";
        assert_eq!(resolve(base, "other.html").unwrap(), "https://example.com/a/b/other.html");
        assert_eq!(resolve(base, "../up.html").unwrap(), "https://example.com/a/up.html");
        assert_eq!(resolve(base, "/root").unwrap(), "https://example.com/root");
        assert_eq!(resolve(base, "//cdn.net/x").unwrap(), "https://cdn.net/x");
        assert_eq!(resolve(base, "?p=2").unwrap(), "https://example.com/a/b/page.html?p=2");
        assert_eq!(resolve(base, "https://z.org/").unwrap(), "https://z.org/");
        assert_eq!(resolve(base, "#frag"), None);
        assert_eq!(resolve(base, "mailto:a@b.c"), None);
        assert_eq!(resolve(base, "javascript:void(0)"), None);
    }
}
