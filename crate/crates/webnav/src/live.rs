//! Live backend: a JSON web-search endpoint plus plain HTTP fetches.

use std::collections::HashMap;
use std::io::Read;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::CONTENT_TYPE;
use reqwest::Url;
use serde_json::Value;
use webnav_core::url::domain_of;
use webnav_core::{FetchedContent, SearchResult, WebBackend};

/// Environment variable holding the search API key.
pub const SEARCH_KEY_ENV: &str = "WEBNAV_SEARCH_KEY";

#[derive(Debug, Clone)]
pub struct LiveConfig {
    /// Queried as `GET <endpoint>?q=<query>&count=<n>`.
    pub search_endpoint: String,
    pub api_key: Option<String>,
    /// Request header that carries the key.
    pub key_header: String,
    pub timeout: Duration,
    /// Larger bodies are truncated to this many bytes.
    pub max_body_bytes: usize,
    /// Concurrent fetches allowed per domain.
    pub per_domain_limit: usize,
}

impl LiveConfig {
    /// Defaults with the key read from [`SEARCH_KEY_ENV`].
    pub fn from_env(search_endpoint: impl Into<String>) -> Self {
        Self {
            search_endpoint: search_endpoint.into(),
            api_key: std::env::var(SEARCH_KEY_ENV).ok().filter(|k| !k.is_empty()),
            key_header: "Ocp-Apim-Subscription-Key".into(),
            timeout: Duration::from_secs(10),
            max_body_bytes: 2 * 1024 * 1024,
            per_domain_limit: 2,
        }
    }
}

/// Counting semaphore keyed by domain.
#[derive(Debug)]
struct DomainLimiter {
    limit: usize,
    in_flight: Mutex<HashMap<String, usize>>,
    freed: Condvar,
}

struct Permit<'a> {
    limiter: &'a DomainLimiter,
    domain: String,
}

impl DomainLimiter {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            in_flight: Mutex::new(HashMap::new()),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self, domain: &str) -> Permit<'_> {
        let mut map = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while map.get(domain).copied().unwrap_or(0) >= self.limit {
            map = self.freed.wait(map).unwrap_or_else(|e| e.into_inner());
        }
        *map.entry(domain.to_string()).or_insert(0) += 1;
        Permit {
            limiter: self,
            domain: domain.to_string(),
        }
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut map = self.limiter.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(n) = map.get_mut(&self.domain) {
            *n -= 1;
            if *n == 0 {
                map.remove(&self.domain);
            }
        }
        self.limiter.freed.notify_all();
    }
}

#[derive(Debug)]
pub struct LiveBackend {
    config: LiveConfig,
    client: Client,
    limiter: DomainLimiter,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, reqwest::Error> {
        let client = Client::builder()
            .timeout(config.timeout)
            .user_agent(concat!("webnav/", env!("CARGO_PKG_VERSION")))
            .build()?;
        Ok(Self {
            limiter: DomainLimiter::new(config.per_domain_limit),
            config,
            client,
        })
    }
}

fn str_field<'a>(item: &'a Value, keys: &[&str]) -> Option<&'a str> {
    keys.iter().find_map(|k| item.get(*k).and_then(Value::as_str))
}

/// Maps common search-API response shapes to results: `webPages.value`,
/// `web.results`, `results`, or a bare array, with title under `name` or
/// `title` and snippet under `snippet` or `description`.
pub fn parse_search_response(body: &Value) -> Vec<SearchResult> {
    let items = body
        .pointer("/webPages/value")
        .or_else(|| body.pointer("/web/results"))
        .or_else(|| body.get("results"))
        .unwrap_or(body)
        .as_array();
    items
        .into_iter()
        .flatten()
        .filter_map(|item| {
            Some(SearchResult {
                title: str_field(item, &["name", "title"])?.to_string(),
                url: str_field(item, &["url", "link"])?.to_string(),
                snippet: str_field(item, &["snippet", "description"]).unwrap_or("").to_string(),
            })
        })
        .collect()
}

impl WebBackend for LiveBackend {
    fn search_results(&self, query: &str, count: usize) -> Result<Vec<SearchResult>, String> {
        let url = Url::parse_with_params(
            &self.config.search_endpoint,
            &[("q", query), ("count", &count.to_string())],
        )
        .map_err(|e| format!("bad search endpoint: {e}"))?;
        let mut request = self.client.get(url);
        if let Some(key) = &self.config.api_key {
            request = request.header(self.config.key_header.as_str(), key);
        }
        let response = request
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| e.to_string())?;
        let bytes = response.bytes().map_err(|e| e.to_string())?;
        let body: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
        let mut results = parse_search_response(&body);
        results.truncate(count);
        Ok(results)
    }

    fn fetch_content(&self, url: &str) -> Result<FetchedContent, String> {
        let _permit = self.limiter.acquire(&domain_of(url));
        let response = self
            .client
            .get(url)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| e.to_string())?;
        let content_type = response
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("text/html")
            .to_string();
        let mut body = Vec::new();
        response
            .take(self.config.max_body_bytes as u64)
            .read_to_end(&mut body)
            .map_err(|e| e.to_string())?;
        Ok(FetchedContent::from_mime(&content_type, body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn parses_response_shapes() {
        let bing = json!({"webPages": {"value": [{"name": "A", "url": "https://a.org", "snippet": "sa"}]}});
        let generic = json!({"results": [{"title": "B", "link": "https://b.org", "description": "sb"}, {"title": "no url"}]});
        assert_eq!(parse_search_response(&bing)[0].title, "A");
        let g = parse_search_response(&generic);
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].url.as_str(), g[0].snippet.as_str()), ("https://b.org", "sb"));
        assert!(parse_search_response(&json!({"other": 1})).is_empty());
    }

    #[test]
    fn limiter_caps_concurrency_per_domain() {
        let limiter = Arc::new(DomainLimiter::new(2));
        let active = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let threads: Vec<_> = (0..6)
            .map(|_| {
                let (limiter, active, peak) = (limiter.clone(), active.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _p = limiter.acquire("x.org");
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(20));
                    active.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        // A different domain is never blocked by x.org.
        drop(limiter.acquire("y.org"));
        for t in threads {
            t.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
