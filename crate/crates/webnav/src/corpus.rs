//! Offline corpus directories: a `corpus.json` manifest listing
//! `{url, content_type, path}` entries plus the content files it names.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use webnav_core::{FetchedContent, OfflineCorpus};

pub const MANIFEST_NAME: &str = "corpus.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub url: String,
    pub content_type: String,
    /// Relative to the corpus directory.
    pub path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("manifest lists {url} twice")]
    DuplicateUrl { url: String },
}

fn read(path: &Path) -> Result<Vec<u8>, CorpusError> {
    fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let path = dir.join(MANIFEST_NAME);
    let bytes = read(&path)?;
    serde_json::from_slice(&bytes).map_err(|source| CorpusError::Manifest { path, source })
}

/// Loads every manifest entry and builds the search index.
pub fn load_corpus(dir: &Path) -> Result<OfflineCorpus, CorpusError> {
    let mut corpus = OfflineCorpus::new();
    for entry in read_manifest(dir)? {
        if corpus.contains(&entry.url) {
            return Err(CorpusError::DuplicateUrl { url: entry.url });
        }
        let body = read(&dir.join(&entry.path))?;
        let content = if entry.content_type.trim().eq_ignore_ascii_case("application/pdf") {
            // PDFs are stored as their already-extracted text.
            FetchedContent::Pdf {
                text: Some(String::from_utf8_lossy(&body).into_owned()),
            }
        } else {
            FetchedContent::from_mime(&entry.content_type, body)
        };
        corpus.insert(&entry.url, content);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_manifest_and_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.html"), "<title>A</title><p>alpha beta</p>").unwrap();
        fs::write(dir.path().join("b.txt"), "gamma delta").unwrap();
        fs::write(
            dir.path().join(MANIFEST_NAME),
            r#"[{"url":"https://a.org/","content_type":"text/html; charset=utf-8","path":"a.html"},
                {"url":"https://b.org/b.txt","content_type":"text/plain","path":"b.txt"}]"#,
        )
        .unwrap();
        let corpus = load_corpus(dir.path()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.rank("gamma")[0].0, "https://b.org/b.txt");
    }

    #[test]
    fn reports_missing_files_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MANIFEST_NAME),
            r#"[{"url":"https://a.org/","content_type":"text/html","path":"missing.html"}]"#,
        )
        .unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(CorpusError::Io { .. })));
        fs::write(dir.path().join("a.html"), "x").unwrap();
        fs::write(
            dir.path().join(MANIFEST_NAME),
            r#"[{"url":"https://a.org/","content_type":"text/html","path":"a.html"},
                {"url":"https://a.org/","content_type":"text/html","path":"a.html"}]"#,
        )
        .unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(CorpusError::DuplicateUrl { .. })));
    }
}
