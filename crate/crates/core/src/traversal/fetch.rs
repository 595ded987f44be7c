use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use thiserror::Error;
use url::Url;

pub const TURTLE_MEDIA_TYPE: &str = "text/turtle";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    File,
    Http,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::File => "file",
            Scheme::Http => "http",
        }
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{iri}: expected a {expected} IRI")]
    SchemeMismatch { iri: String, expected: &'static str },
    #[error("{iri}: {source}")]
    Io {
        iri: String,
        #[source]
        source: io::Error,
    },
    #[error("{iri}: HTTP status {status}")]
    Status { iri: String, status: u16 },
    #[error("{iri}: request timed out")]
    Timeout { iri: String },
    #[error("{iri}: {message}")]
    Transport { iri: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedDocument {
    pub body: Vec<u8>,
    pub media_type: String,
}

/// Dereferences documents over one scheme and counts every attempt,
/// successful or not.
#[derive(Debug)]
pub struct Fetcher {
    scheme: Scheme,
    request_timeout: Duration,
    requests: AtomicUsize,
    agent: Option<ureq::Agent>,
}

impl Fetcher {
    pub fn file() -> Self {
        Fetcher {
            scheme: Scheme::File,
            request_timeout: Duration::from_secs(30),
            requests: AtomicUsize::new(0),
            agent: None,
        }
    }

    pub fn http(request_timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(request_timeout)
            .redirects(0)
            .max_idle_connections(0)
            .build();
        Fetcher {
            scheme: Scheme::Http,
            request_timeout,
            requests: AtomicUsize::new(0),
            agent: Some(agent),
        }
    }

    /// Picks the scheme from a seed IRI.
    pub fn for_iri(iri: &str, request_timeout: Duration) -> Result<Self, FetchError> {
        match Url::parse(iri).map(|u| u.scheme().to_string()).as_deref() {
            Ok("file") => Ok(Fetcher::file().with_request_timeout(request_timeout)),
            Ok("http") => Ok(Fetcher::http(request_timeout)),
            _ => Err(FetchError::SchemeMismatch {
                iri: iri.to_string(),
                expected: "file or http",
            }),
        }
    }

    pub fn with_request_timeout(self, timeout: Duration) -> Self {
        match self.scheme {
            Scheme::File => Fetcher {
                request_timeout: timeout,
                ..self
            },
            Scheme::Http => Fetcher::http(timeout),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn request_timeout(&self) -> Duration {
        self.request_timeout
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn fetch(&self, iri: &str) -> Result<FetchedDocument, FetchError> {
        self.fetch_within(iri, self.request_timeout)
    }

    /// Fetch with a timeout no longer than `limit`.
    pub fn fetch_within(&self, iri: &str, limit: Duration) -> Result<FetchedDocument, FetchError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let mismatch = || FetchError::SchemeMismatch {
            iri: iri.to_string(),
            expected: self.scheme.name(),
        };
        let url = Url::parse(iri).map_err(|_| mismatch())?;
        if url.scheme() != self.scheme.name() {
            return Err(mismatch());
        }
        match self.scheme {
            Scheme::File => {
                let path: PathBuf = url.to_file_path().map_err(|_| mismatch())?;
                let body = fs::read(&path).map_err(|source| FetchError::Io {
                    iri: iri.to_string(),
                    source,
                })?;
                Ok(FetchedDocument {
                    media_type: media_type_for_path(url.path()).to_string(),
                    body,
                })
            }
            Scheme::Http => self.fetch_http(iri, limit.min(self.request_timeout)),
        }
    }

    fn fetch_http(&self, iri: &str, timeout: Duration) -> Result<FetchedDocument, FetchError> {
        let agent = self.agent.as_ref().expect("http fetcher has an agent");
        let response = match agent
            .get(iri)
            .set("Connection", "close")
            .timeout(timeout)
            .call()
        {
            Ok(r) => r,
            Err(ureq::Error::Status(status, _)) => {
                return Err(FetchError::Status {
                    iri: iri.to_string(),
                    status,
                })
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(transport_error(iri, t.to_string()));
            }
        };
        let media_type = response.content_type().to_string();
        let mut body = Vec::new();
        response
            .into_reader()
            .read_to_end(&mut body)
            .map_err(|e| transport_error(iri, e.to_string()))?;
        Ok(FetchedDocument { body, media_type })
    }
}

fn transport_error(iri: &str, message: String) -> FetchError {
    if message.contains("timed out") || message.contains("deadline") {
        FetchError::Timeout {
            iri: iri.to_string(),
        }
    } else {
        FetchError::Transport {
            iri: iri.to_string(),
            message,
        }
    }
}

fn media_type_for_path(path: &str) -> &'static str {
    if path.ends_with(".ttl") {
        TURTLE_MEDIA_TYPE
    } else {
        "application/octet-stream"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_fetch_returns_exact_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.ttl");
        fs::write(&path, b"<a> <b> <c> .\n").unwrap();
        let f = Fetcher::file();
        let iri = Url::from_file_path(&path).unwrap().to_string();
        let doc = f.fetch(&iri).unwrap();
        assert_eq!(doc.body, b"<a> <b> <c> .\n");
        assert_eq!(doc.media_type, TURTLE_MEDIA_TYPE);
        assert_eq!(f.requests(), 1);
    }

    #[test]
    fn missing_file_still_counts() {
        let dir = tempfile::tempdir().unwrap();
        let f = Fetcher::file();
        let iri = Url::from_file_path(dir.path().join("missing.ttl"))
            .unwrap()
            .to_string();
        assert!(matches!(f.fetch(&iri), Err(FetchError::Io { .. })));
        assert_eq!(f.requests(), 1);
    }

    #[test]
    fn scheme_must_match() {
        let f = Fetcher::file();
        assert!(matches!(
            f.fetch("http://example.org/x.ttl"),
            Err(FetchError::SchemeMismatch { .. })
        ));
        assert!(Fetcher::for_iri("ftp://x/y", Duration::from_secs(1)).is_err());
        assert_eq!(
            Fetcher::for_iri("http://x/y", Duration::from_secs(1))
                .unwrap()
                .scheme(),
            Scheme::Http
        );
    }

    #[test]
    fn refused_connection_is_an_error() {
        let f = Fetcher::http(Duration::from_millis(500));
        // Port 9 (discard) is closed on any sane test host.
        assert!(f.fetch("http://127.0.0.1:9/root.ttl").is_err());
        assert_eq!(f.requests(), 1);
    }
}
