//! Link-state probes: resolve a URL to a response summary.
//!
//! Tests and the offline CLI replay `probes.jsonl` fixtures; a live HTTP
//! prober would implement the same trait. Status 0 denotes a connection
//! failure (no response at all).

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of resolving one URL: final status, final URL after redirects,
/// and the redirect targets visited (empty when no redirect happened).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResponse {
    /// HTTP status of the last response; 0 means connection failure.
    pub status: u16,
    pub final_url: String,
    #[serde(default)]
    pub chain: Vec<String>,
}

/// Resolves URLs to response summaries. Implementations must be safe for
/// concurrent use.
pub trait Probe: Send + Sync {
    fn resolve(&self, url: &str) -> Result<ProbeResponse>;
}

/// Replays recorded probe responses; URLs absent from the recording behave
/// as connection failures (and therefore classify as DEAD).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureProbe {
    responses: BTreeMap<String, ProbeResponse>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeRow {
    url: String,
    status: u16,
    final_url: String,
    #[serde(default)]
    chain: Vec<String>,
}

impl FixtureProbe {
    pub fn new(responses: BTreeMap<String, ProbeResponse>) -> Self {
        FixtureProbe { responses }
    }

    /// Load `probes.jsonl` (one `{url, status, final_url, chain}` per line).
    pub fn from_file(path: &Path) -> Result<FixtureProbe> {
        let rows: Vec<ProbeRow> = crate::corpus::io::read_jsonl(path)?;
        let mut responses = BTreeMap::new();
        for row in rows {
            responses.insert(
                row.url,
                ProbeResponse {
                    status: row.status,
                    final_url: row.final_url,
                    chain: row.chain,
                },
            );
        }
        Ok(FixtureProbe { responses })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let rows: Vec<ProbeRow> = self
            .responses
            .iter()
            .map(|(url, r)| ProbeRow {
                url: url.clone(),
                status: r.status,
                final_url: r.final_url.clone(),
                chain: r.chain.clone(),
            })
            .collect();
        crate::corpus::io::write_jsonl(path, &rows)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Probe for FixtureProbe {
    fn resolve(&self, url: &str) -> Result<ProbeResponse> {
        Ok(self.responses.get(url).cloned().unwrap_or(ProbeResponse {
            status: 0,
            final_url: url.to_string(),
            chain: Vec::new(),
        }))
    }
}

/// Warning-page matcher: a regex over the final URL. The default matches a
/// `/warning` path on any host, the pattern interstitials redirect to.
#[derive(Debug, Clone)]
pub struct WarningPattern {
    regex: Regex,
}

pub const DEFAULT_WARNING_PATTERN: &str = r"^https?://[^/]+/warning($|[/?])";

impl WarningPattern {
    pub fn new(pattern: &str) -> Result<WarningPattern> {
        let regex = Regex::new(pattern)
            .map_err(|e| Error::InvalidConfig(format!("warning pattern: {e}")))?;
        Ok(WarningPattern { regex })
    }

    pub fn matches(&self, url: &str) -> bool {
        self.regex.is_match(url)
    }
}

impl Default for WarningPattern {
    fn default() -> Self {
        WarningPattern::new(DEFAULT_WARNING_PATTERN).expect("default pattern is valid")
    }
}
