//! Blacklist provider handles and the fixture-backed implementation.
//!
//! Every provider answers a uniform `check` with a rate limit and timeout so
//! live clients can slot in behind the same interface; the test suite and
//! the offline CLI default use deny-list fixture files
//! (`blacklist_<provider>.txt`, one URL or domain per line, `#` comments).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::labeling::{default_provider_category, default_provider_level};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupLevel {
    /// Receives the full expanded URL.
    Url,
    /// Receives the registrable domain of the URL (SURBL-style).
    Domain,
}

/// A blacklist service handle. Implementations must be safe for concurrent
/// use; queries for distinct URLs may run in parallel up to the rate limit.
pub trait BlacklistProvider: Send + Sync {
    fn id(&self) -> &str;
    fn level(&self) -> LookupLevel;
    /// Maximum sustained requests per second a caller should issue.
    fn rate_limit(&self) -> f64 {
        f64::INFINITY
    }
    fn timeout(&self) -> Duration {
        Duration::from_secs(10)
    }
    /// `Ok(Some(category))` on a hit, `Ok(None)` on a clean miss, `Err` on
    /// lookup failure (never treated as a hit by callers).
    fn check(&self, query: &str) -> Result<Option<String>>;
}

/// Deny-list replay of one provider from a fixture file.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    id: String,
    level: LookupLevel,
    category: String,
    entries: BTreeSet<String>,
}

impl FixtureProvider {
    pub fn new(id: &str, level: LookupLevel, category: &str, entries: BTreeSet<String>) -> Self {
        FixtureProvider {
            id: id.to_string(),
            level,
            category: category.to_string(),
            entries,
        }
    }

    /// Load `blacklist_<id>.txt`. The id decides the lookup level and hit
    /// category (surbl is domain-level; unknown ids default to URL-level).
    pub fn from_file(path: &Path) -> Result<FixtureProvider> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let id = name
            .strip_prefix("blacklist_")
            .and_then(|rest| rest.strip_suffix(".txt"))
            .ok_or_else(|| {
                Error::invariant(
                    "blacklist fixture",
                    format!("{name:?} is not named blacklist_<provider>.txt"),
                )
            })?
            .to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let level = default_provider_level(&id);
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| match level {
                LookupLevel::Domain => l.to_ascii_lowercase(),
                LookupLevel::Url => l.to_string(),
            })
            .collect();
        Ok(FixtureProvider {
            category: default_provider_category(&id).to_string(),
            level,
            id,
            entries,
        })
    }

    /// All `blacklist_*.txt` fixtures in a directory, sorted by provider id.
    pub fn discover(dir: &Path) -> Result<Vec<FixtureProvider>> {
        let mut providers = Vec::new();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with("blacklist_") && name.ends_with(".txt") {
                providers.push(FixtureProvider::from_file(&path)?);
            }
        }
        providers.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(providers)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl BlacklistProvider for FixtureProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn level(&self) -> LookupLevel {
        self.level
    }

    fn check(&self, query: &str) -> Result<Option<String>> {
        let key = match self.level {
            LookupLevel::Domain => query.to_ascii_lowercase(),
            LookupLevel::Url => query.to_string(),
        };
        Ok(self.entries.contains(&key).then(|| self.category.clone()))
    }
}

/// Legitimate-domain whitelist; suppresses domain-level malicious evidence.
#[derive(Debug, Clone, Default)]
pub struct Whitelist {
    domains: BTreeSet<String>,
}

impl Whitelist {
    pub fn new(domains: BTreeSet<String>) -> Self {
        Whitelist { domains }
    }

    /// One domain per line, `#` comments.
    pub fn from_file(path: &Path) -> Result<Whitelist> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Whitelist {
            domains: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_ascii_lowercase)
                .collect(),
        })
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(&domain.to_ascii_lowercase())
    }
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;
    use chrono::Utc;

    use super::*;
    use crate::labeling::{query_blacklists, LabelValue, LinkStateKind};

    fn boxed(p: FixtureProvider) -> Box<dyn BlacklistProvider> {
        Box::new(p)
    }

    fn at() -> chrono::DateTime<Utc> {
        Utc.with_ymd_and_hms(2013, 10, 20, 12, 0, 0).unwrap()
    }

    #[test]
    fn domain_provider_matches_registrable_domain_of_url() {
        let surbl = FixtureProvider::new(
            "surbl",
            LookupLevel::Domain,
            "spam",
            ["timesfancy.in".to_string()].into(),
        );
        let providers = vec![boxed(surbl)];
        let verdicts = query_blacklists("http://a.timesfancy.in/x?y=1", &providers, None, at());
        assert_eq!(verdicts.len(), 1);
        assert!(verdicts[0].hit);
        assert_eq!(verdicts[0].provider, "surbl");
        assert_eq!(verdicts[0].category.as_deref(), Some("spam"));
    }

    #[test]
    fn url_provider_needs_exact_url() {
        let sb = FixtureProvider::new(
            "safebrowsing",
            LookupLevel::Url,
            "malware",
            ["http://evil.example.com/payload".to_string()].into(),
        );
        let providers = vec![boxed(sb)];
        let hit = query_blacklists("http://evil.example.com/payload", &providers, None, at());
        assert!(hit[0].hit);
        let miss = query_blacklists("http://evil.example.com/other", &providers, None, at());
        assert!(!miss[0].hit);
        assert_eq!(miss[0].category, None);
    }

    #[test]
    fn empty_providers_all_miss() {
        let providers: Vec<Box<dyn BlacklistProvider>> = vec![
            boxed(FixtureProvider::new("a", LookupLevel::Url, "malware", BTreeSet::new())),
            boxed(FixtureProvider::new("b", LookupLevel::Domain, "spam", BTreeSet::new())),
        ];
        let verdicts = query_blacklists("http://x.example.com/", &providers, None, at());
        assert!(verdicts.iter().all(|v| !v.hit && v.category.is_none()));
    }

    #[test]
    fn failing_provider_yields_unknown_miss() {
        struct Broken;
        impl BlacklistProvider for Broken {
            fn id(&self) -> &str {
                "broken"
            }
            fn level(&self) -> LookupLevel {
                LookupLevel::Url
            }
            fn check(&self, _query: &str) -> Result<Option<String>> {
                Err(crate::Error::Provider {
                    provider: "broken".to_string(),
                    message: "timeout".to_string(),
                })
            }
        }
        let providers: Vec<Box<dyn BlacklistProvider>> = vec![Box::new(Broken)];
        let verdicts = query_blacklists("http://x.example.com/", &providers, None, at());
        assert!(!verdicts[0].hit);
        assert_eq!(verdicts[0].category.as_deref(), Some("unknown"));
        assert!(verdicts[0].is_well_formed());
    }

    #[test]
    fn whitelist_suppresses_domain_evidence_only() {
        let surbl = FixtureProvider::new(
            "surbl",
            LookupLevel::Domain,
            "spam",
            ["example.org".to_string()].into(),
        );
        let sb = FixtureProvider::new(
            "safebrowsing",
            LookupLevel::Url,
            "malware",
            ["http://a.example.org/bad".to_string()].into(),
        );
        let providers: Vec<Box<dyn BlacklistProvider>> = vec![boxed(surbl), boxed(sb)];
        let wl = Whitelist::new(["example.org".to_string()].into());

        // Domain-level evidence alone: suppressed by the whitelist.
        let v = query_blacklists("http://a.example.org/fine", &providers, Some(&wl), at());
        let state = crate::labeling::LinkState {
            state: LinkStateKind::Active,
            observed_at: at(),
        };
        assert_eq!(
            crate::labeling::label_instance(&v, &state).value,
            LabelValue::Benign
        );

        // URL-level evidence still fires on the whitelisted domain.
        let v = query_blacklists("http://a.example.org/bad", &providers, Some(&wl), at());
        let label = crate::labeling::label_instance(&v, &state);
        assert_eq!(label.value, LabelValue::Malicious);
        assert_eq!(label.sources, vec!["safebrowsing"]);
    }

    #[test]
    fn fixture_files_parse_comments_and_discover_sorted() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("blacklist_surbl.txt"),
            "# spam domains\nTimesfancy.in\n\nbad.example\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("blacklist_phishtank.txt"),
            "http://phish.example/login\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("probes.jsonl"), "").unwrap();

        let providers = FixtureProvider::discover(dir.path()).unwrap();
        assert_eq!(
            providers.iter().map(|p| p.id()).collect::<Vec<_>>(),
            vec!["phishtank", "surbl"]
        );
        let surbl = &providers[1];
        assert_eq!(surbl.level(), LookupLevel::Domain);
        assert_eq!(surbl.len(), 2);
        assert_eq!(
            surbl.check("timesfancy.in").unwrap().as_deref(),
            Some("spam")
        );
    }
}
