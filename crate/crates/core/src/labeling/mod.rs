//! Ground-truth labeling: blacklist aggregation, link-state probing, and
//! domain liveness.
//!
//! A link is MALICIOUS when any blacklist hits it or the shortener resolves
//! it to a warning page; everything else is BENIGN. Lookups that fail never
//! contribute malicious evidence — they come back as misses with category
//! `"unknown"` and a logged warning.

pub mod probe;
pub mod provider;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::timeutil;

pub use probe::{FixtureProbe, Probe, ProbeResponse, WarningPattern};
pub use provider::{BlacklistProvider, FixtureProvider, LookupLevel, Whitelist};

/// One provider's answer for one URL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlacklistVerdict {
    pub provider: String,
    pub hit: bool,
    /// "phishing" | "malware" | "spam" | "unknown"; set on hits, and set to
    /// "unknown" on failed lookups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(with = "timeutil::rfc3339")]
    pub checked_at: DateTime<Utc>,
}

impl BlacklistVerdict {
    /// A verdict either hits with a category, misses cleanly, or misses with
    /// category "unknown" (the failed-lookup form).
    pub fn is_well_formed(&self) -> bool {
        matches!(
            (self.hit, self.category.as_deref()),
            (true, Some(_)) | (false, None) | (false, Some("unknown"))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LinkStateKind {
    Active,
    Warning,
    Dead,
}

/// Observed resolution state of one short link or domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    pub state: LinkStateKind,
    #[serde(with = "timeutil::rfc3339")]
    pub observed_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LabelValue {
    Malicious,
    Benign,
}

/// Ground-truth label plus the checks that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub value: LabelValue,
    /// Provider ids and/or "warning_page" that fired; `["none"]` for benign.
    pub sources: Vec<String>,
}

/// Source name recorded when the warning-page probe fires.
pub const WARNING_SOURCE: &str = "warning_page";
/// Source recorded for benign labels.
pub const BENIGN_SOURCE: &str = "none";

/// Query every provider for one URL, in order.
///
/// URL-level providers receive the full URL; domain-level providers receive
/// its registrable domain. A whitelisted domain suppresses domain-level
/// evidence, so a well-known domain abused by one bad path is not condemned
/// wholesale while exact-URL evidence still counts. Provider
/// failures yield `hit=false, category="unknown"` and a logged warning —
/// a failed lookup never labels anything malicious.
pub fn query_blacklists(
    url: &str,
    providers: &[Box<dyn BlacklistProvider>],
    whitelist: Option<&Whitelist>,
    checked_at: DateTime<Utc>,
) -> Vec<BlacklistVerdict> {
    let domain = crate::domain::registrable_domain(url).ok();
    providers
        .iter()
        .map(|p| {
            let miss = |category: Option<String>| BlacklistVerdict {
                provider: p.id().to_string(),
                hit: false,
                category,
                checked_at,
            };
            let query = match p.level() {
                LookupLevel::Url => Some(url.to_string()),
                LookupLevel::Domain => domain.clone(),
            };
            let Some(query) = query else {
                // Domain-level provider but the URL has no registrable
                // domain; nothing to look up.
                return miss(None);
            };
            if p.level() == LookupLevel::Domain {
                if let Some(wl) = whitelist {
                    if wl.contains(&query) {
                        return miss(None);
                    }
                }
            }
            match p.check(&query) {
                Ok(Some(category)) => BlacklistVerdict {
                    provider: p.id().to_string(),
                    hit: true,
                    category: Some(category),
                    checked_at,
                },
                Ok(None) => miss(None),
                Err(err) => {
                    log::warn!("provider {} failed on {query:?}: {err}", p.id());
                    miss(Some("unknown".to_string()))
                }
            }
        })
        .collect()
}

/// Resolve a short URL through the probe and classify the outcome.
///
/// WARNING iff the final URL matches the warning pattern; DEAD iff the
/// connection failed or the first hop answered ≥ 400 without redirecting;
/// ACTIVE otherwise. Probe transport errors map to DEAD.
pub fn probe_link_state(
    short_url: &str,
    probe: &dyn Probe,
    pattern: &WarningPattern,
    observed_at: DateTime<Utc>,
) -> LinkState {
    let state = match probe.resolve(short_url) {
        Err(_) => LinkStateKind::Dead,
        Ok(resp) => {
            if pattern.matches(&resp.final_url) {
                LinkStateKind::Warning
            } else if resp.status == 0 || (resp.status >= 400 && resp.chain.is_empty()) {
                LinkStateKind::Dead
            } else {
                LinkStateKind::Active
            }
        }
    };
    LinkState { state, observed_at }
}

/// Combine blacklist verdicts and the probed state into a label.
///
/// MALICIOUS iff any verdict hit or the state is WARNING; sources list every
/// firing check, or `["none"]`.
pub fn label_instance(
    verdicts: &[BlacklistVerdict],
    state: &LinkState,
) -> Label {
    let mut sources: Vec<String> = verdicts
        .iter()
        .filter(|v| v.hit)
        .map(|v| v.provider.clone())
        .collect();
    if state.state == LinkStateKind::Warning {
        sources.push(WARNING_SOURCE.to_string());
    }
    if sources.is_empty() {
        Label {
            value: LabelValue::Benign,
            sources: vec![BENIGN_SOURCE.to_string()],
        }
    } else {
        Label {
            value: LabelValue::Malicious,
            sources,
        }
    }
}

/// Liveness of one registrable domain across a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainLiveness {
    pub alive: bool,
    /// Sum of warning_count over the corpus links on this domain.
    pub total_warning_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessReport {
    pub domains: BTreeMap<String, DomainLiveness>,
    /// Dead domains / total domains (0 when the corpus has no domains).
    pub dead_fraction: f64,
    /// Summed warning_count over links whose domain is dead.
    pub dead_warning_sum: u64,
}

/// Probe `http://<domain>/` for every unique registrable domain in the
/// corpus. Probe failures count as dead.
pub fn domain_liveness_report(
    corpus: &Corpus,
    probe: &dyn Probe,
    pattern: &WarningPattern,
    observed_at: DateTime<Utc>,
) -> LivenessReport {
    let mut warnings: BTreeMap<&str, u64> = BTreeMap::new();
    for link in &corpus.links {
        *warnings.entry(link.domain.as_str()).or_insert(0) += link.warning_count;
    }
    let mut domains = BTreeMap::new();
    let mut dead = 0usize;
    let mut dead_warning_sum = 0u64;
    for (domain, total_warning_count) in warnings {
        let probed = probe_link_state(&format!("http://{domain}/"), probe, pattern, observed_at);
        let alive = probed.state != LinkStateKind::Dead;
        if !alive {
            dead += 1;
            dead_warning_sum += total_warning_count;
        }
        domains.insert(
            domain.to_string(),
            DomainLiveness {
                alive,
                total_warning_count,
            },
        );
    }
    let dead_fraction = if domains.is_empty() {
        0.0
    } else {
        dead as f64 / domains.len() as f64
    };
    LivenessReport {
        domains,
        dead_fraction,
        dead_warning_sum,
    }
}

/// The provider ids the fixture corpus ships with, with their lookup levels
/// and hit categories.
pub fn default_provider_category(id: &str) -> &'static str {
    match id {
        "safebrowsing" | "virustotal" => "malware",
        "phishtank" => "phishing",
        "surbl" => "spam",
        _ => "unknown",
    }
}

/// Domain-level provider ids; every other id is URL-level.
pub fn default_provider_level(id: &str) -> LookupLevel {
    if id == "surbl" {
        LookupLevel::Domain
    } else {
        LookupLevel::Url
    }
}

/// Convenience set used by tests and the generator.
pub fn known_provider_ids() -> BTreeSet<&'static str> {
    ["safebrowsing", "surbl", "phishtank", "virustotal"]
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;

    fn at() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2013, 10, 20, 12, 0, 0).unwrap()
    }

    fn verdict(provider: &str, hit: bool) -> BlacklistVerdict {
        BlacklistVerdict {
            provider: provider.to_string(),
            hit,
            category: hit.then(|| "malware".to_string()),
            checked_at: at(),
        }
    }

    fn state(kind: LinkStateKind) -> LinkState {
        LinkState {
            state: kind,
            observed_at: at(),
        }
    }

    #[test]
    fn any_hit_labels_malicious() {
        let verdicts = vec![
            verdict("safebrowsing", false),
            verdict("surbl", true),
            verdict("phishtank", false),
            verdict("virustotal", false),
        ];
        let label = label_instance(&verdicts, &state(LinkStateKind::Active));
        assert_eq!(label.value, LabelValue::Malicious);
        assert_eq!(label.sources, vec!["surbl"]);
    }

    #[test]
    fn warning_page_alone_labels_malicious() {
        let verdicts = vec![verdict("safebrowsing", false)];
        let label = label_instance(&verdicts, &state(LinkStateKind::Warning));
        assert_eq!(label.value, LabelValue::Malicious);
        assert_eq!(label.sources, vec![WARNING_SOURCE]);
    }

    #[test]
    fn no_evidence_labels_benign() {
        for kind in [LinkStateKind::Active, LinkStateKind::Dead] {
            let label = label_instance(&[verdict("surbl", false)], &state(kind));
            assert_eq!(label.value, LabelValue::Benign);
            assert_eq!(label.sources, vec![BENIGN_SOURCE]);
        }
    }

    #[test]
    fn verdict_well_formedness() {
        assert!(verdict("x", true).is_well_formed());
        assert!(verdict("x", false).is_well_formed());
        let failed = BlacklistVerdict {
            category: Some("unknown".to_string()),
            ..verdict("x", false)
        };
        assert!(failed.is_well_formed());
        let bad = BlacklistVerdict {
            category: Some("spam".to_string()),
            ..verdict("x", false)
        };
        assert!(!bad.is_well_formed());
        let bare_hit = BlacklistVerdict {
            category: None,
            ..verdict("x", true)
        };
        assert!(!bare_hit.is_well_formed());
    }

    proptest::proptest! {
        // Adding a hitting verdict never flips MALICIOUS → BENIGN, and
        // permuting verdicts never changes the value.
        #[test]
        fn labeling_monotone_and_permutation_stable(
            hits in proptest::collection::vec(proptest::bool::ANY, 0..6),
            warning in proptest::bool::ANY,
            rotate in 0usize..6,
        ) {
            let verdicts: Vec<BlacklistVerdict> = hits
                .iter()
                .enumerate()
                .map(|(i, &h)| verdict(&format!("p{i}"), h))
                .collect();
            let st = state(if warning { LinkStateKind::Warning } else { LinkStateKind::Active });
            let base = label_instance(&verdicts, &st);

            let mut extended = verdicts.clone();
            extended.push(verdict("extra", true));
            let ext = label_instance(&extended, &st);
            proptest::prop_assert_eq!(ext.value, LabelValue::Malicious);
            if base.value == LabelValue::Malicious {
                proptest::prop_assert_eq!(ext.value, LabelValue::Malicious);
            }

            let mut rotated = verdicts.clone();
            if !rotated.is_empty() {
                let r = rotate % rotated.len();
                rotated.rotate_left(r);
            }
            let rot = label_instance(&rotated, &st);
            proptest::prop_assert_eq!(rot.value, base.value);
            let mut a = rot.sources;
            let mut b = base.sources;
            a.sort();
            b.sort();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
