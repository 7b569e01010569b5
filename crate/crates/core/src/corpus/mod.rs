//! Domain data model for short-link corpora, with validation.
//!
//! A corpus is a set of [`ShortLinkRecord`]s plus the profiles of the
//! accounts that created them. See [`io`] for the on-disk layout and
//! [`synth`] for the deterministic generator.

pub mod io;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::EncoderProfile;
use crate::timeutil;

/// One shortened link with its analytics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortLinkRecord {
    /// The link's own alias id.
    pub short_hash: String,
    /// Aggregate id shared by every alias of the same target URL.
    pub global_hash: String,
    pub long_url: String,
    /// Registrable domain of `long_url`.
    pub domain: String,
    #[serde(with = "timeutil::rfc3339")]
    pub created_at: DateTime<Utc>,
    pub encoders: Vec<EncoderRef>,
    pub clicks: Vec<ClickEvent>,
    pub referrers: Vec<ReferrerStat>,
    /// Joined from the corpus WHOIS table at load time, not stored per link.
    #[serde(skip)]
    pub whois: Option<WhoisRecord>,
    /// Warning interstitials shown for this link. Metadata only — never a
    /// classification feature (it is the label source).
    pub warning_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClickEvent {
    #[serde(with = "timeutil::rfc3339")]
    pub at: DateTime<Utc>,
    pub count: u64,
}

/// Click volume attributed to one referrer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferrerStat {
    pub referrer: Referrer,
    pub clicks: u64,
}

/// Where a click came from: a referring domain, or no referrer at all
/// (email clients, IM, apps, SMS).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Referrer {
    Direct,
    Domain(String),
}

/// Wire token for direct (referrer-less) traffic.
pub const DIRECT_TOKEN: &str = "DIRECT";

impl Serialize for Referrer {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Referrer::Direct => ser.serialize_str(DIRECT_TOKEN),
            Referrer::Domain(d) => ser.serialize_str(d),
        }
    }
}

impl<'de> Deserialize<'de> for Referrer {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(de)?;
        if raw == DIRECT_TOKEN {
            Ok(Referrer::Direct)
        } else if raw.is_empty() {
            Err(serde::de::Error::custom("empty referrer"))
        } else {
            Ok(Referrer::Domain(raw))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EncoderKind {
    Regular,
    Anonymous,
    Application,
}

/// One creator of a link: a named account, an anonymous token, or an
/// application (auto-posting tool).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderRef {
    pub account_id: String,
    pub kind: EncoderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub application_name: Option<String>,
}

/// WHOIS dates for a registrable domain. All optional — records are often
/// partial or withheld.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhoisRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_on: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated_on: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expires_on: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub links: Vec<ShortLinkRecord>,
    pub encoders: BTreeMap<String, EncoderProfile>,
}

/// Account ids that mean "no identity" rather than a real account.
pub fn default_anonymous_tokens() -> BTreeSet<String> {
    ["someone", "anonymous"].map(str::to_string).into()
}

impl Corpus {
    /// Check every type invariant; errors name the offending record.
    pub fn validate(&self, anonymous_tokens: &BTreeSet<String>) -> Result<()> {
        for link in &self.links {
            validate_link(link, anonymous_tokens)?;
            for enc in &link.encoders {
                if enc.kind == EncoderKind::Regular
                    && !self.encoders.contains_key(&enc.account_id)
                {
                    return Err(Error::invariant(
                        format!("link {}", link.short_hash),
                        format!(
                            "encoder account {:?} has no profile in the corpus",
                            enc.account_id
                        ),
                    ));
                }
            }
        }
        for profile in self.encoders.values() {
            validate_profile(profile)?;
        }
        Ok(())
    }
}

pub fn validate_link(link: &ShortLinkRecord, anonymous_tokens: &BTreeSet<String>) -> Result<()> {
    let subject = || format!("link {}", link.short_hash);
    if link.encoders.is_empty() {
        return Err(Error::invariant(subject(), "encoders list is empty"));
    }
    for click in &link.clicks {
        if click.at < link.created_at {
            return Err(Error::invariant(
                subject(),
                format!(
                    "click at {} precedes link creation {}",
                    timeutil::format_utc(&click.at),
                    timeutil::format_utc(&link.created_at)
                ),
            ));
        }
        if click.count == 0 {
            return Err(Error::invariant(subject(), "click event with count 0"));
        }
    }
    let expected = crate::domain::registrable_domain(&link.long_url)?;
    if link.domain != expected {
        return Err(Error::invariant(
            subject(),
            format!(
                "domain field {:?} does not match registrable domain {:?} of long_url",
                link.domain, expected
            ),
        ));
    }
    for enc in &link.encoders {
        let is_anon_token = anonymous_tokens.contains(&enc.account_id);
        match enc.kind {
            EncoderKind::Application => {
                if enc.application_name.is_none() {
                    return Err(Error::invariant(
                        subject(),
                        format!("APPLICATION encoder {:?} lacks application_name", enc.account_id),
                    ));
                }
                if is_anon_token {
                    return Err(Error::invariant(
                        subject(),
                        format!("anonymous token {:?} typed as APPLICATION", enc.account_id),
                    ));
                }
            }
            EncoderKind::Anonymous => {
                if !is_anon_token {
                    return Err(Error::invariant(
                        subject(),
                        format!(
                            "ANONYMOUS encoder {:?} is not a configured anonymous token",
                            enc.account_id
                        ),
                    ));
                }
                if enc.application_name.is_some() {
                    return Err(Error::invariant(
                        subject(),
                        "ANONYMOUS encoder carries application_name",
                    ));
                }
            }
            EncoderKind::Regular => {
                if is_anon_token {
                    return Err(Error::invariant(
                        subject(),
                        format!("anonymous token {:?} typed as REGULAR", enc.account_id),
                    ));
                }
                if enc.application_name.is_some() {
                    return Err(Error::invariant(
                        subject(),
                        "REGULAR encoder carries application_name",
                    ));
                }
            }
        }
    }
    if let Some(whois) = &link.whois {
        validate_whois(&link.domain, whois)?;
    }
    Ok(())
}

pub fn validate_whois(domain: &str, whois: &WhoisRecord) -> Result<()> {
    if let (Some(created), Some(expires)) = (whois.created_on, whois.expires_on) {
        if created > expires {
            return Err(Error::invariant(
                format!("whois for {domain}"),
                format!("created_on {created} after expires_on {expires}"),
            ));
        }
    }
    Ok(())
}

pub fn validate_profile(profile: &EncoderProfile) -> Result<()> {
    let subject = || format!("encoder {}", profile.account_id);
    for pair in profile.history.windows(2) {
        if pair[1].created_at < pair[0].created_at {
            return Err(Error::invariant(
                subject(),
                "history timestamps are not sorted non-decreasing",
            ));
        }
    }
    if let Some(posts) = &profile.posts {
        for post in posts {
            for token in &post.text_tokens {
                if token.is_empty() {
                    return Err(Error::invariant(subject(), "post contains an empty token"));
                }
                if *token != token.to_lowercase() {
                    return Err(Error::invariant(
                        subject(),
                        format!("post token {token:?} is not lowercase"),
                    ));
                }
                if token.contains("://") {
                    return Err(Error::invariant(
                        subject(),
                        format!("post token {token:?} looks like a URL"),
                    ));
                }
            }
        }
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn sample_corpus_is_valid() {
        let corpus = sample_corpus();
        corpus.validate(&default_anonymous_tokens()).unwrap();
    }

    #[test]
    fn click_before_creation_names_the_link() {
        let mut corpus = sample_corpus();
        corpus.links[0].clicks[0].at = ts("2013-09-30T23:59:59Z");
        let err = corpus.validate(&default_anonymous_tokens()).unwrap_err();
        assert!(err.to_string().contains("link 1aaaa"), "{err}");
        assert!(err.to_string().contains("precedes"), "{err}");
    }

    #[test]
    fn empty_encoders_rejected() {
        let mut corpus = sample_corpus();
        corpus.links[1].encoders.clear();
        assert!(corpus.validate(&default_anonymous_tokens()).is_err());
    }

    #[test]
    fn domain_must_match_long_url() {
        let mut corpus = sample_corpus();
        corpus.links[0].domain = "other.in".to_string();
        let err = corpus.validate(&default_anonymous_tokens()).unwrap_err();
        assert!(err.to_string().contains("registrable domain"), "{err}");
    }

    #[test]
    fn encoder_kind_invariants() {
        let tokens = default_anonymous_tokens();

        // APPLICATION without application_name.
        let mut corpus = sample_corpus();
        corpus.links[1].encoders[0].application_name = None;
        assert!(corpus.validate(&tokens).is_err());

        // Anonymous token typed as REGULAR.
        let mut corpus = sample_corpus();
        corpus.links[0].encoders[0] = EncoderRef {
            account_id: "anonymous".to_string(),
            kind: EncoderKind::Regular,
            application_name: None,
        };
        assert!(corpus.validate(&tokens).is_err());

        // ANONYMOUS with an ordinary account id.
        let mut corpus = sample_corpus();
        corpus.links[0].encoders[1].account_id = "realuser".to_string();
        assert!(corpus.validate(&tokens).is_err());

        // REGULAR encoder with no profile in the corpus.
        let mut corpus = sample_corpus();
        corpus.encoders.clear();
        let err = corpus.validate(&tokens).unwrap_err();
        assert!(err.to_string().contains("no profile"), "{err}");
    }

    #[test]
    fn whois_date_order_enforced() {
        let mut corpus = sample_corpus();
        corpus.links[0].whois = Some(WhoisRecord {
            created_on: Some(date(2014, 1, 1)),
            updated_on: None,
            expires_on: Some(date(2013, 1, 1)),
        });
        assert!(corpus.validate(&default_anonymous_tokens()).is_err());
    }

    #[test]
    fn unsorted_history_rejected() {
        let mut corpus = sample_corpus();
        let profile = corpus.encoders.get_mut("o_5af1c2").unwrap();
        profile.history.swap(0, 1);
        assert!(corpus.validate(&default_anonymous_tokens()).is_err());
    }

    #[test]
    fn referrer_token_roundtrip() {
        let direct = serde_json::to_string(&Referrer::Direct).unwrap();
        assert_eq!(direct, "\"DIRECT\"");
        let domain = serde_json::to_string(&Referrer::Domain("t.co".to_string())).unwrap();
        assert_eq!(domain, "\"t.co\"");
        assert_eq!(
            serde_json::from_str::<Referrer>("\"DIRECT\"").unwrap(),
            Referrer::Direct
        );
        assert_eq!(
            serde_json::from_str::<Referrer>("\"t.co\"").unwrap(),
            Referrer::Domain("t.co".to_string())
        );
        assert!(serde_json::from_str::<Referrer>("\"\"").is_err());
    }
}
