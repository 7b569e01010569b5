//! Encoder-account analytics: Suspicion Factor, Jaccard-similarity bot
//! detection, monthly activity timelines, posting-hour patterns, and
//! cross-account URL/domain/text overlap.

use std::collections::BTreeSet;

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::{LinkState, LinkStateKind};
use crate::timeutil;

/// An account's link history plus optional social posts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderProfile {
    pub account_id: String,
    #[serde(default, with = "timeutil::rfc3339::opt", skip_serializing_if = "Option::is_none")]
    pub profile_created_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub connected_accounts: Vec<ConnectedAccount>,
    /// Most recent shortening activity, sorted by created_at ascending.
    pub history: Vec<HistoryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posts: Option<Vec<Post>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectedAccount {
    pub network: String,
    pub handle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryEntry {
    pub short_hash: String,
    #[serde(with = "timeutil::rfc3339")]
    pub created_at: DateTime<Utc>,
    pub click_count: u64,
    pub state: LinkState,
}

/// One social post: tokenized text (lowercase, URL-free), the URLs it
/// carried, and when it was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Post {
    pub text_tokens: BTreeSet<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(with = "timeutil::rfc3339")]
    pub at: DateTime<Utc>,
}

/// How much of an account's history the shortener itself flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspicionReport {
    pub account_id: String,
    pub suspicion_factor: f64,
    pub history_size: usize,
    /// True iff history_size ≥ 100 and every link drew a warning page.
    pub highly_suspicious: bool,
}

/// History size at which an all-warning account is called out.
pub const HIGHLY_SUSPICIOUS_HISTORY: usize = 100;

/// Pairwise-similarity variance below this marks near-identical posting.
pub const SIMILARITY_VARIANCE_THRESHOLD: f64 = 0.00012;

/// Fraction of the account's link history that resolves to a warning page.
/// An empty history scores 0.
pub fn suspicion_factor(profile: &EncoderProfile) -> f64 {
    if profile.history.is_empty() {
        return 0.0;
    }
    let warnings = profile
        .history
        .iter()
        .filter(|h| h.state.state == LinkStateKind::Warning)
        .count();
    warnings as f64 / profile.history.len() as f64
}

pub fn suspicion_report(profile: &EncoderProfile) -> SuspicionReport {
    let factor = suspicion_factor(profile);
    let size = profile.history.len();
    SuspicionReport {
        account_id: profile.account_id.clone(),
        suspicion_factor: factor,
        history_size: size,
        highly_suspicious: size >= HIGHLY_SUSPICIOUS_HISTORY && factor == 1.0,
    }
}

/// |A∩B| / |A∪B|; two empty sets count as identical (1.0).
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// Population variance of all pairwise Jaccard similarities.
    pub variance: f64,
    pub flagged: bool,
}

/// Variance of pairwise post similarity; near-zero variance means the
/// account posts the same thing over and over. Requires ≥ 3 posts.
pub fn similarity_variance(posts: &[BTreeSet<String>]) -> Result<SimilarityReport> {
    if posts.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "similarity variance needs at least 3 posts, got {}",
            posts.len()
        )));
    }
    let mut sims = Vec::with_capacity(posts.len() * (posts.len() - 1) / 2);
    for i in 0..posts.len() {
        for j in i + 1..posts.len() {
            sims.push(jaccard(&posts[i], &posts[j]));
        }
    }
    let n = sims.len() as f64;
    let mean = sims.iter().sum::<f64>() / n;
    let variance = sims.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    Ok(SimilarityReport {
        variance,
        flagged: variance < SIMILARITY_VARIANCE_THRESHOLD,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthActivity {
    /// Calendar month as "YYYY-MM" (UTC).
    pub month: String,
    pub links_created: u64,
    pub clicks_received: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub months: Vec<MonthActivity>,
    /// Whole calendar months between first and last link creation.
    pub month_lag: u32,
}

/// Per-month link/click totals from first to last activity, idle months
/// zero-filled.
pub fn activity_timeline(profile: &EncoderProfile) -> Result<Timeline> {
    let first = profile.history.first().ok_or_else(|| {
        Error::InvalidParams(format!(
            "account {} has an empty history, no timeline",
            profile.account_id
        ))
    })?;
    let last = profile.history.last().unwrap();
    let start = timeutil::month_index(first.created_at);
    let end = timeutil::month_index(last.created_at);
    let mut months: Vec<MonthActivity> = (start..=end)
        .map(|idx| MonthActivity {
            month: timeutil::month_key(idx),
            links_created: 0,
            clicks_received: 0,
        })
        .collect();
    for entry in &profile.history {
        let slot = (timeutil::month_index(entry.created_at) - start) as usize;
        months[slot].links_created += 1;
        months[slot].clicks_received += entry.click_count;
    }
    Ok(Timeline {
        months,
        month_lag: (end - start) as u32,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostingPattern {
    /// (hour, minute) of each timestamp, UTC, input order.
    pub points: Vec<(u8, u8)>,
    /// Mean of (1 − distinct minutes/60) and (1 − distinct hours/24); high
    /// values mean the account posts on a clock. Reported only — never a
    /// classification feature.
    pub automation_score: f64,
}

pub fn posting_pattern(timestamps: &[DateTime<Utc>]) -> Result<PostingPattern> {
    if timestamps.is_empty() {
        return Err(Error::InvalidParams(
            "posting pattern needs at least one timestamp".to_string(),
        ));
    }
    let points: Vec<(u8, u8)> = timestamps
        .iter()
        .map(|t| (t.hour() as u8, t.minute() as u8))
        .collect();
    let hours: BTreeSet<u8> = points.iter().map(|p| p.0).collect();
    let minutes: BTreeSet<u8> = points.iter().map(|p| p.1).collect();
    let minute_term = 1.0 - minutes.len() as f64 / 60.0;
    let hour_term = 1.0 - hours.len() as f64 / 24.0;
    Ok(PostingPattern {
        points,
        automation_score: (minute_term + hour_term) / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOverlap {
    pub a: String,
    pub b: String,
    /// Jaccard over the two accounts' posted-URL sets.
    pub url_overlap: f64,
    /// Jaccard over the registrable domains of those URLs.
    pub domain_overlap: f64,
    /// Mean Jaccard over all cross-account post-token pairs.
    pub text_similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// Accounts that had posts, in input order.
    pub accounts: Vec<String>,
    /// One entry per unordered pair, ordered as in `accounts`.
    pub pairs: Vec<PairOverlap>,
}

/// Pairwise URL/domain/text overlap across accounts. Profiles without posts
/// are skipped; at least two must remain.
pub fn cross_account_overlap(profiles: &[&EncoderProfile]) -> Result<OverlapReport> {
    struct Side {
        id: String,
        urls: BTreeSet<String>,
        domains: BTreeSet<String>,
        tokens: Vec<BTreeSet<String>>,
    }
    let sides: Vec<Side> = profiles
        .iter()
        .filter_map(|p| {
            let posts = p.posts.as_ref()?;
            let urls: BTreeSet<String> =
                posts.iter().flat_map(|post| post.urls.iter().cloned()).collect();
            let domains = urls
                .iter()
                .filter_map(|u| crate::domain::registrable_domain(u).ok())
                .collect();
            Some(Side {
                id: p.account_id.clone(),
                urls,
                domains,
                tokens: posts.iter().map(|post| post.text_tokens.clone()).collect(),
            })
        })
        .collect();
    if sides.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "cross-account overlap needs at least 2 profiles with posts, got {}",
            sides.len()
        )));
    }
    let mut pairs = Vec::new();
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            let (a, b) = (&sides[i], &sides[j]);
            let mut text_sum = 0.0;
            let mut text_n = 0usize;
            for ta in &a.tokens {
                for tb in &b.tokens {
                    text_sum += jaccard(ta, tb);
                    text_n += 1;
                }
            }
            pairs.push(PairOverlap {
                a: a.id.clone(),
                b: b.id.clone(),
                url_overlap: jaccard(&a.urls, &b.urls),
                domain_overlap: jaccard(&a.domains, &b.domains),
                text_similarity: if text_n == 0 { 1.0 } else { text_sum / text_n as f64 },
            });
        }
    }
    Ok(OverlapReport {
        accounts: sides.into_iter().map(|s| s.id).collect(),
        pairs,
    })
}

/// Lowercase, whitespace-split tokens with URLs removed.
pub fn tokenize_post(text: &str) -> BTreeSet<String> {
    text.split_whitespace()
        .filter(|t| !t.contains("://") && !t.to_ascii_lowercase().starts_with("www."))
        .map(|t| t.to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}
