//! Deterministic synthetic-corpus generator.
//!
//! Real short-link analytics with ground truth are not redistributable, so
//! the test suite and the demo pipeline run on corpora generated here. The
//! generator plants the behavioural contrasts the detector is supposed to
//! pick up — young throwaway domains, links shortened at odd hours and
//! created right after domain registration, anonymous/application-heavy
//! encoder lists, direct-referrer click traffic, zero-click floods, bot
//! accounts whose whole history draws warning pages, and a small campaign
//! of accounts posting the same URLs — while keeping the two classes
//! overlapping enough that classification stays a statistical problem.
//!
//! Everything is a pure function of (config, seed): each unit of work draws
//! from its own child stream (see [`crate::rng`]), exact planted counts are
//! chosen by index sampling rather than coin flips, and every emitted
//! collection is ordered. Ground truth goes to a sidecar map, never into
//! the records. Alongside the corpus, the generator emits blacklist and
//! probe fixtures that recover the planted truth exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    default_anonymous_tokens, ClickEvent, Corpus, EncoderKind, EncoderRef, Referrer,
    ReferrerStat, ShortLinkRecord, WhoisRecord,
};
use crate::error::{Error, Result};
use crate::labeling::{FixtureProbe, LinkState, LinkStateKind, ProbeResponse};
use crate::profile::{ConnectedAccount, EncoderProfile, HistoryEntry, Post};
use crate::rng::child_rng;

/// Counts and planted-effect strengths for one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub benign_links: usize,
    pub malicious_links: usize,
    /// Fraction of malicious links that never get clicked.
    pub zero_click_fraction: f64,
    /// Fraction of benign links that never get clicked.
    pub benign_zero_click_fraction: f64,
    /// Fraction of malicious domains that no longer resolve.
    pub dead_domain_fraction: f64,
    /// Probability a malicious link is created between 00:00 and 05:59 UTC.
    pub odd_hour_bias: f64,
    /// Probability a clicked malicious link shows direct-referrer traffic.
    pub direct_referrer_bias: f64,
    /// Same, for benign links.
    pub benign_direct_referrer_rate: f64,
    /// Fraction of domains (each side) with no WHOIS record at all.
    pub missing_whois_fraction: f64,
    /// Accounts with ≥ 100-link, all-warning histories (Suspicion Factor 1).
    pub bot_encoders: usize,
    /// Accounts posting a shared URL pool (high pairwise overlap).
    pub campaign_accounts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            benign_links: 1000,
            malicious_links: 1000,
            zero_click_fraction: 0.4616,
            benign_zero_click_fraction: 0.05,
            dead_domain_fraction: 0.8306,
            odd_hour_bias: 0.65,
            direct_referrer_bias: 0.65,
            benign_direct_referrer_rate: 0.15,
            missing_whois_fraction: 0.08,
            bot_encoders: 3,
            campaign_accounts: 3,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("zero_click_fraction", self.zero_click_fraction),
            ("benign_zero_click_fraction", self.benign_zero_click_fraction),
            ("dead_domain_fraction", self.dead_domain_fraction),
            ("odd_hour_bias", self.odd_hour_bias),
            ("direct_referrer_bias", self.direct_referrer_bias),
            ("benign_direct_referrer_rate", self.benign_direct_referrer_rate),
            ("missing_whois_fraction", self.missing_whois_fraction),
        ];
        for (name, value) in fractions {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0,1], got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything one generation run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedArtifacts {
    pub corpus: Corpus,
    /// short_hash → planted malicious flag (the sidecar contents).
    pub truth: BTreeMap<String, bool>,
    pub fixtures: Fixtures,
}

/// Blacklist and probe fixtures that replay the planted evidence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fixtures {
    /// provider id → sorted deny-list entries (URLs or domains).
    pub blacklists: BTreeMap<String, Vec<String>>,
    pub probes: FixtureProbe,
}

impl Fixtures {
    /// Write `blacklist_<provider>.txt` files and `probes.jsonl`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (provider, entries) in &self.blacklists {
            let path = dir.join(format!("blacklist_{provider}.txt"));
            let mut text = format!("# {provider} deny list\n");
            for entry in entries {
                text.push_str(entry);
                text.push('\n');
            }
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        self.probes.save(&dir.join("probes.jsonl"))
    }
}

/// Base URL of the simulated shortener.
pub const SHORT_URL_BASE: &str = "http://sho.rt/";

/// Short URL for a link hash, as probed by the labeling stage.
pub fn short_url(short_hash: &str) -> String {
    format!("{SHORT_URL_BASE}{short_hash}")
}

fn warning_url(short_hash: &str) -> String {
    format!("{SHORT_URL_BASE}warning/{short_hash}")
}

// Link-creation window and the instant probes/observations are stamped with.
fn window_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2013, 4, 1, 0, 0, 0).unwrap()
}
const WINDOW_DAYS: i64 = 180;

fn observed_instant() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2013, 11, 1, 0, 0, 0).unwrap()
}

// Planted feature shapes. Malicious and benign ranges overlap on purpose.
const MAL_DOMAIN_AGE_DAYS: Range<i64> = 20..500;
const BEN_DOMAIN_AGE_DAYS: Range<i64> = 300..3800;
const MAL_CREATION_GAP_DAYS: Range<i64> = 0..40;
const BEN_DOMAIN_PAST_DAYS: Range<i64> = 23..1993;
const MAL_CLICK_LAG_DAYS: Range<i64> = 1..22;

const BEN_TLDS: &[&str] = &["com", "org", "net", "co.uk", "io", "de", "fr", "nl", "ca", "se"];
const MAL_TLDS: &[&str] = &["info", "biz", "tk", "ml", "ga", "cf", "in", "ru", "top", "xyz"];
const BEN_WORDS: &[&str] = &[
    "news", "blog", "shop", "media", "travel", "recipe", "photo", "cloud", "garden", "music",
    "sport", "health", "daily", "review", "kitchen", "journal",
];
const MAL_WORDS: &[&str] = &[
    "prize", "win", "free", "offer", "luck", "bonus", "deal", "cash", "gift", "promo", "rich",
    "claim", "reward", "mega", "super", "insta",
];
const SUBDOMAINS: &[&str] = &["www", "go", "m", "promo", "click", "item", "news", "best"];
const REFERRER_POOL: &[&str] = &[
    "twitter.com",
    "t.co",
    "facebook.com",
    "plus.google.com",
    "reddit.com",
    "vk.com",
    "linkedin.com",
    "tumblr.com",
];
const BEN_APPS: &[&str] = &["feedreach", "postowl", "sharegrid"];
const MAL_APPS: &[&str] = &["quickblast", "bulkshare", "linkspray", "autodrop"];
const ANON_TOKENS: &[&str] = &["someone", "anonymous"];
const CAMPAIGN_TOKENS: &[&str] = &[
    "exclusive", "prize", "winner", "claim", "your", "reward", "click", "here", "limited",
    "time", "offer", "now",
];
const BEN_POST_VOCAB: &[&str] = &[
    "just", "published", "a", "new", "post", "about", "weekend", "photos", "from", "the",
    "trip", "really", "enjoyed", "reading", "this", "great", "recipe", "today", "thoughts",
    "on", "season", "finale", "morning", "run", "coffee", "notes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Benign,
    Malicious,
}

impl Side {
    fn label(self) -> &'static str {
        match self {
            Side::Benign => "ben",
            Side::Malicious => "mal",
        }
    }
}

struct DomainInfo {
    name: String,
    whois: Option<WhoisRecord>,
    dead: bool,
}

/// Evidence that will catch one malicious link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Evidence {
    Safebrowsing,
    Phishtank,
    Virustotal,
    WarningPage,
}

/// Generate a corpus plus its truth sidecar and labeling fixtures.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<GeneratedArtifacts> {
    config.validate()?;
    if config.benign_links == 0 && config.malicious_links == 0 {
        return Ok(GeneratedArtifacts {
            corpus: Corpus::default(),
            truth: BTreeMap::new(),
            fixtures: Fixtures::default(),
        });
    }

    let ben_domains = make_domains(Side::Benign, config, seed);
    let mal_domains = make_domains(Side::Malicious, config, seed);
    let ben_accounts = make_account_names(Side::Benign, config, seed);
    let mal_accounts = make_account_names(Side::Malicious, config, seed);

    let mut hashes: BTreeSet<String> = BTreeSet::new();
    let mut links = Vec::new();
    let mut truth = BTreeMap::new();
    let mut evidence: Vec<(usize, Evidence)> = Vec::new(); // link index → evidence

    for side in [Side::Benign, Side::Malicious] {
        let (count, domains, accounts) = match side {
            Side::Benign => (config.benign_links, &ben_domains, &ben_accounts),
            Side::Malicious => (config.malicious_links, &mal_domains, &mal_accounts),
        };
        if count == 0 {
            continue;
        }
        let zero_fraction = match side {
            Side::Benign => config.benign_zero_click_fraction,
            Side::Malicious => config.zero_click_fraction,
        };
        let zero_count = ((zero_fraction * count as f64).round() as usize).min(count);
        let mut zero_rng = child_rng(seed, &format!("{}_zero_click", side.label()), 0);
        let zero_set: BTreeSet<usize> =
            rand::seq::index::sample(&mut zero_rng, count, zero_count)
                .into_iter()
                .collect();

        for i in 0..count {
            let mut rng = child_rng(seed, &format!("{}_link", side.label()), i as u64);
            let (link, ev) = make_link(
                side,
                i,
                &mut rng,
                domains,
                accounts,
                zero_set.contains(&i),
                config,
                &mut hashes,
            );
            truth.insert(link.short_hash.clone(), side == Side::Malicious);
            if let Some(ev) = ev {
                evidence.push((links.len(), ev));
            }
            links.push(link);
        }
    }

    let encoders = make_profiles(config, seed, &ben_accounts, &mal_accounts, &ben_domains);
    let corpus = Corpus { links, encoders };
    corpus.validate(&default_anonymous_tokens())?;

    let fixtures = make_fixtures(seed, &corpus, &truth, &evidence, &ben_domains, &mal_domains);

    Ok(GeneratedArtifacts {
        corpus,
        truth,
        fixtures,
    })
}

/// The corpus alone; see [`generate`] for the truth sidecar and fixtures.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<Corpus> {
    Ok(generate(config, seed)?.corpus)
}

fn make_domains(side: Side, config: &GeneratorConfig, seed: u64) -> Vec<DomainInfo> {
    let link_count = match side {
        Side::Benign => config.benign_links,
        Side::Malicious => config.malicious_links,
    };
    if link_count == 0 {
        return Vec::new();
    }
    let count = (link_count / 5).max(1);
    let missing = ((config.missing_whois_fraction * count as f64).round() as usize).min(count);
    let mut pick_rng = child_rng(seed, &format!("{}_domain_missing", side.label()), 0);
    let missing_set: BTreeSet<usize> = rand::seq::index::sample(&mut pick_rng, count, missing)
        .into_iter()
        .collect();
    let dead_set: BTreeSet<usize> = if side == Side::Malicious {
        let dead = ((config.dead_domain_fraction * count as f64).round() as usize).min(count);
        let mut dead_rng = child_rng(seed, "mal_domain_dead", 0);
        rand::seq::index::sample(&mut dead_rng, count, dead)
            .into_iter()
            .collect()
    } else {
        BTreeSet::new()
    };

    (0..count)
        .map(|i| {
            let mut rng = child_rng(seed, &format!("{}_domain", side.label()), i as u64);
            let (words, tlds) = match side {
                Side::Benign => (BEN_WORDS, BEN_TLDS),
                Side::Malicious => (MAL_WORDS, MAL_TLDS),
            };
            let w1 = words.choose(&mut rng).unwrap();
            let w2 = words.choose(&mut rng).unwrap();
            let tld = tlds.choose(&mut rng).unwrap();
            let name = format!("{w1}{w2}{i:03}.{tld}");
            let whois = if missing_set.contains(&i) {
                None
            } else {
                Some(make_whois(side, &mut rng))
            };
            DomainInfo {
                name,
                whois,
                dead: dead_set.contains(&i),
            }
        })
        .collect()
}

fn make_whois(side: Side, rng: &mut ChaCha8Rng) -> WhoisRecord {
    let start = window_start().date_naive();
    match side {
        Side::Malicious => {
            // Registered around the campaign window, short-lived.
            let created = start + Duration::days(rng.gen_range(-10..150));
            let age = rng.gen_range(MAL_DOMAIN_AGE_DAYS);
            WhoisRecord {
                created_on: Some(created),
                updated_on: None,
                expires_on: Some(created + Duration::days(age)),
            }
        }
        Side::Benign => {
            let created = start - Duration::days(rng.gen_range(BEN_DOMAIN_PAST_DAYS));
            let age = rng.gen_range(BEN_DOMAIN_AGE_DAYS);
            // A slice of benign records carry only the update date, which
            // exercises the domain-age fallback and leaves creation gaps
            // unknown.
            if rng.gen_bool(0.10) {
                let updated = created + Duration::days(rng.gen_range(0..200));
                WhoisRecord {
                    created_on: None,
                    updated_on: Some(updated),
                    expires_on: Some(updated + Duration::days(age)),
                }
            } else {
                let updated = rng
                    .gen_bool(0.5)
                    .then(|| created + Duration::days(rng.gen_range(0..200)));
                WhoisRecord {
                    created_on: Some(created),
                    updated_on: updated,
                    expires_on: Some(created + Duration::days(age)),
                }
            }
        }
    }
}

/// Account-id pools. Malicious ids lead with the bot and campaign accounts;
/// most of the rest look auto-generated ("o_" + hash).
fn make_account_names(side: Side, config: &GeneratorConfig, seed: u64) -> Vec<String> {
    let link_count = match side {
        Side::Benign => config.benign_links,
        Side::Malicious => config.malicious_links,
    };
    if link_count == 0 {
        return Vec::new();
    }
    match side {
        Side::Benign => {
            let count = (link_count / 8).max(2);
            (0..count)
                .map(|i| {
                    let mut rng = child_rng(seed, "ben_account", i as u64);
                    let w = BEN_WORDS.choose(&mut rng).unwrap();
                    format!("{w}fan{i:03}")
                })
                .collect()
        }
        Side::Malicious => {
            let ordinary = (link_count / 12).max(2);
            let count = config.bot_encoders + config.campaign_accounts + ordinary;
            (0..count)
                .map(|i| {
                    let mut rng = child_rng(seed, "mal_account", i as u64);
                    if i < config.bot_encoders || rng.gen_bool(0.6) {
                        format!("o_{}", hex_string(&mut rng, 8))
                    } else {
                        let w = MAL_WORDS.choose(&mut rng).unwrap();
                        format!("{w}runner{i:03}")
                    }
                })
                .collect()
        }
    }
}

fn hex_string(rng: &mut ChaCha8Rng, len: usize) -> String {
    const HEX: &[u8] = b"0123456789abcdef";
    (0..len)
        .map(|_| HEX[rng.gen_range(0..HEX.len())] as char)
        .collect()
}

fn alnum_string(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    (0..len)
        .map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char)
        .collect()
}

fn fresh_hash(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>) -> String {
    loop {
        let hash = alnum_string(rng, 7);
        if taken.insert(hash.clone()) {
            return hash;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn make_link(
    side: Side,
    index: usize,
    rng: &mut ChaCha8Rng,
    domains: &[DomainInfo],
    accounts: &[String],
    zero_click: bool,
    config: &GeneratorConfig,
    hashes: &mut BTreeSet<String>,
) -> (ShortLinkRecord, Option<Evidence>) {
    let domain = &domains[rng.gen_range(0..domains.len())];
    let short_hash = fresh_hash(rng, hashes);
    let global_hash = format!("g{}", alnum_string(rng, 7));

    let sub = if rng.gen_bool(0.5) {
        format!("{}.", SUBDOMAINS.choose(rng).unwrap())
    } else {
        String::new()
    };
    let long_url = format!(
        "http://{sub}{}/{}/{}{index}",
        domain.name,
        SUBDOMAINS.choose(rng).unwrap(),
        alnum_string(rng, 5),
    );

    // Creation time: malicious links follow their domain's registration;
    // benign links spread over the whole window.
    let base_date = match (side, domain.whois.and_then(|w| w.created_on)) {
        (Side::Malicious, Some(created)) => {
            created.and_hms_opt(0, 0, 0).unwrap().and_utc()
                + Duration::days(rng.gen_range(MAL_CREATION_GAP_DAYS))
        }
        _ => window_start() + Duration::days(rng.gen_range(0..WINDOW_DAYS)),
    };
    let hour = match side {
        Side::Malicious if rng.gen_bool(config.odd_hour_bias) => rng.gen_range(0..6),
        _ => rng.gen_range(0..24),
    };
    let created_at = base_date.date_naive().and_hms_opt(0, 0, 0).unwrap().and_utc()
        + Duration::seconds(hour * 3600 + rng.gen_range(0..3600i64));

    let encoders = make_encoders(side, rng, accounts);

    let (clicks, referrers) = if zero_click {
        (Vec::new(), Vec::new())
    } else {
        make_traffic(side, rng, created_at, config)
    };

    let warning_count = match side {
        Side::Malicious => rng.gen_range(1..30),
        Side::Benign => 0,
    };

    let evidence = match side {
        Side::Malicious => {
            let weights = [30u32, 20, 15, 35];
            let kinds = [
                Evidence::Safebrowsing,
                Evidence::Phishtank,
                Evidence::Virustotal,
                Evidence::WarningPage,
            ];
            let dist = WeightedIndex::new(weights).unwrap();
            Some(kinds[dist.sample(rng)])
        }
        Side::Benign => None,
    };

    let link = ShortLinkRecord {
        short_hash,
        global_hash,
        long_url,
        domain: domain.name.clone(),
        created_at,
        encoders,
        clicks,
        referrers,
        whois: domain.whois,
        warning_count,
    };
    (link, evidence)
}

fn make_encoders(side: Side, rng: &mut ChaCha8Rng, accounts: &[String]) -> Vec<EncoderRef> {
    let (count, kind_weights, apps) = match side {
        // Malicious links accumulate encoders: anonymous and
        // application-driven identities dominate.
        Side::Malicious => {
            let dist = WeightedIndex::new([35u32, 30, 15, 10, 6, 4]).unwrap();
            (1 + dist.sample(rng), [30u32, 45, 25], MAL_APPS)
        }
        Side::Benign => {
            let count = if rng.gen_bool(0.8) { 1 } else { 2 };
            (count, [75u32, 10, 15], BEN_APPS)
        }
    };
    let kind_dist = WeightedIndex::new(kind_weights).unwrap();
    let account_offset = rng.gen_range(0..accounts.len());
    let app_offset = rng.gen_range(0..apps.len());
    let mut used_regular = 0usize;
    let mut used_apps = 0usize;
    let mut encoders = Vec::with_capacity(count);
    for _ in 0..count {
        match kind_dist.sample(rng) {
            0 => {
                // Walk the pool from a random offset so one link never
                // repeats a regular account.
                let id = &accounts[(account_offset + used_regular) % accounts.len()];
                used_regular += 1;
                encoders.push(EncoderRef {
                    account_id: id.clone(),
                    kind: EncoderKind::Regular,
                    application_name: None,
                });
            }
            1 => encoders.push(EncoderRef {
                account_id: ANON_TOKENS.choose(rng).unwrap().to_string(),
                kind: EncoderKind::Anonymous,
                application_name: None,
            }),
            _ => {
                let app = apps[(app_offset + used_apps) % apps.len()];
                used_apps += 1;
                encoders.push(EncoderRef {
                    account_id: app.to_string(),
                    kind: EncoderKind::Application,
                    application_name: Some(app.to_string()),
                });
            }
        }
    }
    // Distinctness of regular/application ids only holds within one cycle
    // of the pool; links never request that many encoders.
    encoders
}

fn make_traffic(
    side: Side,
    rng: &mut ChaCha8Rng,
    created_at: DateTime<Utc>,
    config: &GeneratorConfig,
) -> (Vec<ClickEvent>, Vec<ReferrerStat>) {
    let lag_days = match side {
        Side::Malicious => rng.gen_range(MAL_CLICK_LAG_DAYS),
        Side::Benign => {
            if rng.gen_bool(0.8) {
                0
            } else {
                rng.gen_range(1..4)
            }
        }
    };
    let first = created_at + Duration::seconds(lag_days * 86_400 + rng.gen_range(0..86_400));
    let event_count = match side {
        Side::Malicious => rng.gen_range(1..6),
        Side::Benign => rng.gen_range(1..12),
    };
    let mut clicks = Vec::with_capacity(event_count);
    let mut at = first;
    for _ in 0..event_count {
        let count = match side {
            Side::Malicious => rng.gen_range(1..30),
            Side::Benign => rng.gen_range(1..80),
        };
        clicks.push(ClickEvent { at, count });
        at += Duration::seconds(rng.gen_range(3_600..5 * 86_400));
    }
    let total_clicks: u64 = clicks.iter().map(|c| c.count).sum();

    let direct_rate = match side {
        Side::Malicious => config.direct_referrer_bias,
        Side::Benign => config.benign_direct_referrer_rate,
    };
    let slots = match side {
        Side::Malicious => rng.gen_range(1..3),
        Side::Benign => rng.gen_range(2..7),
    };
    let with_direct = rng.gen_bool(direct_rate);
    let mut referrers = Vec::with_capacity(slots);
    if with_direct {
        referrers.push(ReferrerStat {
            referrer: Referrer::Direct,
            clicks: rng.gen_range(1..=total_clicks.max(1)),
        });
    }
    let pool_offset = rng.gen_range(0..REFERRER_POOL.len());
    for slot in referrers.len()..slots {
        let domain = REFERRER_POOL[(pool_offset + slot) % REFERRER_POOL.len()];
        referrers.push(ReferrerStat {
            referrer: Referrer::Domain(domain.to_string()),
            clicks: rng.gen_range(1..=total_clicks.max(1)),
        });
    }
    (clicks, referrers)
}

fn make_profiles(
    config: &GeneratorConfig,
    seed: u64,
    ben_accounts: &[String],
    mal_accounts: &[String],
    ben_domains: &[DomainInfo],
) -> BTreeMap<String, EncoderProfile> {
    let observed = observed_instant();
    let mut profiles = BTreeMap::new();

    for (i, id) in ben_accounts.iter().enumerate() {
        let mut rng = child_rng(seed, "ben_profile", i as u64);
        let history_len = rng.gen_range(3..80);
        let history = make_history(&mut rng, history_len, 0.0, 540, observed);
        let posts = if i < 10 && !ben_domains.is_empty() {
            Some(make_benign_posts(&mut rng, i, ben_domains))
        } else {
            None
        };
        profiles.insert(
            id.clone(),
            EncoderProfile {
                account_id: id.clone(),
                profile_created_at: Some(
                    window_start() - Duration::days(rng.gen_range(200..2000)),
                ),
                connected_accounts: if rng.gen_bool(0.6) {
                    vec![ConnectedAccount {
                        network: "twitter".to_string(),
                        handle: format!("@{id}"),
                    }]
                } else {
                    Vec::new()
                },
                history,
                posts,
            },
        );
    }

    let campaign_range = config.bot_encoders..config.bot_encoders + config.campaign_accounts;
    for (i, id) in mal_accounts.iter().enumerate() {
        let mut rng = child_rng(seed, "mal_profile", i as u64);
        let (history_len, warning_fraction, span_days) = if i < config.bot_encoders {
            // Bot: at least 100 links, every one flagged.
            (rng.gen_range(100..140), 1.0, rng.gen_range(300..760))
        } else if campaign_range.contains(&i) {
            (rng.gen_range(30..80), 0.85, 200)
        } else {
            (rng.gen_range(5..60), rng.gen_range(0.5..0.9), 200)
        };
        let history = make_history(&mut rng, history_len, warning_fraction, span_days, observed);
        let posts = campaign_range
            .contains(&i)
            .then(|| make_campaign_posts(&mut rng, i - config.bot_encoders, seed));
        profiles.insert(
            id.clone(),
            EncoderProfile {
                account_id: id.clone(),
                profile_created_at: Some(window_start() - Duration::days(rng.gen_range(5..90))),
                connected_accounts: if rng.gen_bool(0.2) {
                    vec![ConnectedAccount {
                        network: "twitter".to_string(),
                        handle: format!("@{id}"),
                    }]
                } else {
                    Vec::new()
                },
                history,
                posts,
            },
        );
    }

    profiles
}

fn make_history(
    rng: &mut ChaCha8Rng,
    len: usize,
    warning_fraction: f64,
    span_days: i64,
    observed: DateTime<Utc>,
) -> Vec<HistoryEntry> {
    let start = window_start() - Duration::days(span_days);
    let mut offsets: Vec<i64> = (0..len)
        .map(|_| rng.gen_range(0..span_days.max(1) * 86_400))
        .collect();
    offsets.sort_unstable();
    let warning_count = (warning_fraction * len as f64).round() as usize;
    let mut warning_slots: Vec<bool> = (0..len).map(|i| i < warning_count).collect();
    warning_slots.shuffle(rng);
    offsets
        .into_iter()
        .zip(warning_slots)
        .enumerate()
        .map(|(i, (offset, warn))| HistoryEntry {
            short_hash: format!("x{}", hex_string(rng, 6)),
            created_at: start + Duration::seconds(offset) + Duration::seconds(i as i64),
            click_count: rng.gen_range(0..400),
            state: LinkState {
                state: if warn {
                    LinkStateKind::Warning
                } else {
                    LinkStateKind::Active
                },
                observed_at: observed,
            },
        })
        .collect()
}

fn make_benign_posts(rng: &mut ChaCha8Rng, account_index: usize, domains: &[DomainInfo]) -> Vec<Post> {
    let count = rng.gen_range(3..7);
    (0..count)
        .map(|p| {
            let token_count = rng.gen_range(5..10);
            let text_tokens: BTreeSet<String> = (0..token_count)
                .map(|_| BEN_POST_VOCAB.choose(rng).unwrap().to_string())
                .collect();
            let domain = &domains[(account_index + p) % domains.len()];
            Post {
                text_tokens,
                urls: vec![format!("http://{}/post/a{account_index}p{p}", domain.name)],
                at: window_start()
                    + Duration::days(rng.gen_range(0..WINDOW_DAYS))
                    + Duration::seconds(rng.gen_range(0..86_400)),
            }
        })
        .collect()
}

/// Campaign accounts share 18 of 20 posted URLs (pairwise Jaccard 18/22 ≈
/// 0.82) and post near-identical text on a minute-aligned clock.
fn make_campaign_posts(rng: &mut ChaCha8Rng, member: usize, seed: u64) -> Vec<Post> {
    let mut shared_rng = child_rng(seed, "campaign_urls", 0);
    let shared_domain = format!(
        "{}{}.{}",
        MAL_WORDS[shared_rng.gen_range(0..MAL_WORDS.len())],
        "central",
        MAL_TLDS[shared_rng.gen_range(0..MAL_TLDS.len())]
    );
    let shared: Vec<String> = (0..18)
        .map(|j| format!("http://{shared_domain}/c{j}"))
        .collect();
    let own: Vec<String> = (0..2)
        .map(|j| format!("http://{shared_domain}/m{member}o{j}"))
        .collect();
    let mut urls: Vec<String> = shared.into_iter().chain(own).collect();
    urls.shuffle(rng);

    let base_tokens: Vec<String> = CAMPAIGN_TOKENS.iter().map(|t| t.to_string()).collect();
    let day0 = window_start() + Duration::days(30);
    urls.chunks(4)
        .enumerate()
        .map(|(p, chunk)| {
            let mut text_tokens: BTreeSet<String> = base_tokens.iter().cloned().collect();
            text_tokens.insert(format!("batch{p}"));
            Post {
                text_tokens,
                urls: chunk.to_vec(),
                at: day0
                    + Duration::days(p as i64)
                    + Duration::seconds(3600 * rng.gen_range(0..24) + 60 * rng.gen_range(0..2)),
            }
        })
        .collect()
}

fn make_fixtures(
    seed: u64,
    corpus: &Corpus,
    truth: &BTreeMap<String, bool>,
    evidence: &[(usize, Evidence)],
    ben_domains: &[DomainInfo],
    mal_domains: &[DomainInfo],
) -> Fixtures {
    let mut blacklists: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for provider in ["safebrowsing", "phishtank", "virustotal", "surbl"] {
        blacklists.insert(provider.to_string(), BTreeSet::new());
    }
    for &(index, ev) in evidence {
        let link = &corpus.links[index];
        let provider = match ev {
            Evidence::Safebrowsing => "safebrowsing",
            Evidence::Phishtank => "phishtank",
            Evidence::Virustotal => "virustotal",
            Evidence::WarningPage => continue,
        };
        blacklists
            .get_mut(provider)
            .unwrap()
            .insert(link.long_url.clone());
    }
    // SURBL lists a fraction of malicious domains outright; any link on
    // them is covered twice over.
    if !mal_domains.is_empty() {
        let mut rng = child_rng(seed, "surbl_domains", 0);
        let count = (mal_domains.len() as f64 * 0.4).round() as usize;
        let surbl = blacklists.get_mut("surbl").unwrap();
        for idx in rand::seq::index::sample(&mut rng, mal_domains.len(), count) {
            surbl.insert(mal_domains[idx].name.clone());
        }
    }

    let dead: BTreeMap<&str, bool> = ben_domains
        .iter()
        .chain(mal_domains)
        .map(|d| (d.name.as_str(), d.dead))
        .collect();

    let mut probes = BTreeMap::new();
    let warning_evidence: BTreeSet<usize> = evidence
        .iter()
        .filter(|(_, ev)| *ev == Evidence::WarningPage)
        .map(|&(i, _)| i)
        .collect();
    for (index, link) in corpus.links.iter().enumerate() {
        let url = short_url(&link.short_hash);
        let malicious = truth[&link.short_hash];
        let response = if warning_evidence.contains(&index) {
            ProbeResponse {
                status: 200,
                final_url: warning_url(&link.short_hash),
                chain: vec![warning_url(&link.short_hash)],
            }
        } else if malicious && dead.get(link.domain.as_str()).copied().unwrap_or(false) {
            // Shortener answers, target domain is gone.
            ProbeResponse {
                status: 0,
                final_url: link.long_url.clone(),
                chain: vec![link.long_url.clone()],
            }
        } else {
            ProbeResponse {
                status: 200,
                final_url: link.long_url.clone(),
                chain: vec![link.long_url.clone()],
            }
        };
        probes.insert(url, response);
    }
    for (domain, is_dead) in &dead {
        let root = format!("http://{domain}/");
        let response = if *is_dead {
            ProbeResponse {
                status: 0,
                final_url: root.clone(),
                chain: Vec::new(),
            }
        } else {
            ProbeResponse {
                status: 200,
                final_url: root.clone(),
                chain: Vec::new(),
            }
        };
        probes.insert(root, response);
    }

    Fixtures {
        blacklists: blacklists
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect(),
        probes: FixtureProbe::new(probes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{
        label_instance, probe_link_state, query_blacklists, BlacklistProvider, FixtureProvider,
        LabelValue, WarningPattern,
    };

    fn small_config() -> GeneratorConfig {
        GeneratorConfig {
            benign_links: 120,
            malicious_links: 120,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = small_config();
        let a = generate(&config, 42).unwrap();
        let b = generate(&config, 42).unwrap();
        assert_eq!(a, b);
        let c = generate(&config, 43).unwrap();
        assert_ne!(a.corpus, c.corpus);
    }

    #[test]
    fn empty_config_yields_empty_corpus() {
        let config = GeneratorConfig {
            benign_links: 0,
            malicious_links: 0,
            ..GeneratorConfig::default()
        };
        let artifacts = generate(&config, 7).unwrap();
        assert!(artifacts.corpus.links.is_empty());
        assert!(artifacts.corpus.encoders.is_empty());
        assert!(artifacts.truth.is_empty());
    }

    #[test]
    fn invalid_probabilities_are_rejected() {
        let config = GeneratorConfig {
            zero_click_fraction: 1.5,
            ..GeneratorConfig::default()
        };
        assert!(generate(&config, 1).is_err());
        let config = GeneratorConfig {
            dead_domain_fraction: -0.1,
            ..GeneratorConfig::default()
        };
        assert!(generate(&config, 1).is_err());
    }

    #[test]
    fn zero_click_fraction_lands_within_one_percent() {
        let config = GeneratorConfig {
            benign_links: 1000,
            malicious_links: 1000,
            ..GeneratorConfig::default()
        };
        let artifacts = generate(&config, 11).unwrap();
        let zero_mal = artifacts
            .corpus
            .links
            .iter()
            .filter(|l| artifacts.truth[&l.short_hash] && l.clicks.is_empty())
            .count();
        let fraction = zero_mal as f64 / 1000.0;
        assert!(
            (fraction - 0.4616).abs() <= 0.01,
            "zero-click fraction {fraction}"
        );
    }

    #[test]
    fn fixtures_recover_planted_truth_exactly() {
        let artifacts = generate(&small_config(), 5).unwrap();
        let providers: Vec<Box<dyn BlacklistProvider>> = artifacts
            .fixtures
            .blacklists
            .iter()
            .map(|(id, entries)| {
                Box::new(FixtureProvider::new(
                    id,
                    crate::labeling::default_provider_level(id),
                    crate::labeling::default_provider_category(id),
                    entries.iter().cloned().collect(),
                )) as Box<dyn BlacklistProvider>
            })
            .collect();
        let pattern = WarningPattern::default();
        let at = observed_instant();
        for link in &artifacts.corpus.links {
            let verdicts = query_blacklists(&link.long_url, &providers, None, at);
            let state = probe_link_state(
                &short_url(&link.short_hash),
                &artifacts.fixtures.probes,
                &pattern,
                at,
            );
            let label = label_instance(&verdicts, &state);
            let expected = if artifacts.truth[&link.short_hash] {
                LabelValue::Malicious
            } else {
                LabelValue::Benign
            };
            assert_eq!(
                label.value, expected,
                "link {} ({})",
                link.short_hash, link.long_url
            );
        }
    }

    #[test]
    fn planted_dead_domain_fraction_matches_config() {
        // Malicious-only corpus so the corpus-wide fraction is the planted one.
        let config = GeneratorConfig {
            benign_links: 0,
            malicious_links: 600,
            ..GeneratorConfig::default()
        };
        let artifacts = generate(&config, 3).unwrap();
        let report = crate::labeling::domain_liveness_report(
            &artifacts.corpus,
            &artifacts.fixtures.probes,
            &WarningPattern::default(),
            observed_instant(),
        );
        assert!(
            (report.dead_fraction - 0.8306).abs() <= 0.02,
            "dead fraction {}",
            report.dead_fraction
        );
        assert!(report.dead_warning_sum > 0);
    }

    #[test]
    fn bot_encoders_have_suspicion_factor_one() {
        let artifacts = generate(&small_config(), 9).unwrap();
        let bots: Vec<_> = artifacts
            .corpus
            .encoders
            .values()
            .map(crate::profile::suspicion_report)
            .filter(|r| r.highly_suspicious)
            .collect();
        assert_eq!(bots.len(), 3);
        for bot in bots {
            assert_eq!(bot.suspicion_factor, 1.0);
            assert!(bot.history_size >= 100);
        }
    }

    #[test]
    fn campaign_overlap_is_planted_above_background() {
        let artifacts = generate(&small_config(), 13).unwrap();
        let with_posts: Vec<&EncoderProfile> = artifacts
            .corpus
            .encoders
            .values()
            .filter(|p| p.posts.is_some())
            .collect();
        let report = crate::profile::cross_account_overlap(&with_posts).unwrap();
        let is_campaign = |id: &str| {
            artifacts.corpus.encoders[id]
                .posts
                .as_ref()
                .map(|p| p.iter().any(|post| post.text_tokens.contains("exclusive")))
                .unwrap_or(false)
        };
        let mut campaign_pairs = 0;
        for pair in &report.pairs {
            if is_campaign(&pair.a) && is_campaign(&pair.b) {
                assert!(pair.url_overlap > 0.8, "campaign pair {:?}", pair);
                campaign_pairs += 1;
            } else {
                assert!(pair.url_overlap < 0.2, "background pair {:?}", pair);
            }
        }
        assert_eq!(campaign_pairs, 3);
    }

    #[test]
    fn saved_corpus_is_byte_identical_across_runs() {
        let config = small_config();
        let dirs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let artifacts = generate(&config, 21).unwrap();
                crate::corpus::io::save_corpus(
                    dir.path(),
                    &artifacts.corpus,
                    &crate::corpus::io::Manifest::synthetic(21, config.clone()),
                )
                .unwrap();
                crate::corpus::io::save_truth(&dir.path().join("truth.jsonl"), &artifacts.truth)
                    .unwrap();
                artifacts.fixtures.write(&dir.path().join("fixtures")).unwrap();
                dir
            })
            .collect();
        for file in [
            "links.jsonl",
            "whois.jsonl",
            "encoders.jsonl",
            "truth.jsonl",
            "MANIFEST.json",
            "fixtures/probes.jsonl",
            "fixtures/blacklist_surbl.txt",
        ] {
            let a = std::fs::read(dirs[0].path().join(file)).unwrap();
            let b = std::fs::read(dirs[1].path().join(file)).unwrap();
            assert_eq!(a, b, "file {file} differs across identical runs");
        }
    }

    #[test]
    fn generated_corpus_roundtrips_through_disk() {
        let artifacts = generate(&small_config(), 31).unwrap();
        let dir = tempfile::tempdir().unwrap();
        crate::corpus::io::save_corpus(
            dir.path(),
            &artifacts.corpus,
            &crate::corpus::io::Manifest::plain(),
        )
        .unwrap();
        let loaded = crate::corpus::io::load_corpus(dir.path()).unwrap();
        assert_eq!(loaded, artifacts.corpus);
    }
}
