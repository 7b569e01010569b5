//! Feature extraction for labeled short-link instances.
//!
//! Seven behavioural features describe each link: how old its target domain
//! is, how soon after domain registration the link was created, the UTC hour
//! of creation, how many identities shortened it, how anonymous those
//! identities are, how long the first click took, and how much of its
//! traffic arrived without a referrer. Two schemas exist: FULL carries all
//! seven, NON_CLICK drops the two click-derived features so links can be
//! scored the moment they are created, before any traffic exists.
//!
//! Unknowable values (no WHOIS record, no clicks yet) are a distinguished
//! MISSING marker — an empty CSV cell, `None` in memory — never a sentinel
//! number. Extraction never reads a link's label or its warning counter.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{EncoderKind, Referrer, ShortLinkRecord, WhoisRecord};
use crate::error::{Error, Result};
use crate::labeling::LabelValue;
use crate::timeutil;

/// Which feature set a vector carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureSchema {
    /// All seven features, including the click-derived pair.
    Full,
    /// The five features available before a link receives traffic.
    NonClick,
}

impl FeatureSchema {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSchema::Full => "FULL",
            FeatureSchema::NonClick => "NON_CLICK",
        }
    }

    pub fn parse(raw: &str) -> Result<FeatureSchema> {
        match raw {
            "FULL" => Ok(FeatureSchema::Full),
            "NON_CLICK" => Ok(FeatureSchema::NonClick),
            other => Err(Error::InvalidParams(format!(
                "unknown feature schema {other:?} (expected FULL or NON_CLICK)"
            ))),
        }
    }

    /// Feature names in column order, matching the CSV layout.
    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            FeatureSchema::Full => FULL_FEATURES,
            FeatureSchema::NonClick => NON_CLICK_FEATURES,
        }
    }
}

impl std::fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

const FULL_FEATURES: &[&str] = &[
    "domain_age",
    "creation_gap",
    "creation_hour",
    "encoder_count",
    "encoder_type_ratio",
    "click_lag",
    "direct_ratio",
];
const NON_CLICK_FEATURES: &[&str] = &[
    "domain_age",
    "creation_gap",
    "creation_hour",
    "encoder_count",
    "encoder_type_ratio",
];

/// The click-derived pair, present only under the FULL schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickFeatures {
    /// Whole days from link creation to the earliest click; MISSING while
    /// the link has no clicks.
    pub click_lag_days: Option<i64>,
    /// Share of referrer entries that are direct (no referring domain);
    /// 0 when no referrer analytics exist.
    pub direct_referrer_ratio: f64,
}

/// One link's features under a fixed schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema: FeatureSchema,
    pub domain_age_days: Option<i64>,
    pub creation_gap_days: Option<i64>,
    pub creation_hour: u8,
    pub encoder_count: u32,
    pub encoder_type_ratio: f64,
    /// `Some` exactly when `schema` is FULL.
    pub click: Option<ClickFeatures>,
}

impl FeatureVector {
    /// Values in `feature_names` order, MISSING as `None`.
    pub fn to_row(&self) -> Vec<Option<f64>> {
        let mut row = vec![
            self.domain_age_days.map(|d| d as f64),
            self.creation_gap_days.map(|d| d as f64),
            Some(f64::from(self.creation_hour)),
            Some(f64::from(self.encoder_count)),
            Some(self.encoder_type_ratio),
        ];
        if let Some(click) = &self.click {
            row.push(click.click_lag_days.map(|d| d as f64));
            row.push(Some(click.direct_referrer_ratio));
        }
        row
    }

    /// Drop the click pair, yielding the NON_CLICK view of this vector.
    pub fn restrict_to_non_click(&self) -> FeatureVector {
        FeatureVector {
            schema: FeatureSchema::NonClick,
            click: None,
            ..self.clone()
        }
    }
}

/// A feature vector joined with its link id and ground label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub link_id: String,
    pub features: FeatureVector,
    pub label: LabelValue,
}

/// Whole days the domain registration spans: expiration minus creation
/// (falling back to the last-updated date). Corrupt records that would go
/// negative are MISSING, with a logged warning.
pub fn domain_age(whois: &WhoisRecord) -> Option<i64> {
    let start = whois.created_on.or(whois.updated_on)?;
    let expires = whois.expires_on?;
    let days = timeutil::date_diff_days(start, expires);
    if days < 0 {
        log::warn!("WHOIS expires {expires} precedes registration {start}; treating age as unknown");
        return None;
    }
    Some(days)
}

/// Whole days from domain registration to link creation. Negative gaps
/// (link predates the WHOIS creation date) are preserved. MISSING when the
/// record has no creation date.
pub fn creation_gap(whois: &WhoisRecord, link: &ShortLinkRecord) -> Option<i64> {
    let created = whois.created_on?;
    Some(timeutil::date_to_timestamp_days(created, link.created_at))
}

/// UTC hour of link creation, 0–23.
pub fn creation_hour(link: &ShortLinkRecord) -> u8 {
    use chrono::Timelike;
    link.created_at.hour() as u8
}

/// Number of identities that shortened the link: distinct account ids, with
/// each anonymous entry counted separately (anonymous entries have no
/// identity to deduplicate on).
pub fn encoder_count(link: &ShortLinkRecord) -> u32 {
    let mut named: BTreeSet<&str> = BTreeSet::new();
    let mut anonymous = 0u32;
    for enc in &link.encoders {
        match enc.kind {
            EncoderKind::Anonymous => anonymous += 1,
            _ => {
                named.insert(&enc.account_id);
            }
        }
    }
    named.len() as u32 + anonymous
}

/// Share of encoder occurrences that hide behind an anonymous token or an
/// auto-posting application.
pub fn encoder_type_ratio(link: &ShortLinkRecord) -> f64 {
    if link.encoders.is_empty() {
        return 0.0;
    }
    let opaque = link
        .encoders
        .iter()
        .filter(|e| matches!(e.kind, EncoderKind::Anonymous | EncoderKind::Application))
        .count();
    opaque as f64 / link.encoders.len() as f64
}

/// Whole days from link creation to the earliest click; MISSING when the
/// link has never been clicked.
pub fn click_lag(link: &ShortLinkRecord) -> Option<i64> {
    link.clicks
        .iter()
        .map(|c| c.at)
        .min()
        .map(|first| timeutil::floor_days(link.created_at, first))
}

/// Share of referrer entries that are direct traffic; 0 when the link has
/// no referrer analytics at all (no traffic is itself a signal).
pub fn direct_referrer_ratio(link: &ShortLinkRecord) -> f64 {
    if link.referrers.is_empty() {
        return 0.0;
    }
    let direct = link
        .referrers
        .iter()
        .filter(|r| r.referrer == Referrer::Direct)
        .count();
    direct as f64 / link.referrers.len() as f64
}

/// Assemble one link's feature vector. MISSING markers flow through; the
/// whois record is the one joined onto the link's domain, if any.
pub fn extract(
    link: &ShortLinkRecord,
    whois: Option<&WhoisRecord>,
    schema: FeatureSchema,
) -> FeatureVector {
    FeatureVector {
        schema,
        domain_age_days: whois.and_then(domain_age),
        creation_gap_days: whois.and_then(|w| creation_gap(w, link)),
        creation_hour: creation_hour(link),
        encoder_count: encoder_count(link),
        encoder_type_ratio: encoder_type_ratio(link),
        click: match schema {
            FeatureSchema::Full => Some(ClickFeatures {
                click_lag_days: click_lag(link),
                direct_referrer_ratio: direct_referrer_ratio(link),
            }),
            FeatureSchema::NonClick => None,
        },
    }
}

/// Extract one instance per link, joining labels by short hash. Every link
/// must have a label.
pub fn extract_dataset(
    links: &[ShortLinkRecord],
    labels: &std::collections::BTreeMap<String, LabelValue>,
    schema: FeatureSchema,
) -> Result<Vec<LabeledInstance>> {
    links
        .iter()
        .map(|link| {
            let label = labels.get(&link.short_hash).copied().ok_or_else(|| {
                Error::invariant(
                    format!("link {}", link.short_hash),
                    "no label for this link".to_string(),
                )
            })?;
            Ok(LabeledInstance {
                link_id: link.short_hash.clone(),
                features: extract(link, link.whois.as_ref(), schema),
                label,
            })
        })
        .collect()
}

fn csv_header(schema: FeatureSchema) -> String {
    let mut header = String::from("link_id,schema");
    for name in schema.feature_names() {
        header.push(',');
        header.push_str(name);
    }
    header.push_str(",label");
    header
}

fn format_cell(value: Option<f64>) -> String {
    match value {
        None => String::new(),
        Some(v) if v == v.trunc() && v.abs() < 1e15 => format!("{}", v as i64),
        Some(v) => format!("{v}"),
    }
}

/// Write instances as CSV with MISSING as empty cells. All instances must
/// share one schema.
pub fn write_features_csv(path: &Path, instances: &[LabeledInstance]) -> Result<()> {
    let schema = match instances.first() {
        Some(first) => first.features.schema,
        None => {
            return Err(Error::Degenerate(
                "cannot write a feature matrix with no instances".to_string(),
            ))
        }
    };
    let mut text = csv_header(schema);
    text.push('\n');
    for inst in instances {
        if inst.features.schema != schema {
            return Err(Error::SchemaMismatch {
                expected: schema.as_str().to_string(),
                found: inst.features.schema.as_str().to_string(),
            });
        }
        write!(text, "{},{}", inst.link_id, schema.as_str()).expect("write to String");
        for cell in inst.features.to_row() {
            text.push(',');
            text.push_str(&format_cell(cell));
        }
        let label = match inst.label {
            LabelValue::Malicious => "MALICIOUS",
            LabelValue::Benign => "BENIGN",
        };
        text.push(',');
        text.push_str(label);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Read a feature matrix written by [`write_features_csv`]. The header
/// determines the schema; every row must agree with it.
pub fn read_features_csv(path: &Path) -> Result<Vec<LabeledInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let schema_err = |line: usize, message: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };

    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(1, "empty feature file".to_string()))?;
    let schema = if header == csv_header(FeatureSchema::Full) {
        FeatureSchema::Full
    } else if header == csv_header(FeatureSchema::NonClick) {
        FeatureSchema::NonClick
    } else {
        return Err(schema_err(1, format!("unrecognized header {header:?}")));
    };
    let names = schema.feature_names();

    let mut instances = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() + 3 {
            return Err(schema_err(
                line_no,
                format!("expected {} cells, found {}", names.len() + 3, cells.len()),
            ));
        }
        if cells[1] != schema.as_str() {
            return Err(Error::SchemaMismatch {
                expected: schema.as_str().to_string(),
                found: cells[1].to_string(),
            });
        }
        let mut values = Vec::with_capacity(names.len());
        for (name, cell) in names.iter().zip(&cells[2..2 + names.len()]) {
            if cell.is_empty() {
                values.push(None);
            } else {
                let value: f64 = cell.parse().map_err(|_| {
                    schema_err(line_no, format!("cell {name} is not a number: {cell:?}"))
                })?;
                values.push(Some(value));
            }
        }
        let label = match cells[names.len() + 2] {
            "MALICIOUS" => LabelValue::Malicious,
            "BENIGN" => LabelValue::Benign,
            other => {
                return Err(schema_err(line_no, format!("unknown label {other:?}")));
            }
        };

        let int_cell = |i: usize, name: &str| -> Result<Option<i64>> {
            match values[i] {
                None => Ok(None),
                Some(v) if v == v.trunc() => Ok(Some(v as i64)),
                Some(v) => Err(schema_err(line_no, format!("{name} must be integral, got {v}"))),
            }
        };
        let require = |v: Option<f64>, name: &str| -> Result<f64> {
            v.ok_or_else(|| schema_err(line_no, format!("{name} must not be empty")))
        };

        let creation_hour = require(values[2], "creation_hour")? as u8;
        if creation_hour > 23 {
            return Err(schema_err(line_no, format!("creation_hour {creation_hour} out of range")));
        }
        let features = FeatureVector {
            schema,
            domain_age_days: int_cell(0, "domain_age")?,
            creation_gap_days: int_cell(1, "creation_gap")?,
            creation_hour,
            encoder_count: require(values[3], "encoder_count")? as u32,
            encoder_type_ratio: require(values[4], "encoder_type_ratio")?,
            click: match schema {
                FeatureSchema::Full => Some(ClickFeatures {
                    click_lag_days: int_cell(5, "click_lag")?,
                    direct_referrer_ratio: require(values[6], "direct_ratio")?,
                }),
                FeatureSchema::NonClick => None,
            },
        };
        instances.push(LabeledInstance {
            link_id: cells[0].to_string(),
            features,
            label,
        });
    }
    Ok(instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testutil::{date, sample_corpus, ts};
    use crate::corpus::{ClickEvent, EncoderRef, ReferrerStat};
    use proptest::prelude::*;

    fn base_link() -> ShortLinkRecord {
        sample_corpus().links[0].clone()
    }

    #[test]
    fn non_click_names_are_a_prefix_of_full() {
        assert_eq!(NON_CLICK_FEATURES, &FULL_FEATURES[..NON_CLICK_FEATURES.len()]);
        assert_eq!(FULL_FEATURES.len(), 7);
        assert_eq!(NON_CLICK_FEATURES.len(), 5);
    }

    #[test]
    fn domain_age_spans_registration() {
        let whois = WhoisRecord {
            created_on: Some(date(2013, 1, 1)),
            updated_on: None,
            expires_on: Some(date(2014, 1, 1)),
        };
        assert_eq!(domain_age(&whois), Some(365));
    }

    #[test]
    fn domain_age_falls_back_to_update_date() {
        let whois = WhoisRecord {
            created_on: None,
            updated_on: Some(date(2013, 6, 1)),
            expires_on: Some(date(2013, 12, 1)),
        };
        assert_eq!(domain_age(&whois), Some(183));
    }

    #[test]
    fn domain_age_missing_without_expiry_or_start() {
        let no_expiry = WhoisRecord {
            created_on: Some(date(2013, 1, 1)),
            updated_on: None,
            expires_on: None,
        };
        assert_eq!(domain_age(&no_expiry), None);
        let no_start = WhoisRecord {
            created_on: None,
            updated_on: None,
            expires_on: Some(date(2014, 1, 1)),
        };
        assert_eq!(domain_age(&no_start), None);
    }

    #[test]
    fn negative_domain_age_is_missing() {
        let corrupt = WhoisRecord {
            created_on: Some(date(2014, 5, 1)),
            updated_on: None,
            expires_on: Some(date(2013, 1, 1)),
        };
        assert_eq!(domain_age(&corrupt), None);
    }

    #[test]
    fn creation_gap_counts_whole_days() {
        let mut link = base_link();
        link.created_at = ts("2013-10-03T15:00:00Z");
        let whois = WhoisRecord {
            created_on: Some(date(2013, 10, 1)),
            updated_on: None,
            expires_on: None,
        };
        assert_eq!(creation_gap(&whois, &link), Some(2));

        link.created_at = ts("2013-10-01T23:59:59Z");
        assert_eq!(creation_gap(&whois, &link), Some(0));

        let absent = WhoisRecord {
            created_on: None,
            updated_on: Some(date(2013, 10, 1)),
            expires_on: None,
        };
        assert_eq!(creation_gap(&absent, &link), None);
    }

    #[test]
    fn negative_creation_gap_is_preserved() {
        let mut link = base_link();
        link.created_at = ts("2013-09-30T12:00:00Z");
        let whois = WhoisRecord {
            created_on: Some(date(2013, 10, 2)),
            updated_on: None,
            expires_on: None,
        };
        assert_eq!(creation_gap(&whois, &link), Some(-2));
    }

    #[test]
    fn creation_hour_boundaries() {
        let mut link = base_link();
        for (raw, hour) in [
            ("2013-10-05T03:14:00Z", 3),
            ("2013-10-05T23:59:59Z", 23),
            ("2013-10-05T00:00:00Z", 0),
        ] {
            link.created_at = ts(raw);
            assert_eq!(creation_hour(&link), hour);
        }
    }

    fn enc(id: &str, kind: EncoderKind) -> EncoderRef {
        EncoderRef {
            account_id: id.to_string(),
            kind,
            application_name: (kind == EncoderKind::Application).then(|| id.to_string()),
        }
    }

    #[test]
    fn encoder_count_distinct_plus_anonymous_occurrences() {
        let mut link = base_link();
        link.encoders = vec![enc("u1", EncoderKind::Regular)];
        assert_eq!(encoder_count(&link), 1);

        link.encoders = vec![
            enc("u1", EncoderKind::Regular),
            enc("u2", EncoderKind::Regular),
            enc("u1", EncoderKind::Regular),
        ];
        assert_eq!(encoder_count(&link), 2);

        link.encoders = vec![
            enc("someone", EncoderKind::Anonymous),
            enc("someone", EncoderKind::Anonymous),
        ];
        assert_eq!(encoder_count(&link), 2);
    }

    #[test]
    fn encoder_type_ratio_counts_occurrences() {
        let mut link = base_link();
        link.encoders = vec![
            enc("someone", EncoderKind::Anonymous),
            enc("user1", EncoderKind::Regular),
            enc("twitterfeed", EncoderKind::Application),
            enc("user2", EncoderKind::Regular),
        ];
        assert_eq!(encoder_type_ratio(&link), 0.5);

        link.encoders = vec![enc("u1", EncoderKind::Regular), enc("u2", EncoderKind::Regular)];
        assert_eq!(encoder_type_ratio(&link), 0.0);

        link.encoders = vec![
            enc("someone", EncoderKind::Anonymous),
            enc("anonymous", EncoderKind::Anonymous),
        ];
        assert_eq!(encoder_type_ratio(&link), 1.0);
    }

    #[test]
    fn click_lag_uses_earliest_click() {
        let mut link = base_link();
        link.created_at = ts("2013-10-01T10:00:00Z");
        link.clicks = vec![
            ClickEvent { at: ts("2013-10-06T09:00:00Z"), count: 2 },
            ClickEvent { at: ts("2013-10-04T11:00:00Z"), count: 1 },
        ];
        assert_eq!(click_lag(&link), Some(3));

        link.clicks = vec![ClickEvent { at: ts("2013-10-01T23:00:00Z"), count: 1 }];
        assert_eq!(click_lag(&link), Some(0));

        link.clicks.clear();
        assert_eq!(click_lag(&link), None);
    }

    #[test]
    fn direct_ratio_counts_entries_not_clicks() {
        let mut link = base_link();
        link.referrers = vec![
            ReferrerStat { referrer: Referrer::Direct, clicks: 1 },
            ReferrerStat { referrer: Referrer::Domain("twitter.com".into()), clicks: 99 },
            ReferrerStat { referrer: Referrer::Domain("facebook.com".into()), clicks: 50 },
        ];
        assert!((direct_referrer_ratio(&link) - 1.0 / 3.0).abs() < 1e-12);

        link.referrers.clear();
        assert_eq!(direct_referrer_ratio(&link), 0.0);

        link.referrers = vec![ReferrerStat { referrer: Referrer::Direct, clicks: 7 }];
        assert_eq!(direct_referrer_ratio(&link), 1.0);
    }

    #[test]
    fn extract_zero_click_link_under_both_schemas() {
        let corpus = sample_corpus();
        let link = &corpus.links[1]; // no clicks, no referrers
        let full = extract(link, link.whois.as_ref(), FeatureSchema::Full);
        let click = full.click.as_ref().unwrap();
        assert_eq!(click.click_lag_days, None);
        assert_eq!(click.direct_referrer_ratio, 0.0);

        let non_click = extract(link, link.whois.as_ref(), FeatureSchema::NonClick);
        assert!(non_click.click.is_none());
        assert_eq!(full.restrict_to_non_click(), non_click);
        assert_eq!(non_click.to_row().len(), 5);
        assert_eq!(full.to_row().len(), 7);
    }

    #[test]
    fn extraction_ignores_label_and_warning_count() {
        let mut link = base_link();
        let before = extract(&link, link.whois.as_ref(), FeatureSchema::Full);
        link.warning_count = 9999;
        let after = extract(&link, link.whois.as_ref(), FeatureSchema::Full);
        assert_eq!(before, after);
    }

    #[test]
    fn generated_corpus_vectors_satisfy_bounds_and_restriction() {
        let config = crate::corpus::synth::GeneratorConfig {
            benign_links: 150,
            malicious_links: 150,
            ..Default::default()
        };
        let corpus = crate::corpus::synth::generate_synthetic(&config, 17).unwrap();
        for link in &corpus.links {
            let full = extract(link, link.whois.as_ref(), FeatureSchema::Full);
            let non_click = extract(link, link.whois.as_ref(), FeatureSchema::NonClick);
            assert_eq!(full.restrict_to_non_click(), non_click);
            assert!(full.creation_hour <= 23);
            assert!(full.encoder_count >= 1);
            assert!((0.0..=1.0).contains(&full.encoder_type_ratio));
            let click = full.click.as_ref().unwrap();
            assert!((0.0..=1.0).contains(&click.direct_referrer_ratio));
            if link.clicks.is_empty() {
                assert_eq!(click.click_lag_days, None);
            } else {
                assert!(click.click_lag_days.unwrap() >= 0);
            }
        }
    }

    fn dataset(schema: FeatureSchema) -> Vec<LabeledInstance> {
        let corpus = sample_corpus();
        let labels = corpus
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                (
                    l.short_hash.clone(),
                    if i % 2 == 0 { LabelValue::Malicious } else { LabelValue::Benign },
                )
            })
            .collect();
        extract_dataset(&corpus.links, &labels, schema).unwrap()
    }

    #[test]
    fn csv_roundtrip_preserves_instances() {
        for schema in [FeatureSchema::Full, FeatureSchema::NonClick] {
            let instances = dataset(schema);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("features.csv");
            write_features_csv(&path, &instances).unwrap();
            let text = std::fs::read_to_string(&path).unwrap();
            let header = text.lines().next().unwrap();
            match schema {
                FeatureSchema::Full => assert_eq!(
                    header,
                    "link_id,schema,domain_age,creation_gap,creation_hour,encoder_count,encoder_type_ratio,click_lag,direct_ratio,label"
                ),
                FeatureSchema::NonClick => assert_eq!(
                    header,
                    "link_id,schema,domain_age,creation_gap,creation_hour,encoder_count,encoder_type_ratio,label"
                ),
            }
            // MISSING cells serialize as empty.
            assert!(text.lines().any(|l| l.contains(",,")));
            let back = read_features_csv(&path).unwrap();
            assert_eq!(back, instances);
        }
    }

    #[test]
    fn csv_rejects_mixed_schemas_and_bad_rows() {
        let mut instances = dataset(FeatureSchema::Full);
        instances[1].features = instances[1].features.restrict_to_non_click();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let err = write_features_csv(&path, &instances).unwrap_err();
        assert_eq!(err.exit_code(), 3);

        let good = dataset(FeatureSchema::NonClick);
        write_features_csv(&path, &good).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("zzz,NON_CLICK,1,2,bad,1,0,BENIGN\n");
        std::fs::write(&path, text).unwrap();
        assert!(read_features_csv(&path).is_err());
    }

    #[test]
    fn missing_label_for_link_is_an_invariant_error() {
        let corpus = sample_corpus();
        let labels = std::collections::BTreeMap::new();
        let err = extract_dataset(&corpus.links, &labels, FeatureSchema::Full).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    proptest! {
        #[test]
        fn ratio_cells_roundtrip_through_csv(num in 0u32..50, den in 1u32..50) {
            let ratio = f64::from(num.min(den)) / f64::from(den);
            let cell = format_cell(Some(ratio));
            let back: f64 = cell.parse().unwrap();
            prop_assert_eq!(back, ratio);
        }

        #[test]
        fn day_counts_roundtrip_as_integers(days in -4000i64..4000) {
            let cell = format_cell(Some(days as f64));
            prop_assert_eq!(cell.clone(), format!("{days}"));
            let back: f64 = cell.parse().unwrap();
            prop_assert_eq!(back as i64, days);
        }
    }
}
