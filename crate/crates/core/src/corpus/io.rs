//! Corpus directory layout and JSONL I/O.
//!
//! A corpus directory holds `links.jsonl` (one [`ShortLinkRecord`] per
//! line, WHOIS omitted), `whois.jsonl` (one record per domain),
//! `encoders.jsonl` (one [`EncoderProfile`] per line), an optional
//! `truth.jsonl` sidecar (`{short_hash, malicious}`), and `MANIFEST.json`
//! with the schema version and — for synthetic corpora — the generator seed
//! and config. All text is UTF-8; all timestamps RFC 3339.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::synth::GeneratorConfig;
use crate::corpus::{default_anonymous_tokens, Corpus, ShortLinkRecord, WhoisRecord};
use crate::error::{Error, Result};
use crate::profile::EncoderProfile;

/// Version of the corpus directory layout this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

pub const LINKS_FILE: &str = "links.jsonl";
pub const WHOIS_FILE: &str = "whois.jsonl";
pub const ENCODERS_FILE: &str = "encoders.jsonl";
pub const TRUTH_FILE: &str = "truth.jsonl";
pub const MANIFEST_FILE: &str = "MANIFEST.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorStamp>,
}

impl Manifest {
    pub fn plain() -> Manifest {
        Manifest {
            schema_version: SCHEMA_VERSION,
            generator: None,
        }
    }

    pub fn synthetic(seed: u64, config: GeneratorConfig) -> Manifest {
        Manifest {
            schema_version: SCHEMA_VERSION,
            generator: Some(GeneratorStamp { seed, config }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorStamp {
    pub seed: u64,
    pub config: GeneratorConfig,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhoisRow {
    domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_on: Option<chrono::NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    updated_on: Option<chrono::NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expires_on: Option<chrono::NaiveDate>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthRow {
    short_hash: String,
    malicious: bool,
}

/// Read a JSONL file into records, reporting the 1-based line of any
/// malformed row. Blank lines are ignored.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Write records as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| {
            Error::invariant("jsonl serialization", e.to_string())
        })?;
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.clone(),
        line: 1,
        message: e.to_string(),
    })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaMismatch {
            expected: format!("corpus schema_version {SCHEMA_VERSION}"),
            found: format!("schema_version {}", manifest.schema_version),
        });
    }
    Ok(manifest)
}

pub fn save_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::invariant("manifest serialization", e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Load and validate a corpus directory; WHOIS records are joined onto
/// links by domain.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    load_manifest(dir)?;
    let mut links: Vec<ShortLinkRecord> = read_jsonl(&dir.join(LINKS_FILE))?;
    let whois_rows: Vec<WhoisRow> = read_jsonl(&dir.join(WHOIS_FILE))?;
    let profiles: Vec<EncoderProfile> = read_jsonl(&dir.join(ENCODERS_FILE))?;

    let mut whois: BTreeMap<String, WhoisRecord> = BTreeMap::new();
    for row in whois_rows {
        let record = WhoisRecord {
            created_on: row.created_on,
            updated_on: row.updated_on,
            expires_on: row.expires_on,
        };
        if whois.insert(row.domain.clone(), record).is_some() {
            return Err(Error::invariant(
                format!("whois for {}", row.domain),
                "duplicate domain entry",
            ));
        }
    }
    for link in &mut links {
        link.whois = whois.get(&link.domain).copied();
    }

    let mut encoders = BTreeMap::new();
    for profile in profiles {
        let id = profile.account_id.clone();
        if encoders.insert(id.clone(), profile).is_some() {
            return Err(Error::invariant(
                format!("encoder {id}"),
                "duplicate profile entry",
            ));
        }
    }

    let corpus = Corpus { links, encoders };
    corpus.validate(&default_anonymous_tokens())?;
    Ok(corpus)
}

/// Write a corpus directory. Links sharing a domain must agree on their
/// WHOIS record, since WHOIS is stored per domain.
pub fn save_corpus(dir: &Path, corpus: &Corpus, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut whois: BTreeMap<String, Option<WhoisRecord>> = BTreeMap::new();
    for link in &corpus.links {
        match whois.entry(link.domain.clone()) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(link.whois);
            }
            std::collections::btree_map::Entry::Occupied(o) => {
                if *o.get() != link.whois {
                    return Err(Error::invariant(
                        format!("whois for {}", link.domain),
                        "links on one domain disagree on the WHOIS record",
                    ));
                }
            }
        }
    }
    let whois_rows: Vec<WhoisRow> = whois
        .into_iter()
        .filter_map(|(domain, record)| {
            record.map(|r| WhoisRow {
                domain,
                created_on: r.created_on,
                updated_on: r.updated_on,
                expires_on: r.expires_on,
            })
        })
        .collect();

    write_jsonl(&dir.join(LINKS_FILE), &corpus.links)?;
    write_jsonl(&dir.join(WHOIS_FILE), &whois_rows)?;
    let profiles: Vec<&EncoderProfile> = corpus.encoders.values().collect();
    write_jsonl(&dir.join(ENCODERS_FILE), &profiles)?;
    save_manifest(dir, manifest)
}

/// Load the `truth.jsonl` sidecar (short_hash → malicious).
pub fn load_truth(path: &Path) -> Result<BTreeMap<String, bool>> {
    let rows: Vec<TruthRow> = read_jsonl(path)?;
    let mut truth = BTreeMap::new();
    for row in rows {
        if truth.insert(row.short_hash.clone(), row.malicious).is_some() {
            return Err(Error::invariant(
                format!("truth for {}", row.short_hash),
                "duplicate entry",
            ));
        }
    }
    Ok(truth)
}

pub fn save_truth(path: &Path, truth: &BTreeMap<String, bool>) -> Result<()> {
    let rows: Vec<TruthRow> = truth
        .iter()
        .map(|(short_hash, &malicious)| TruthRow {
            short_hash: short_hash.clone(),
            malicious,
        })
        .collect();
    write_jsonl(path, &rows)
}
