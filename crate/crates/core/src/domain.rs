//! Registrable-domain extraction backed by a bundled public-suffix snapshot.
//!
//! The snapshot (`data/psl_snapshot.dat`) is a trimmed, versioned dump in the
//! public-suffix rule grammar: one rule per line, `*` matches exactly one
//! label, a leading `!` marks an exception rule, `//` starts a comment.
//! Matching follows the published algorithm: an exception rule prevails,
//! otherwise the matching rule with the most labels, with an implicit `*`
//! rule when nothing matches. The registrable domain is the public suffix
//! plus one label.

use std::collections::HashMap;
use std::sync::OnceLock;

use url::{Host, Url};

use crate::error::{Error, Result};

const SNAPSHOT: &str = include_str!("../data/psl_snapshot.dat");

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum RuleKind {
    Normal,
    Exception,
}

#[derive(Default, Debug)]
struct Node {
    children: HashMap<String, Node>,
    rule: Option<RuleKind>,
}

/// A parsed suffix rule set, keyed right-to-left by label.
#[derive(Debug)]
pub struct SuffixList {
    root: Node,
    pub snapshot_version: u32,
}

impl SuffixList {
    /// The compiled-in snapshot, parsed once per process.
    pub fn bundled() -> &'static SuffixList {
        static LIST: OnceLock<SuffixList> = OnceLock::new();
        LIST.get_or_init(|| SuffixList::parse(SNAPSHOT).expect("bundled suffix snapshot is valid"))
    }

    pub fn parse(text: &str) -> Result<SuffixList> {
        let mut root = Node::default();
        let mut version = None;
        for raw in text.lines() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix("//") {
                if let Some(v) = comment.trim().strip_prefix("snapshot-version:") {
                    version = v.trim().parse::<u32>().ok();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let token = line.split_whitespace().next().unwrap();
            let (kind, rule) = match token.strip_prefix('!') {
                Some(rest) => (RuleKind::Exception, rest),
                None => (RuleKind::Normal, token),
            };
            let rule = rule.to_ascii_lowercase();
            if rule.is_empty() || rule.split('.').any(|label| label.is_empty()) {
                return Err(Error::invariant(
                    "suffix snapshot",
                    format!("malformed rule {token:?}"),
                ));
            }
            let mut node = &mut root;
            for label in rule.split('.').rev() {
                node = node.children.entry(label.to_string()).or_default();
            }
            node.rule = Some(kind);
        }
        let snapshot_version = version.ok_or_else(|| {
            Error::invariant("suffix snapshot", "missing snapshot-version header")
        })?;
        Ok(SuffixList {
            root,
            snapshot_version,
        })
    }

    /// Registrable domain of a bare, already-extracted host name.
    pub fn registrable_domain_of_host(&self, host: &str) -> Result<String> {
        let err = |message: &str| Error::Url {
            url: host.to_string(),
            message: message.to_string(),
        };
        let normalized = host.trim_end_matches('.').to_ascii_lowercase();
        if normalized.is_empty() {
            return Err(err("empty host"));
        }
        let labels: Vec<&str> = normalized.split('.').collect();
        if labels.iter().any(|label| label.is_empty()) {
            return Err(err("host contains an empty label"));
        }
        let suffix = self.public_suffix_len(&labels);
        if labels.len() <= suffix {
            return Err(err("host is a public suffix with no registrable domain"));
        }
        Ok(labels[labels.len() - suffix - 1..].join("."))
    }

    /// Number of trailing labels of `labels` that form the public suffix.
    pub fn public_suffix_len(&self, labels: &[&str]) -> usize {
        let mut best_normal = 1; // the implicit "*" rule
        let mut best_exception = 0;
        walk(
            &self.root,
            labels,
            labels.len(),
            &mut best_normal,
            &mut best_exception,
        );
        if best_exception > 0 {
            best_exception - 1 // exception rules shed their leftmost label
        } else {
            best_normal
        }
    }
}

fn walk(
    node: &Node,
    labels: &[&str],
    remaining: usize,
    best_normal: &mut usize,
    best_exception: &mut usize,
) {
    if remaining == 0 {
        return;
    }
    let label = labels[remaining - 1];
    let depth = labels.len() - remaining + 1;
    for key in [label, "*"] {
        if let Some(child) = node.children.get(key) {
            match child.rule {
                Some(RuleKind::Normal) => *best_normal = (*best_normal).max(depth),
                Some(RuleKind::Exception) => *best_exception = (*best_exception).max(depth),
                None => {}
            }
            walk(child, labels, remaining - 1, best_normal, best_exception);
        }
    }
}

/// Lowercase registrable domain of an absolute URL.
///
/// Stable under scheme, path, and query changes. Errors on unparseable URLs
/// and on hosts with no registrable domain (IP addresses, bare suffixes).
pub fn registrable_domain(url: &str) -> Result<String> {
    let parsed = Url::parse(url).map_err(|e| Error::Url {
        url: url.to_string(),
        message: e.to_string(),
    })?;
    match parsed.host() {
        Some(Host::Domain(host)) => SuffixList::bundled().registrable_domain_of_host(host),
        Some(_) => Err(Error::Url {
            url: url.to_string(),
            message: "IP-address host has no registrable domain".to_string(),
        }),
        None => Err(Error::Url {
            url: url.to_string(),
            message: "URL has no host".to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn rd(url: &str) -> String {
        registrable_domain(url).unwrap()
    }

    #[test]
    fn strips_subdomains_and_normalizes() {
        assert_eq!(rd("http://a.timesfancy.in/x?y=1"), "timesfancy.in");
        assert_eq!(rd("https://WWW.Example.com/"), "example.com");
        assert_eq!(rd("http://example.com./path"), "example.com");
        assert_eq!(rd("https://deep.sub.tree.example.co.uk/a?b=c#d"), "example.co.uk");
    }

    #[test]
    fn stable_under_scheme_path_and_query() {
        for variant in [
            "http://news.example.org/a/b",
            "https://news.example.org/?q=1",
            "ftp://news.example.org",
            "https://news.example.org:8443/x#frag",
        ] {
            assert_eq!(rd(variant), "example.org", "variant {variant}");
        }
    }

    #[test]
    fn rejects_unparseable_and_suffix_only_hosts() {
        assert!(registrable_domain("not a url").is_err());
        assert!(registrable_domain("http://com/").is_err());
        assert!(registrable_domain("http://co.uk/").is_err());
        assert!(registrable_domain("http://192.168.0.1/x").is_err());
        assert!(registrable_domain("http://[::1]/").is_err());
        assert!(registrable_domain("mailto:user@example.com").is_err());
    }

    #[test]
    fn suffix_algorithm_vectors() {
        // (host, registrable domain); None marks hosts that are suffixes.
        let cases: &[(&str, Option<&str>)] = &[
            ("example.com", Some("example.com")),
            ("www.example.com", Some("example.com")),
            ("example.co.uk", Some("example.co.uk")),
            ("b.example.co.uk", Some("example.co.uk")),
            ("uk", None),
            ("co.uk", None),
            // wildcard rule *.ck with exception !www.ck
            ("ck", None),
            ("test.ck", None),
            ("b.test.ck", Some("b.test.ck")),
            ("a.b.test.ck", Some("b.test.ck")),
            ("www.ck", Some("www.ck")),
            ("a.www.ck", Some("www.ck")),
            // unlisted TLD falls back to the implicit * rule
            ("nowhere", None),
            ("example.nowhere", Some("example.nowhere")),
            ("a.example.nowhere", Some("example.nowhere")),
            // hosting providers are suffixes of their customers' sites
            ("github.io", None),
            ("user.github.io", Some("user.github.io")),
            ("a.user.github.io", Some("user.github.io")),
            ("blogspot.com", None),
            ("myblog.blogspot.com", Some("myblog.blogspot.com")),
        ];
        let list = SuffixList::bundled();
        for &(host, expect) in cases {
            let got = list.registrable_domain_of_host(host);
            match expect {
                Some(domain) => assert_eq!(got.unwrap(), domain, "host {host}"),
                None => assert!(got.is_err(), "host {host} should have no registrable domain"),
            }
        }
    }

    #[test]
    fn bundled_snapshot_carries_version() {
        assert_eq!(SuffixList::bundled().snapshot_version, 1);
    }

    #[test]
    fn rejects_malformed_snapshot() {
        assert!(SuffixList::parse("// snapshot-version: 1\nfoo..bar\n").is_err());
        assert!(SuffixList::parse("com\n").is_err()); // no version header
    }

    proptest! {
        #[test]
        fn idempotent_on_its_own_output(
            labels in proptest::collection::vec("[a-z]{1,8}", 1..4),
            tld in "(com|co\\.uk|ck|io|in|nowhere)",
        ) {
            let host = format!("{}.{}", labels.join("."), tld);
            if let Ok(domain) = registrable_domain(&format!("http://{host}/p")) {
                prop_assert_eq!(registrable_domain(&format!("http://{domain}")).unwrap(), domain);
            }
        }
    }
}
