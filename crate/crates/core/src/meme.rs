//! Meme identification (hashtags, normalized URLs, mentions) and the
//! per-meme time-ordered index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::TweetRecord;
use crate::{Timestamp, TweetId};

/// Minimum number of posts for a meme to be analyzable downstream.
pub const MIN_ANALYZABLE_TWEETS: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MemeError {
    #[error("invalid url: {0:?}")]
    InvalidUrl(String),
    #[error("unknown meme kind {0:?} (expected hashtag, url or mention)")]
    UnknownKind(String),
    #[error("empty meme key")]
    EmptyKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemeKind {
    Hashtag,
    Url,
    Mention,
}

impl MemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MemeKind::Hashtag => "hashtag",
            MemeKind::Url => "url",
            MemeKind::Mention => "mention",
        }
    }
}

impl fmt::Display for MemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemeKind {
    type Err = MemeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hashtag" => Ok(MemeKind::Hashtag),
            "url" => Ok(MemeKind::Url),
            "mention" => Ok(MemeKind::Mention),
            other => Err(MemeError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemeId {
    pub kind: MemeKind,
    pub key: String,
}

impl MemeId {
    pub fn hashtag(tag: &str) -> Self {
        MemeId { kind: MemeKind::Hashtag, key: tag.trim_start_matches('#').to_lowercase() }
    }

    pub fn mention(user: u64) -> Self {
        MemeId { kind: MemeKind::Mention, key: user.to_string() }
    }

    pub fn url(raw: &str) -> Result<Self, MemeError> {
        Ok(MemeId { kind: MemeKind::Url, key: normalize_url(raw)? })
    }

    /// Builds an id from user-supplied kind and key, canonicalizing the key.
    pub fn parse(kind: MemeKind, key: &str) -> Result<Self, MemeError> {
        if key.trim().is_empty() {
            return Err(MemeError::EmptyKey);
        }
        match kind {
            MemeKind::Hashtag => Ok(MemeId::hashtag(key)),
            MemeKind::Url => MemeId::url(key),
            MemeKind::Mention => Ok(MemeId {
                kind,
                key: key.trim_start_matches('@').to_string(),
            }),
        }
    }

    /// True when `r` carries this meme.
    pub fn occurs_in(&self, r: &TweetRecord) -> bool {
        match self.kind {
            MemeKind::Hashtag => r.hashtags.contains(&self.key),
            MemeKind::Mention => r.mentions.iter().any(|m| m.to_string() == self.key),
            MemeKind::Url => r
                .urls
                .iter()
                .any(|u| normalize_url(u).is_ok_and(|n| n == self.key)),
        }
    }
}

impl fmt::Display for MemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MemeKind::Hashtag => write!(f, "#{}", self.key),
            MemeKind::Mention => write!(f, "@{}", self.key),
            MemeKind::Url => f.write_str(&self.key),
        }
    }
}

fn valid_scheme(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// Canonical URL form: lowercase scheme and host, no fragment, no default
/// port, no lone "/" path. Path case and the query string are kept verbatim.
pub fn normalize_url(raw: &str) -> Result<String, MemeError> {
    let invalid = || MemeError::InvalidUrl(raw.to_string());
    let raw = raw.trim();
    if raw.is_empty() || raw.chars().any(char::is_whitespace) {
        return Err(invalid());
    }
    let (scheme, rest) = raw.split_once("://").ok_or_else(invalid)?;
    if !valid_scheme(scheme) {
        return Err(invalid());
    }
    let scheme = scheme.to_ascii_lowercase();
    let rest = rest.split_once('#').map_or(rest, |(before, _)| before);
    let (before_query, query) = match rest.find('?') {
        Some(i) => rest.split_at(i),
        None => (rest, ""),
    };
    let (authority, path) = match before_query.find('/') {
        Some(i) => before_query.split_at(i),
        None => (before_query, ""),
    };
    let (userinfo, hostport) = match authority.rfind('@') {
        Some(i) => (&authority[..=i], &authority[i + 1..]),
        None => ("", authority),
    };
    // bracketed IPv6 hosts contain ':' themselves
    let port_sep = match hostport.rfind(']') {
        Some(close) => hostport[close..].find(':').map(|i| close + i),
        None => hostport.rfind(':'),
    };
    let (host, port) = match port_sep {
        Some(i) => (&hostport[..i], &hostport[i + 1..]),
        None => (hostport, ""),
    };
    if host.is_empty() || !port.chars().all(|c| c.is_ascii_digit()) {
        return Err(invalid());
    }
    let host = host.to_ascii_lowercase();
    let default_port = matches!((scheme.as_str(), port), ("http", "80") | ("https", "443"));
    let mut out = String::with_capacity(raw.len());
    out.push_str(&scheme);
    out.push_str("://");
    out.push_str(userinfo);
    out.push_str(&host);
    if !port.is_empty() && !default_port {
        out.push(':');
        out.push_str(port);
    }
    if path != "/" {
        out.push_str(path);
    }
    out.push_str(query);
    Ok(out)
}

/// All memes carried by one record. Unnormalizable URLs are skipped.
pub fn extract_memes(r: &TweetRecord) -> BTreeSet<MemeId> {
    let mut set = BTreeSet::new();
    for tag in &r.hashtags {
        if !tag.is_empty() {
            set.insert(MemeId::hashtag(tag));
        }
    }
    for url in &r.urls {
        if let Ok(id) = MemeId::url(url) {
            set.insert(id);
        }
    }
    for &m in &r.mentions {
        set.insert(MemeId::mention(m));
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemeRef {
    pub tweet_id: TweetId,
    pub created_at: Timestamp,
    /// Position of the record in the stream the index was built from.
    pub position: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemeIndex {
    entries: BTreeMap<MemeId, Vec<MemeRef>>,
}

impl MemeIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &MemeId) -> Option<&[MemeRef]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MemeId, &[MemeRef])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn total_refs(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_analyzable(&self, id: &MemeId) -> bool {
        self.get(id).is_some_and(|refs| refs.len() >= MIN_ANALYZABLE_TWEETS)
    }

    /// Memes with at least [`MIN_ANALYZABLE_TWEETS`] posts, in key order.
    pub fn analyzable(&self) -> impl Iterator<Item = (&MemeId, &[MemeRef])> {
        self.iter().filter(|(_, refs)| refs.len() >= MIN_ANALYZABLE_TWEETS)
    }

    /// Records for `id`, in index order.
    pub fn posts<'a>(&self, id: &MemeId, stream: &'a [TweetRecord]) -> Vec<&'a TweetRecord> {
        self.get(id)
            .unwrap_or_default()
            .iter()
            .map(|r| &stream[r.position])
            .collect()
    }
}

pub fn build_index(stream: &[TweetRecord]) -> MemeIndex {
    let mut entries: BTreeMap<MemeId, Vec<MemeRef>> = BTreeMap::new();
    for (position, r) in stream.iter().enumerate() {
        for id in extract_memes(r) {
            entries.entry(id).or_default().push(MemeRef {
                tweet_id: r.tweet_id,
                created_at: r.created_at,
                position,
            });
        }
    }
    // a no-op for streams from load_stream; keeps the invariant for any input
    for refs in entries.values_mut() {
        refs.sort_by_key(|r| (r.created_at, r.tweet_id));
    }
    MemeIndex { entries }
}
