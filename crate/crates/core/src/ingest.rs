//! Line-delimited post records: parsing, validation, canonical
//! serialization and ordered loading.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Timestamp, TweetId, UserId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// One post. Field declaration order is alphabetical so that serialization
/// emits keys in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub author_created_at: Timestamp,
    pub author_id: UserId,
    pub created_at: Timestamp,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<UserId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of_tweet_id: Option<TweetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of_user_id: Option<UserId>,
    pub text: String,
    pub tweet_id: TweetId,
    #[serde(default)]
    pub urls: Vec<String>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of_tweet_id.is_some()
    }

    /// Total order key used everywhere a stream is sorted.
    pub fn order_key(&self) -> (Timestamp, TweetId) {
        (self.created_at, self.tweet_id)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.retweet_of_tweet_id.is_some() != self.retweet_of_user_id.is_some() {
            return Err(IngestError::SchemaViolation(
                "retweet_of_tweet_id and retweet_of_user_id must be set together".into(),
            ));
        }
        if self.created_at < self.author_created_at {
            return Err(IngestError::SchemaViolation(format!(
                "created_at {} precedes author_created_at {}",
                self.created_at, self.author_created_at
            )));
        }
        for tag in &self.hashtags {
            if tag.is_empty() || tag.starts_with('#') {
                return Err(IngestError::SchemaViolation(format!("bad hashtag {tag:?}")));
            }
            if tag.chars().any(char::is_uppercase) {
                return Err(IngestError::SchemaViolation(format!(
                    "hashtag {tag:?} is not lowercase"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_record(line: &str) -> Result<TweetRecord, IngestError> {
    let rec: TweetRecord = serde_json::from_str(line).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => IngestError::SchemaViolation(e.to_string()),
            _ => IngestError::MalformedLine(e.to_string()),
        }
    })?;
    rec.validate()?;
    Ok(rec)
}

/// Serializes one record as a single JSON line (no trailing newline).
pub fn serialize_record(r: &TweetRecord) -> String {
    serde_json::to_string(r).expect("record serialization is infallible")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StreamReport {
    pub n_records: usize,
    /// Lines that failed to parse plus duplicate ids.
    pub n_rejected: usize,
    pub n_duplicate_ids: usize,
    /// Accepted lines whose order key is below the previous accepted line's.
    pub n_order_violations: usize,
    pub first_ts: Option<Timestamp>,
    pub last_ts: Option<Timestamp>,
}

/// Reads records from any line source. Blank lines are ignored; every other
/// line is either accepted or counted in `n_rejected`.
pub fn read_stream<R: BufRead>(reader: R) -> Result<(Vec<TweetRecord>, StreamReport), IngestError> {
    let mut report = StreamReport::default();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut prev_key = None;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = match parse_record(&line) {
            Ok(r) => r,
            Err(_) => {
                report.n_rejected += 1;
                continue;
            }
        };
        if !seen.insert(rec.tweet_id) {
            report.n_duplicate_ids += 1;
            report.n_rejected += 1;
            continue;
        }
        let key = rec.order_key();
        if prev_key.is_some_and(|p| key < p) {
            report.n_order_violations += 1;
        }
        prev_key = Some(key);
        out.push(rec);
    }
    out.sort_by_key(TweetRecord::order_key);
    report.n_records = out.len();
    report.first_ts = out.first().map(|r| r.created_at);
    report.last_ts = out.last().map(|r| r.created_at);
    Ok((out, report))
}

pub fn load_stream(path: impl AsRef<Path>) -> Result<(Vec<TweetRecord>, StreamReport), IngestError> {
    let file = File::open(path)?;
    read_stream(BufReader::new(file))
}

pub fn write_stream<W: Write>(mut w: W, records: &[TweetRecord]) -> io::Result<()> {
    for r in records {
        w.write_all(serialize_record(r).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TweetRecord {
        TweetRecord {
            author_created_at: 100,
            author_id: 7,
            created_at: 1000,
            hashtags: vec!["gop".into()],
            mentions: vec![3, 4],
            retweet_of_tweet_id: Some(11),
            retweet_of_user_id: Some(2),
            text: "RT hello #gop".into(),
            tweet_id: 12,
            urls: vec!["http://x.com/a".into()],
        }
    }

    #[test]
    fn parses_full_record_with_retweet_pair() {
        let line = r#"{"author_created_at":100,"author_id":7,"created_at":1000,"hashtags":["gop"],"mentions":[3,4],"retweet_of_tweet_id":11,"retweet_of_user_id":2,"text":"RT hello #gop","tweet_id":12,"urls":["http://x.com/a"]}"#;
        let r = parse_record(line).unwrap();
        assert_eq!(r, sample());
        assert_eq!(serialize_record(&r), line);
    }

    #[test]
    fn missing_author_is_schema_violation() {
        let line = r#"{"author_created_at":1,"created_at":2,"text":"x","tweet_id":1}"#;
        assert!(matches!(parse_record(line), Err(IngestError::SchemaViolation(_))));
    }

    #[test]
    fn half_retweet_pair_is_schema_violation() {
        let line = r#"{"author_created_at":1,"author_id":1,"created_at":2,"text":"x","tweet_id":1,"retweet_of_tweet_id":5}"#;
        assert!(matches!(parse_record(line), Err(IngestError::SchemaViolation(_))));
    }

    #[test]
    fn post_before_account_creation_rejected() {
        let line = r#"{"author_created_at":10,"author_id":1,"created_at":2,"text":"x","tweet_id":1}"#;
        assert!(matches!(parse_record(line), Err(IngestError::SchemaViolation(_))));
    }

    #[test]
    fn hashtag_with_hash_rejected() {
        let line = r##"{"author_created_at":1,"author_id":1,"created_at":2,"text":"x","tweet_id":1,"hashtags":["#a"]}"##;
        assert!(matches!(parse_record(line), Err(IngestError::SchemaViolation(_))));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(parse_record("{not json"), Err(IngestError::MalformedLine(_))));
        assert!(matches!(parse_record(""), Err(IngestError::MalformedLine(_))));
    }

    #[test]
    fn empty_lists_and_unicode_round_trip() {
        let mut r = sample();
        r.hashtags.clear();
        r.mentions.clear();
        r.urls.clear();
        r.retweet_of_tweet_id = None;
        r.retweet_of_user_id = None;
        r.text = "Ünïcødé 🐘 «quoted» \"x\"\n".into();
        let s = serialize_record(&r);
        assert!(s.contains(r#""hashtags":[]"#));
        assert!(!s.contains("retweet_of"));
        assert_eq!(parse_record(&s).unwrap(), r);
    }

    fn line(id: u64, ts: i64) -> String {
        format!(r#"{{"author_created_at":0,"author_id":1,"created_at":{ts},"text":"t","tweet_id":{id}}}"#)
    }

    #[test]
    fn load_sorts_shuffled_records() {
        let data = [line(1, 30), line(2, 10), line(3, 20)].join("\n");
        let (recs, rep) = read_stream(data.as_bytes()).unwrap();
        let ts: Vec<_> = recs.iter().map(|r| r.created_at).collect();
        assert_eq!(ts, vec![10, 20, 30]);
        assert_eq!(rep.n_order_violations, 1);
        assert_eq!((rep.first_ts, rep.last_ts), (Some(10), Some(30)));
    }

    #[test]
    fn duplicate_ids_keep_first() {
        let data = [line(1, 30), line(1, 10)].join("\n");
        let (recs, rep) = read_stream(data.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].created_at, 30);
        assert_eq!(rep.n_duplicate_ids, 1);
        assert_eq!(rep.n_records + rep.n_rejected, 2);
    }

    #[test]
    fn malformed_lines_are_counted_not_fatal() {
        let data = [line(1, 1), "oops".to_string(), line(2, 2)].join("\n");
        let (recs, rep) = read_stream(data.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(rep.n_rejected, 1);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_stream("/nonexistent/x.jsonl"), Err(IngestError::Io(_))));
    }
}
