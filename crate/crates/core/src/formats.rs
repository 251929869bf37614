//! File formats shared by the pipeline stages: meme summary CSV, feature
//! CSV, label CSV, model JSON, verdict JSON and campaign spec JSON.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassifierModel, Label};
use crate::features::{FeatureStats, MemeFeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::meme::{MemeId, MemeIndex, MemeKind};
use crate::pipeline::FeatureRow;
use crate::simulate::CampaignSpec;
use crate::{FeatureVector, Model, Verdict};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

/// Formats `v` with `digits` significant digits, switching to exponent
/// notation for very small or large magnitudes, trailing zeros trimmed.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row per meme: kind, key, post count and time span; most posts first.
pub fn write_extract_csv<W: Write>(w: W, index: &MemeIndex) -> Result<(), FormatError> {
    let mut rows: Vec<(&MemeId, usize, i64, i64)> = index
        .iter()
        .map(|(id, refs)| {
            let first = refs.first().map_or(0, |r| r.created_at);
            let last = refs.last().map_or(0, |r| r.created_at);
            (id, refs.len(), first, last)
        })
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.key.cmp(&b.0.key)).then_with(|| a.0.kind.cmp(&b.0.kind)));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["meme_kind", "meme_key", "n_tweets", "first_ts", "last_ts"])?;
    for (id, n, first, last) in rows {
        out.write_record([id.kind.as_str(), &id.key, &n.to_string(), &first.to_string(), &last.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn feature_header() -> Vec<&'static str> {
    let mut h = vec!["meme_kind", "meme_key"];
    h.extend(FEATURE_NAMES);
    h
}

pub fn write_features_csv<W: Write>(w: W, rows: &[FeatureRow]) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(feature_header())?;
    for row in rows {
        let mut rec = vec![row.meme.kind.as_str().to_string(), row.meme.key.clone()];
        rec.extend(row.vector.0.iter().map(|&v| fmt_sig(v, 9)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

fn parse_meme(kind: &str, key: &str) -> Result<MemeId, FormatError> {
    let kind: MemeKind = kind.parse().map_err(|e| FormatError::Invalid(format!("{e}")))?;
    MemeId::parse(kind, key).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn read_features_csv<R: Read>(r: R) -> Result<Vec<FeatureRow>, FormatError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != feature_header() {
        return invalid(format!("unexpected feature header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let meme = parse_meme(&rec[0], &rec[1])?;
        let mut values = [0.0; N_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            let field = &rec[i + 2];
            *v = field
                .parse()
                .map_err(|_| FormatError::Invalid(format!("bad {} value {field:?} for {meme}", FEATURE_NAMES[i])))?;
        }
        rows.push(FeatureRow { meme, vector: MemeFeatureVector(values) });
    }
    Ok(rows)
}

pub fn write_labels_csv<W: Write>(w: W, labels: &BTreeMap<MemeId, Label>) -> Result<(), FormatError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["meme_kind", "meme_key", "label"])?;
    for (id, label) in labels {
        out.write_record([id.kind.as_str(), &id.key, label.as_str()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(r: R) -> Result<BTreeMap<MemeId, Label>, FormatError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["meme_kind", "meme_key", "label"] {
        return invalid(format!("unexpected label header {header:?}"));
    }
    let mut labels = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let meme = parse_meme(&rec[0], &rec[1])?;
        let label: Label = rec[2].parse().map_err(FormatError::Invalid)?;
        if labels.insert(meme.clone(), label).is_some() {
            return invalid(format!("duplicate label for {meme}"));
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub stats_mean: Vec<f64>,
    pub stats_std: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl From<&Model> for ModelFile {
    fn from(m: &Model) -> Self {
        ModelFile {
            weights: m.weights.to_vec(),
            bias: m.bias,
            threshold: m.threshold,
            stats_mean: m.stats.mean.to_vec(),
            stats_std: m.stats.std.to_vec(),
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn thirteen(name: &str, v: &[f64]) -> Result<[f64; N_FEATURES], FormatError> {
    v.try_into()
        .map_err(|_| FormatError::Invalid(format!("{name} has {} entries, expected {N_FEATURES}", v.len())))
}

impl TryFrom<ModelFile> for Model {
    type Error = FormatError;
    fn try_from(f: ModelFile) -> Result<Self, FormatError> {
        if f.feature_names != FEATURE_NAMES {
            return invalid(format!("feature_names {:?} do not match the canonical order", f.feature_names));
        }
        let m = ClassifierModel {
            weights: thirteen("weights", &f.weights)?,
            bias: f.bias,
            stats: FeatureStats { mean: thirteen("stats_mean", &f.stats_mean)?, std: thirteen("stats_std", &f.stats_std)? },
            threshold: f.threshold,
        };
        m.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(m)
    }
}

pub fn model_to_json(m: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from(m)).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(s: &str) -> Result<Model, FormatError> {
    serde_json::from_str::<ModelFile>(s)?.try_into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub meme_kind: MemeKind,
    pub meme_key: String,
    pub score: f64,
    pub label: Label,
    /// Weight times scaled feature, in canonical feature order.
    pub contributions: Vec<f64>,
}

impl From<&Verdict> for VerdictRecord {
    fn from(v: &Verdict) -> Self {
        VerdictRecord {
            meme_kind: v.meme.kind,
            meme_key: v.meme.key.clone(),
            score: v.score,
            label: v.label,
            contributions: v.contributions.to_vec(),
        }
    }
}

pub fn verdicts_to_json(verdicts: &[Verdict]) -> String {
    let records: Vec<VerdictRecord> = verdicts.iter().map(VerdictRecord::from).collect();
    let mut s = serde_json::to_string_pretty(&records).expect("verdicts serialize");
    s.push('\n');
    s
}

pub fn verdicts_from_json(s: &str) -> Result<Vec<VerdictRecord>, FormatError> {
    Ok(serde_json::from_str(s)?)
}

/// Campaign spec file: a JSON list of specs; omitted fields take defaults.
pub fn campaigns_from_json(s: &str) -> Result<Vec<CampaignSpec>, FormatError> {
    Ok(serde_json::from_str(s)?)
}

/// Feature rows keyed by meme, dropping memes without a label.
pub fn join_labels(rows: &[FeatureRow], labels: &BTreeMap<MemeId, Label>) -> Vec<(FeatureVector, Label)> {
    rows.iter()
        .filter_map(|r| labels.get(&r.meme).map(|&l| (r.vector, l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meme::build_index;
    use crate::TweetRecord;
    use proptest::prelude::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 9), "0");
        assert_eq!(fmt_sig(1.0, 9), "1");
        assert_eq!(fmt_sig(2.0 / 3.0, 9), "0.666666667");
        assert_eq!(fmt_sig(-0.25, 9), "-0.25");
        assert_eq!(fmt_sig(123456.789, 9), "123456.789");
        assert_eq!(fmt_sig(1234567891.0, 9), "1.23456789e9");
        assert_eq!(fmt_sig(0.00001234, 9), "1.234e-5");
        assert_eq!(fmt_sig(0.0001234, 9), "0.0001234");
    }

    proptest! {
        #[test]
        fn formatted_values_keep_nine_digits(v in -1e6f64..1e6) {
            let back: f64 = fmt_sig(v, 9).parse().unwrap();
            prop_assert!((back - v).abs() <= v.abs() * 1e-8 + 1e-300);
        }
    }

    fn rec(id: u64, ts: i64, tags: &[&str]) -> TweetRecord {
        TweetRecord {
            author_created_at: 0,
            author_id: id,
            created_at: ts,
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
            mentions: vec![],
            retweet_of_tweet_id: None,
            retweet_of_user_id: None,
            text: String::new(),
            tweet_id: id,
            urls: vec!["http://a.com/x?p=1,2".into()],
        }
    }

    #[test]
    fn extract_csv_ordering_and_quoting() {
        let stream = vec![rec(1, 5, &["b", "a"]), rec(2, 9, &["b"])];
        let mut buf = Vec::new();
        write_extract_csv(&mut buf, &build_index(&stream)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "meme_kind,meme_key,n_tweets,first_ts,last_ts\nhashtag,b,2,5,9\nurl,\"http://a.com/x?p=1,2\",2,5,9\nhashtag,a,1,5,5\n"
        );
    }

    #[test]
    fn feature_csv_round_trip() {
        let rows = vec![
            FeatureRow { meme: MemeId::hashtag("x"), vector: MemeFeatureVector([0.5; N_FEATURES]) },
            FeatureRow { meme: MemeId::url("http://a.b/c,d").unwrap(), vector: MemeFeatureVector([1.0 / 3.0; N_FEATURES]) },
        ];
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &rows).unwrap();
        let back = read_features_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].meme, rows[1].meme);
        assert!((back[1].vector.0[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!(read_features_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn labels_round_trip_and_reject_duplicates() {
        let labels = BTreeMap::from([(MemeId::hashtag("a"), Label::Organic), (MemeId::mention(5), Label::Truthy)]);
        let mut buf = Vec::new();
        write_labels_csv(&mut buf, &labels).unwrap();
        assert_eq!(read_labels_csv(buf.as_slice()).unwrap(), labels);
        let dup = "meme_kind,meme_key,label\nhashtag,a,truthy\nhashtag,a,organic\n";
        assert!(read_labels_csv(dup.as_bytes()).is_err());
        let numeric = "meme_kind,meme_key,label\nhashtag,a,1\n";
        assert_eq!(read_labels_csv(numeric.as_bytes()).unwrap()[&MemeId::hashtag("a")], Label::Truthy);
    }

    #[test]
    fn model_file_round_trip_and_validation() {
        let mut m = Model::rule_based(FeatureStats { mean: [0.1; N_FEATURES], std: [2.0; N_FEATURES] });
        m.threshold = 0.4;
        let json = model_to_json(&m);
        assert_eq!(model_from_json(&json).unwrap(), m);

        let mut f = ModelFile::from(&m);
        f.feature_names.swap(0, 1);
        assert!(matches!(Model::try_from(f), Err(FormatError::Invalid(_))));
        let mut f = ModelFile::from(&m);
        f.weights.pop();
        assert!(Model::try_from(f).is_err());
        let mut f = ModelFile::from(&m);
        f.threshold = 1.5;
        assert!(Model::try_from(f).is_err());
    }

    #[test]
    fn campaign_file_defaults() {
        let specs = campaigns_from_json(r#"[{}, {"n_injectors": 3, "total_tweets": 30}]"#).unwrap();
        assert_eq!(specs[0], CampaignSpec::default());
        assert_eq!((specs[1].n_injectors, specs[1].total_tweets, specs[1].duration_s), (3, 30, 8280));
    }
}
