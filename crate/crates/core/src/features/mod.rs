//! Content-blind delivery features for one meme.
//!
//! Every feature depends on who posted, when, and through which retweet or
//! mention edge. Post text enters only through the near-duplicate fraction,
//! which looks at shingle overlap and not at the words themselves.

mod scaling;
mod stats;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scaling::{zscore_apply, zscore_fit, FeatureStats};
pub use stats::{burstiness, gini, peak_rate};
pub use text::{cluster_count, jaccard, near_duplicate_fraction, normalize_tokens, shingles, DuplicateConfig};

use crate::diffusion::{weak_components, DiffusionNetwork};
use crate::ingest::TweetRecord;
use crate::{Scalar, Timestamp, TweetId, UserId};

pub const N_FEATURES: usize = 13;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("empty input")]
    EmptyInput,
    #[error("negative value in a non-negative statistic")]
    NegativeValue,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

/// Features in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    LogNTweets,
    LogNUsers,
    RtFraction,
    RootsFrac,
    MaxOutdegFrac,
    GiniOutdeg,
    LccFrac,
    LogPeakRate,
    Burstiness,
    DupTextFrac,
    LogMeanAccountAgeDays,
    NewAccountFrac,
    MentionTargetFrac,
}

impl Feature {
    pub const ALL: [Feature; N_FEATURES] = [
        Feature::LogNTweets,
        Feature::LogNUsers,
        Feature::RtFraction,
        Feature::RootsFrac,
        Feature::MaxOutdegFrac,
        Feature::GiniOutdeg,
        Feature::LccFrac,
        Feature::LogPeakRate,
        Feature::Burstiness,
        Feature::DupTextFrac,
        Feature::LogMeanAccountAgeDays,
        Feature::NewAccountFrac,
        Feature::MentionTargetFrac,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        FEATURE_NAMES[self.index()]
    }
}

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "log_n_tweets",
    "log_n_users",
    "rt_fraction",
    "roots_frac",
    "max_outdeg_frac",
    "gini_outdeg",
    "lcc_frac",
    "log_peak_rate",
    "burstiness",
    "dup_text_frac",
    "log_mean_account_age_days",
    "new_account_frac",
    "mention_target_frac",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemeFeatureVector<T>(pub [T; N_FEATURES]);

impl<T: Scalar> MemeFeatureVector<T> {
    pub fn get(&self, f: Feature) -> T {
        self.0[f.index()]
    }

    pub fn set(&mut self, f: Feature, v: T) {
        self.0[f.index()] = v;
    }

    /// Checks the documented per-feature bounds; returns offending names.
    pub fn out_of_bounds(&self) -> Vec<&'static str> {
        let (zero, one) = (T::zero(), T::one());
        Feature::ALL
            .iter()
            .filter(|&&f| {
                let v = self.get(f);
                let ok = match f {
                    Feature::LogNTweets | Feature::LogNUsers | Feature::LogPeakRate | Feature::LogMeanAccountAgeDays => {
                        v >= zero
                    }
                    Feature::GiniOutdeg | Feature::DupTextFrac => v >= zero && v < one,
                    Feature::Burstiness => v >= -one && v <= one,
                    _ => v >= zero && v <= one,
                };
                !(ok && v.is_finite())
            })
            .map(|f| f.name())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Accounts younger than this at the meme's first post count as new.
    pub new_account_days: i64,
    pub rate_bin_s: i64,
    pub duplicates: DuplicateConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { new_account_days: 30, rate_bin_s: 60, duplicates: DuplicateConfig::default() }
    }
}

fn log1p10<T: Scalar>(x: T) -> T {
    (T::one() + x).log10()
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    T::from_count(num) / T::from_count(den.max(1))
}

pub fn compute_features<T: Scalar>(
    net: &DiffusionNetwork,
    posts: &[&TweetRecord],
) -> Result<MemeFeatureVector<T>, FeatureError> {
    compute_features_with(net, posts, &FeatureConfig::default())
}

pub fn compute_features_with<T: Scalar>(
    net: &DiffusionNetwork,
    posts: &[&TweetRecord],
    cfg: &FeatureConfig,
) -> Result<MemeFeatureVector<T>, FeatureError> {
    if posts.len() < 2 {
        return Err(FeatureError::InsufficientData { needed: 2, got: posts.len() });
    }
    let mut v = MemeFeatureVector([T::zero(); N_FEATURES]);
    let n_posts = posts.len();
    let n_users = net.n_users();

    v.set(Feature::LogNTweets, log1p10(T::from_count(n_posts)));
    v.set(Feature::LogNUsers, log1p10(T::from_count(n_users)));

    let n_retweets = posts
        .iter()
        .filter(|p| p.retweet_of_tweet_id.is_some() || p.retweet_of_user_id.is_some())
        .count();
    v.set(Feature::RtFraction, ratio(n_retweets, n_posts));
    v.set(Feature::RootsFrac, ratio(net.roots.len(), n_users));

    let outdeg = net.out_degrees();
    let max_out = outdeg.iter().copied().max().unwrap_or(0);
    v.set(Feature::MaxOutdegFrac, ratio(max_out, net.edges.len()));
    let degs: Vec<T> = outdeg.iter().map(|&d| T::from_count(d)).collect();
    v.set(Feature::GiniOutdeg, if degs.is_empty() { T::zero() } else { gini(&degs)? });

    let lcc = weak_components(net).first().map_or(0, Vec::len);
    v.set(Feature::LccFrac, ratio(lcc, net.nodes.len()));

    let times: Vec<Timestamp> = posts.iter().map(|p| p.created_at).collect();
    v.set(Feature::LogPeakRate, log1p10(T::from_count(peak_rate(&times, cfg.rate_bin_s))));
    v.set(Feature::Burstiness, burstiness(&times));

    let texts: Vec<&str> = posts.iter().map(|p| p.text.as_str()).collect();
    v.set(Feature::DupTextFrac, near_duplicate_fraction(&texts, &cfg.duplicates)?);

    let meme_start = times.iter().copied().min().expect("at least two posts");
    let mut author_created: BTreeMap<UserId, Timestamp> = BTreeMap::new();
    for p in posts {
        author_created.entry(p.author_id).or_insert(p.author_created_at);
    }
    // authors created after the meme started count as age zero
    let ages: Vec<i64> = author_created.values().map(|&c| (meme_start - c).max(0)).collect();
    let mean_age_days = T::from_count(ages.iter().map(|&a| a as usize).sum())
        / T::from_count(ages.len())
        / T::c(SECONDS_PER_DAY as f64);
    v.set(Feature::LogMeanAccountAgeDays, log1p10(mean_age_days));
    let horizon = cfg.new_account_days * SECONDS_PER_DAY;
    v.set(Feature::NewAccountFrac, ratio(ages.iter().filter(|&&a| a < horizon).count(), ages.len()));

    v.set(Feature::MentionTargetFrac, ratio(outward_mentions(posts), n_posts));

    Ok(v)
}

/// Posts that mention at least one other user who has not yet posted the
/// meme, comparing by `(created_at, tweet_id)`.
fn outward_mentions(posts: &[&TweetRecord]) -> usize {
    let mut first_post: BTreeMap<UserId, (Timestamp, TweetId)> = BTreeMap::new();
    for p in posts {
        let key = p.order_key();
        first_post
            .entry(p.author_id)
            .and_modify(|k| *k = (*k).min(key))
            .or_insert(key);
    }
    posts
        .iter()
        .filter(|p| {
            let key = p.order_key();
            let targets: BTreeSet<UserId> = p.mentions.iter().copied().filter(|&m| m != p.author_id).collect();
            targets
                .iter()
                .any(|t| first_post.get(t).is_none_or(|&first| first >= key))
        })
        .count()
}
