use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::organic::{established_account_created, exp_delay};
use super::rng::{mix, rng_from};
use super::{attach_meme, meme_marker, SimError};
use crate::features::SECONDS_PER_DAY;
use crate::ingest::TweetRecord;
use crate::meme::MemeId;
use crate::{Timestamp, UserId};

/// A coordinated injection campaign. The defaults replay a documented
/// Twitter bomb: nine accounts, 929 posts over 138 minutes, each post
/// mentioning a user with prior interest in the topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignSpec {
    pub n_injectors: usize,
    pub total_tweets: usize,
    pub duration_s: i64,
    /// Age of the injector accounts when the campaign starts.
    pub injector_age_s: i64,
    pub target_pool: Vec<UserId>,
    /// Probability that a mentioned target retweets the mentioning post.
    pub retweet_prob: f64,
    pub retweet_delay_mean_s: f64,
    pub mentions_per_tweet: usize,
    pub text_template: String,
    pub jitter_tokens: Vec<String>,
    /// Injector `i` posts as user `injector_id_base + i`.
    pub injector_id_base: UserId,
    pub seed: u64,
}

impl Default for CampaignSpec {
    fn default() -> Self {
        CampaignSpec {
            n_injectors: 9,
            total_tweets: 929,
            duration_s: 138 * 60,
            injector_age_s: 7 * SECONDS_PER_DAY,
            target_pool: Vec::new(),
            retweet_prob: 0.10,
            retweet_delay_mean_s: 300.0,
            mentions_per_tweet: 1,
            text_template: "must read before you vote the real record they do not want you to see".into(),
            jitter_tokens: [
                "now", "today", "pls", "rt", "wow", "share", "fyi", "asap", "alert", "breaking", "facts", "exposed",
                "spread", "truth", "read", "tuesday", "senate", "vote", "urgent", "important",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            injector_id_base: 1_000_000_000,
            seed: 0,
        }
    }
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidParams(msg));
        if self.n_injectors < 1 {
            return bad("n_injectors must be at least 1".into());
        }
        if self.total_tweets < self.n_injectors {
            return bad(format!("total_tweets {} < n_injectors {}", self.total_tweets, self.n_injectors));
        }
        if self.duration_s < 1 {
            return bad(format!("duration_s {} must be at least 1", self.duration_s));
        }
        if self.target_pool.is_empty() {
            return bad("target_pool is empty".into());
        }
        if self.mentions_per_tweet > self.target_pool.len() {
            return bad(format!(
                "mentions_per_tweet {} exceeds target pool of {}",
                self.mentions_per_tweet,
                self.target_pool.len()
            ));
        }
        if !(0.0..=1.0).contains(&self.retweet_prob) {
            return bad(format!("retweet_prob {} outside [0, 1]", self.retweet_prob));
        }
        if !(self.retweet_delay_mean_s > 0.0 && self.retweet_delay_mean_s.is_finite()) {
            return bad(format!("retweet_delay_mean_s {} must be positive", self.retweet_delay_mean_s));
        }
        if self.injector_age_s < 0 {
            return bad("injector_age_s must be non-negative".into());
        }
        if self.jitter_tokens.is_empty() {
            return bad("jitter_tokens is empty".into());
        }
        Ok(())
    }

    pub fn injector_ids(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.n_injectors as UserId).map(|i| self.injector_id_base + i)
    }
}

/// Campaign posts plus the retweets they trigger among targets. Injector
/// posts are assigned round-robin in time order; tweet ids are local.
pub fn gen_campaign(spec: &CampaignSpec, meme: &MemeId, t0: Timestamp) -> Result<Vec<TweetRecord>, SimError> {
    spec.validate()?;
    let mut rng = rng_from(mix(spec.seed, 11));
    let mut times: Vec<Timestamp> = (0..spec.total_tweets)
        .map(|_| rng.random_range(t0..t0 + spec.duration_s))
        .collect();
    times.sort_unstable();

    let marker = meme_marker(meme);
    let injector_created = t0 - spec.injector_age_s;
    let mut posts = Vec::with_capacity(spec.total_tweets * (1 + spec.mentions_per_tweet));
    for (i, &ts) in times.iter().enumerate() {
        let mentions: Vec<UserId> = sample(&mut rng, spec.target_pool.len(), spec.mentions_per_tweet)
            .into_iter()
            .map(|k| spec.target_pool[k])
            .collect();
        let jitter = &spec.jitter_tokens[rng.random_range(0..spec.jitter_tokens.len())];
        let handles: Vec<String> = mentions.iter().map(|m| format!("@{m}")).collect();
        let mut rec = TweetRecord {
            author_created_at: injector_created,
            author_id: spec.injector_id_base + (i % spec.n_injectors) as UserId,
            created_at: ts,
            hashtags: vec![],
            mentions,
            retweet_of_tweet_id: None,
            retweet_of_user_id: None,
            text: format!("{} {} {} {}", handles.join(" "), spec.text_template, jitter, marker),
            tweet_id: i as u64,
            urls: vec![],
        };
        attach_meme(&mut rec, meme);
        posts.push(rec);
    }

    let n_injected = posts.len();
    for i in 0..n_injected {
        for k in 0..posts[i].mentions.len() {
            if !rng.random_bool(spec.retweet_prob) {
                continue;
            }
            let target = posts[i].mentions[k];
            let source = &posts[i];
            let created_at = source.created_at + exp_delay(&mut rng, spec.retweet_delay_mean_s);
            let mut target_rng = rng_from(mix(spec.seed, target));
            let mut rec = TweetRecord {
                author_created_at: established_account_created(&mut target_rng, t0),
                author_id: target,
                created_at,
                hashtags: vec![],
                mentions: vec![],
                retweet_of_tweet_id: Some(source.tweet_id),
                retweet_of_user_id: Some(source.author_id),
                text: source.text.clone(),
                tweet_id: posts.len() as u64,
                urls: vec![],
            };
            attach_meme(&mut rec, meme);
            posts.push(rec);
        }
    }
    posts.sort_by_key(TweetRecord::order_key);
    Ok(posts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn pool() -> Vec<UserId> {
        (1..=200).collect()
    }

    fn meme() -> MemeId {
        MemeId::url("http://smear.example.org/x").unwrap()
    }

    #[test]
    fn default_campaign_shape() {
        let spec = CampaignSpec { target_pool: pool(), seed: 3, ..Default::default() };
        let t0 = 1_263_000_000;
        let posts = gen_campaign(&spec, &meme(), t0).unwrap();
        let injected: Vec<_> = posts.iter().filter(|p| !p.is_retweet()).collect();
        assert_eq!(injected.len(), 929);
        let authors: BTreeSet<_> = injected.iter().map(|p| p.author_id).collect();
        assert_eq!(authors.len(), 9);
        assert!(injected.iter().all(|p| (t0..t0 + 8280).contains(&p.created_at)));
        assert!(injected.iter().all(|p| p.mentions.len() == 1 && p.author_created_at == t0 - 7 * SECONDS_PER_DAY));
        let rate = injected.len() as f64 / (spec.duration_s as f64 / 60.0);
        assert!((rate - 929.0 / 138.0).abs() < 1e-12);
        assert!((rate - 6.73).abs() < 0.005);

        let retweets = posts.len() - injected.len();
        // 929 mentions at r = 0.1: binomial mean 92.9, sd ≈ 9.1
        assert!((50..=140).contains(&retweets), "{retweets}");
        for p in &posts {
            p.validate().unwrap();
            assert!(meme().occurs_in(p));
        }
    }

    #[test]
    fn retweets_come_from_mentioned_targets_after_the_post() {
        let spec = CampaignSpec { target_pool: pool(), retweet_prob: 0.5, seed: 9, ..Default::default() };
        let posts = gen_campaign(&spec, &meme(), 0).unwrap();
        let by_id: std::collections::BTreeMap<_, _> = posts.iter().map(|p| (p.tweet_id, p)).collect();
        for p in posts.iter().filter(|p| p.is_retweet()) {
            let src = by_id[&p.retweet_of_tweet_id.unwrap()];
            assert!(src.mentions.contains(&p.author_id));
            assert!(p.created_at > src.created_at);
            assert!(p.author_created_at <= -60 * SECONDS_PER_DAY);
        }
    }

    #[test]
    fn no_retweets_when_r_is_zero() {
        let spec = CampaignSpec { target_pool: pool(), retweet_prob: 0.0, ..Default::default() };
        let posts = gen_campaign(&spec, &meme(), 0).unwrap();
        assert_eq!(posts.len(), 929);
        assert!(posts.iter().all(|p| !p.is_retweet()));
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = CampaignSpec { target_pool: pool(), seed: 1, ..Default::default() };
        assert_eq!(gen_campaign(&spec, &meme(), 5).unwrap(), gen_campaign(&spec, &meme(), 5).unwrap());
        for bad in [
            CampaignSpec { target_pool: vec![], ..Default::default() },
            CampaignSpec { target_pool: pool(), n_injectors: 0, ..Default::default() },
            CampaignSpec { target_pool: pool(), total_tweets: 3, n_injectors: 4, ..Default::default() },
            CampaignSpec { target_pool: pool(), duration_s: 0, ..Default::default() },
            CampaignSpec { target_pool: vec![1], mentions_per_tweet: 2, ..Default::default() },
        ] {
            assert!(matches!(gen_campaign(&bad, &meme(), 0), Err(SimError::InvalidParams(_))));
        }
    }

    #[test]
    fn spec_defaults_fill_omitted_fields() {
        let spec: CampaignSpec = serde_json::from_str(r#"{"total_tweets": 100, "target_pool": [1, 2]}"#).unwrap();
        assert_eq!(spec.total_tweets, 100);
        assert_eq!(spec.n_injectors, 9);
        assert_eq!(spec.duration_s, 8280);
        assert_eq!(spec.retweet_prob, 0.1);
    }
}
