use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;

use super::campaign::{gen_campaign, CampaignSpec};
use super::organic::{gen_organic, CascadeModel, OrganicSpec};
use super::rng::{derive_seed, mix, rng_from, SimRng};
use super::SimError;
use crate::classify::Label;
use crate::features::SECONDS_PER_DAY;
use crate::ingest::TweetRecord;
use crate::meme::MemeId;
use crate::{Timestamp, TweetId, UserId};

/// Start of the simulated period (2010-01-11 00:00 UTC).
pub const BASE_T0: Timestamp = 1_263_168_000;

/// Targets sampled per campaign when its spec gives no pool.
const TARGET_POOL_SIZE: usize = 200;
/// Injector ids of the j-th campaign in a dataset are shifted by j times this.
const INJECTOR_ID_STRIDE: UserId = 100_000;
const FALLBACK_POOL_BASE: UserId = 900_000_000;

/// Label of every generated meme.
pub type GroundTruth = BTreeMap<MemeId, Label>;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Sorted by `(created_at, tweet_id)`; ids are sequential in that order.
    pub records: Vec<TweetRecord>,
    pub truth: GroundTruth,
}

/// Key of the i-th organic meme; even indices are hashtags, odd ones URLs.
pub fn organic_meme(i: usize) -> MemeId {
    if i.is_multiple_of(2) {
        MemeId::hashtag(&format!("topic{i}"))
    } else {
        MemeId::url(&format!("http://news{i}.example.com/story")).expect("well-formed url")
    }
}

pub fn campaign_meme(j: usize) -> MemeId {
    MemeId::url(&format!("http://campaign{j}.example.org/exposed")).expect("well-formed url")
}

/// A campaign with randomized size, pace, account age and response rate.
pub fn random_campaign_spec(rng: &mut SimRng) -> CampaignSpec {
    let n_injectors = rng.random_range(3..=25);
    CampaignSpec {
        n_injectors,
        total_tweets: rng.random_range(100.max(n_injectors)..=1200),
        duration_s: rng.random_range(1800..=6 * 3600),
        injector_age_s: rng.random_range(SECONDS_PER_DAY..=28 * SECONDS_PER_DAY),
        retweet_prob: rng.random_range(0.02..=0.3),
        retweet_delay_mean_s: rng.random_range(120.0..=900.0),
        mentions_per_tweet: rng.random_range(1..=2),
        seed: rng.random(),
        ..Default::default()
    }
}

/// Organic memes start within the first day; campaigns within the third,
/// after their targets have shown interest.
fn start_time(seed: u64, day: i64) -> Timestamp {
    BASE_T0 + day * SECONDS_PER_DAY + rng_from(mix(seed, 99)).random_range(0..SECONDS_PER_DAY)
}

pub fn gen_dataset(n_organic: usize, campaigns: &[CampaignSpec], global_seed: u64) -> Result<Dataset, SimError> {
    let mut truth = GroundTruth::new();
    let mut batches: Vec<Vec<TweetRecord>> = Vec::with_capacity(n_organic + campaigns.len());

    for i in 0..n_organic {
        let meme = organic_meme(i);
        let seed = derive_seed(global_seed, &meme.key);
        let model = if i.is_multiple_of(2) { CascadeModel::Cascade } else { CascadeModel::Threshold };
        let spec = OrganicSpec { model, seed, ..Default::default() };
        batches.push(gen_organic(&spec, &meme, start_time(seed, 0))?);
        truth.insert(meme, Label::Organic);
    }

    let participants: Vec<UserId> = batches
        .iter()
        .flatten()
        .map(|r| r.author_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    for (j, base) in campaigns.iter().enumerate() {
        let meme = campaign_meme(j);
        let seed = mix(derive_seed(global_seed, &meme.key), base.seed);
        let mut spec = base.clone();
        spec.seed = seed;
        spec.injector_id_base = base.injector_id_base + j as UserId * INJECTOR_ID_STRIDE;
        if spec.target_pool.is_empty() {
            spec.target_pool = if participants.is_empty() {
                (0..TARGET_POOL_SIZE as UserId).map(|k| FALLBACK_POOL_BASE + k).collect()
            } else {
                let mut rng = rng_from(mix(seed, 7));
                let k = TARGET_POOL_SIZE.min(participants.len());
                let mut pool: Vec<UserId> =
                    sample(&mut rng, participants.len(), k).into_iter().map(|i| participants[i]).collect();
                pool.sort_unstable();
                pool
            };
        }
        batches.push(gen_campaign(&spec, &meme, start_time(seed, 2))?);
        truth.insert(meme, Label::Truthy);
    }

    Ok(Dataset { records: merge(batches), truth })
}

/// Merges per-meme batches, orders by time and reassigns sequential ids,
/// rewriting retweet provenance to match.
fn merge(batches: Vec<Vec<TweetRecord>>) -> Vec<TweetRecord> {
    let mut tagged: Vec<(usize, TweetRecord)> = batches
        .into_iter()
        .enumerate()
        .flat_map(|(b, recs)| recs.into_iter().map(move |r| (b, r)))
        .collect();
    tagged.sort_by_key(|(b, r)| (r.created_at, *b, r.tweet_id));
    let new_id: BTreeMap<(usize, TweetId), TweetId> = tagged
        .iter()
        .enumerate()
        .map(|(i, (b, r))| ((*b, r.tweet_id), i as TweetId))
        .collect();
    tagged
        .into_iter()
        .map(|(b, mut r)| {
            r.tweet_id = new_id[&(b, r.tweet_id)];
            r.retweet_of_tweet_id = r.retweet_of_tweet_id.map(|t| new_id[&(b, t)]);
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meme::build_index;

    #[test]
    fn campaign_only_dataset() {
        let d = gen_dataset(0, &[CampaignSpec::default()], 4).unwrap();
        assert_eq!(d.truth.len(), 1);
        assert!(d.truth.values().all(|l| *l == Label::Truthy));
        assert!(d.records.iter().filter(|r| !r.is_retweet()).count() == 929);
    }

    #[test]
    fn accounting_and_labels() {
        let d = gen_dataset(50, &[CampaignSpec::default()], 21).unwrap();
        assert_eq!(d.truth.len(), 51);
        assert_eq!(d.truth.values().filter(|l| **l == Label::Truthy).count(), 1);

        let idx = build_index(&d.records);
        let mut total = 0;
        for meme in d.truth.keys() {
            let n = idx.get(meme).map_or(0, |r| r.len());
            assert!(n >= 1, "{meme} missing from stream");
            total += n;
        }
        assert_eq!(total, d.records.len());

        let ids: Vec<u64> = d.records.iter().map(|r| r.tweet_id).collect();
        assert_eq!(ids, (0..d.records.len() as u64).collect::<Vec<_>>());
        for w in d.records.windows(2) {
            assert!(w[0].order_key() <= w[1].order_key());
        }
        let by_id: BTreeMap<u64, &TweetRecord> = d.records.iter().map(|r| (r.tweet_id, r)).collect();
        for r in &d.records {
            r.validate().unwrap();
            if let Some(p) = r.retweet_of_tweet_id {
                assert_eq!(Some(by_id[&p].author_id), r.retweet_of_user_id);
                assert!(by_id[&p].created_at < r.created_at);
            }
        }
    }

    #[test]
    fn campaign_targets_are_organic_participants() {
        let d = gen_dataset(10, &[CampaignSpec::default()], 2).unwrap();
        let organic_authors: BTreeSet<u64> = d
            .records
            .iter()
            .filter(|r| !campaign_meme(0).occurs_in(r))
            .map(|r| r.author_id)
            .collect();
        for r in d.records.iter().filter(|r| campaign_meme(0).occurs_in(r)) {
            for m in &r.mentions {
                assert!(organic_authors.contains(m));
            }
        }
    }

    #[test]
    fn deterministic() {
        let specs = [CampaignSpec::default()];
        assert_eq!(gen_dataset(5, &specs, 8).unwrap(), gen_dataset(5, &specs, 8).unwrap());
        assert_ne!(gen_dataset(5, &specs, 8).unwrap(), gen_dataset(5, &specs, 9).unwrap());
    }

    #[test]
    fn random_specs_are_valid() {
        let mut rng = rng_from(1);
        for _ in 0..50 {
            let mut s = random_campaign_spec(&mut rng);
            s.target_pool = (0..10).collect();
            s.validate().unwrap();
        }
    }
}
