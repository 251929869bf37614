use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::contagion::{run_ic, run_threshold_rounds};
use super::graph::gen_graph_ba;
use super::rng::{mix, rng_from, SimRng};
use super::{attach_meme, meme_marker, random_sentence, SimError};
use crate::features::SECONDS_PER_DAY;
use crate::ingest::TweetRecord;
use crate::meme::MemeId;
use crate::{Timestamp, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeModel {
    Threshold,
    Cascade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrganicSpec {
    pub graph_n: usize,
    pub ba_m: usize,
    pub model: CascadeModel,
    /// Independent-cascade activation probability.
    pub p: f64,
    /// Thresholds are drawn uniformly from `(0, theta_max]`.
    pub theta_max: f64,
    pub n_seeds: usize,
    pub mean_delay_s: f64,
    /// Probability that a non-seed adopter posts an original instead of a retweet.
    pub originality_q: f64,
    pub seed: u64,
}

impl Default for OrganicSpec {
    fn default() -> Self {
        OrganicSpec {
            graph_n: 1000,
            ba_m: 3,
            model: CascadeModel::Cascade,
            p: 0.05,
            theta_max: 1.0,
            n_seeds: 3,
            mean_delay_s: 600.0,
            originality_q: 0.15,
            seed: 0,
        }
    }
}

impl OrganicSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidParams(msg));
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.originality_q) {
            return bad(format!("p = {} and originality_q = {} must lie in [0, 1]", self.p, self.originality_q));
        }
        if !(self.theta_max > 0.0 && self.theta_max <= 1.0) {
            return bad(format!("theta_max = {} must lie in (0, 1]", self.theta_max));
        }
        if self.n_seeds < 1 || self.n_seeds > self.graph_n {
            return bad(format!("n_seeds = {} must lie in [1, graph_n]", self.n_seeds));
        }
        if self.ba_m < 1 || self.graph_n <= self.ba_m {
            return bad(format!("need graph_n > ba_m >= 1, got {} and {}", self.graph_n, self.ba_m));
        }
        if !(self.mean_delay_s > 0.0 && self.mean_delay_s.is_finite()) {
            return bad(format!("mean_delay_s = {} must be positive", self.mean_delay_s));
        }
        Ok(())
    }
}

const THREE_YEARS_S: i64 = 3 * 365 * SECONDS_PER_DAY;
const SIXTY_DAYS_S: i64 = 60 * SECONDS_PER_DAY;

/// Account creation time of an established user, uniform in
/// `[t0 − 3 years, t0 − 60 days]`.
pub fn established_account_created(rng: &mut SimRng, t0: Timestamp) -> Timestamp {
    rng.random_range(t0 - THREE_YEARS_S..=t0 - SIXTY_DAYS_S)
}

/// Delay drawn from an exponential with the given mean, rounded to whole
/// seconds and at least one second.
pub(crate) fn exp_delay(rng: &mut SimRng, mean_s: f64) -> i64 {
    let d: f64 = Exp::new(1.0 / mean_s).expect("positive rate").sample(rng);
    (d.round() as i64).max(1)
}

/// One organic meme: a cascade on a fresh preferential-attachment graph,
/// one post per adopter. Graph node `v` posts as user `v`. Tweet ids are
/// local (0-based, in adoption order); output is sorted by time.
pub fn gen_organic(spec: &OrganicSpec, meme: &MemeId, t0: Timestamp) -> Result<Vec<TweetRecord>, SimError> {
    spec.validate()?;
    let graph = gen_graph_ba(spec.graph_n, spec.ba_m, mix(spec.seed, 1))?;
    let mut rng = rng_from(mix(spec.seed, 2));
    let seeds: BTreeSet<usize> = sample(&mut rng, spec.graph_n, spec.n_seeds).into_iter().collect();
    let rounds = match spec.model {
        CascadeModel::Cascade => run_ic(&graph, &seeds, spec.p, mix(spec.seed, 3))?,
        CascadeModel::Threshold => {
            let thresholds: Vec<f64> = (0..spec.graph_n)
                .map(|_| spec.theta_max * (1.0 - rng.random::<f64>()))
                .collect();
            run_threshold_rounds(&graph, &seeds, &thresholds)?
        }
    };

    let mut order: Vec<(u32, usize)> = rounds.iter().map(|(&v, &r)| (r, v)).collect();
    order.sort_unstable();

    let mut post_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut posts: Vec<TweetRecord> = Vec::with_capacity(order.len());
    for (round, v) in order {
        let tweet_id = posts.len() as u64;
        let author_created_at = established_account_created(&mut rng, t0);
        let mut rec = TweetRecord {
            author_created_at,
            author_id: v as UserId,
            created_at: t0,
            hashtags: vec![],
            mentions: vec![],
            retweet_of_tweet_id: None,
            retweet_of_user_id: None,
            text: String::new(),
            tweet_id,
            urls: vec![],
        };
        if round == 0 {
            rec.text = format!("{} {}", random_sentence(&mut rng), meme_marker(meme));
        } else {
            let parents: Vec<usize> = graph
                .followees(v)
                .iter()
                .copied()
                .filter(|u| rounds.get(u).is_some_and(|&r| r < round))
                .collect();
            let parent = &posts[post_of[&parents[rng.random_range(0..parents.len())]]];
            let created_at = parent.created_at + exp_delay(&mut rng, spec.mean_delay_s);
            if rng.random_bool(spec.originality_q) {
                rec.text = format!("{} {}", random_sentence(&mut rng), meme_marker(meme));
            } else {
                // retweets repeat the original text, marker included
                rec.text = parent.text.clone();
                rec.retweet_of_tweet_id = Some(parent.tweet_id);
                rec.retweet_of_user_id = Some(parent.author_id);
            }
            rec.created_at = created_at;
        }
        attach_meme(&mut rec, meme);
        post_of.insert(v, posts.len());
        posts.push(rec);
    }
    posts.sort_by_key(TweetRecord::order_key);
    Ok(posts)
}
