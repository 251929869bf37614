//! Ground-truth generators: preferential-attachment follower graphs,
//! threshold and independent-cascade adoption, organic memes, injection
//! campaigns and labeled mixed streams.

mod campaign;
mod contagion;
mod dataset;
mod graph;
mod organic;
pub mod rng;

use rand::Rng;
use thiserror::Error;

pub use campaign::{gen_campaign, CampaignSpec};
pub use contagion::{run_ic, run_threshold, run_threshold_rounds};
pub use dataset::{campaign_meme, gen_dataset, organic_meme, random_campaign_spec, Dataset, GroundTruth, BASE_T0};
pub use graph::{gen_graph_ba, SocialGraph};
pub use organic::{established_account_created, gen_organic, CascadeModel, OrganicSpec};

use crate::ingest::TweetRecord;
use crate::meme::{MemeId, MemeKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
    #[error("thresholds cover {got} of {expected} nodes")]
    MissingThreshold { expected: usize, got: usize },
}

/// How the meme appears in post text.
pub(crate) fn meme_marker(meme: &MemeId) -> String {
    match meme.kind {
        MemeKind::Hashtag => format!("#{}", meme.key),
        MemeKind::Url => meme.key.clone(),
        MemeKind::Mention => format!("@{}", meme.key),
    }
}

/// Adds the meme to the record's metadata fields.
pub(crate) fn attach_meme(rec: &mut TweetRecord, meme: &MemeId) {
    match meme.kind {
        MemeKind::Hashtag => rec.hashtags.push(meme.key.clone()),
        MemeKind::Url => rec.urls.push(meme.key.clone()),
        MemeKind::Mention => rec.mentions.push(meme.key.parse().expect("mention keys are user ids")),
    }
}

const VOCAB: [&str; 64] = [
    "the", "vote", "senate", "race", "debate", "poll", "tonight", "watch", "speech", "rally", "news", "report",
    "health", "care", "bill", "jobs", "economy", "tax", "plan", "budget", "local", "state", "city", "voters",
    "turnout", "early", "results", "count", "campaign", "office", "candidate", "interview", "radio", "tv", "live",
    "update", "story", "article", "opinion", "editorial", "support", "oppose", "policy", "reform", "hearing",
    "committee", "weekend", "morning", "event", "crowd", "volunteers", "doors", "calls", "donate", "march",
    "school", "energy", "climate", "security", "workers", "families", "small", "business", "veterans",
];

pub(crate) fn random_sentence<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(6..=12);
    (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}
