//! Meme diffusion analysis: ingest line-delimited post streams, rebuild
//! per-meme diffusion networks from retweet and mention markers, compute
//! content-blind delivery features and score memes as organic or astroturfed.
//!
//! The numeric modules ([`features`], [`classify`]) are generic over a
//! [`Scalar`] (f32 or f64). The aliases at the crate root fix the scalar to
//! f64, which is what the file formats and the CLI use.

pub mod classify;
pub mod diffusion;
pub mod features;
pub mod formats;
pub mod ingest;
pub mod meme;
pub mod pipeline;
mod scalar;
pub mod simulate;

pub use scalar::Scalar;

pub use classify::{Label, TrainConfig};
pub use diffusion::{DiffusionEdge, DiffusionNetwork, EdgeKind};
pub use features::{FEATURE_NAMES, N_FEATURES};
pub use ingest::{StreamReport, TweetRecord};
pub use meme::{MemeId, MemeIndex, MemeKind};

/// Feature vector in f64.
pub type FeatureVector = features::MemeFeatureVector<f64>;
/// Scaling statistics in f64.
pub type Stats = features::FeatureStats<f64>;
/// Logistic model in f64.
pub type Model = classify::ClassifierModel<f64>;
/// Per-meme verdict in f64.
pub type Verdict = classify::Verdict<f64>;

/// User identifier.
pub type UserId = u64;
/// Post identifier.
pub type TweetId = u64;
/// Epoch seconds, UTC.
pub type Timestamp = i64;
