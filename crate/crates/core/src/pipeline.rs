//! Stage glue: stream → per-meme features → verdicts.

use thiserror::Error;

use crate::classify::{make_verdict, predict, ClassifierModel, ClassifyError};
use crate::diffusion::{build_network, DiffusionError, DiffusionNetwork};
use crate::features::{compute_features_with, zscore_fit, FeatureConfig, FeatureError};
use crate::ingest::TweetRecord;
use crate::meme::{build_index, MemeId};
use crate::{FeatureVector, Model, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("meme {0} does not occur in the stream")]
    UnknownMeme(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub meme: MemeId,
    pub vector: FeatureVector,
}

/// Network of one meme over a time-ordered stream.
pub fn network_for(stream: &[TweetRecord], meme: &MemeId) -> Result<DiffusionNetwork, PipelineError> {
    let posts: Vec<&TweetRecord> = stream.iter().filter(|r| meme.occurs_in(r)).collect();
    if posts.is_empty() {
        return Err(PipelineError::UnknownMeme(meme.to_string()));
    }
    Ok(build_network(meme, &posts)?)
}

/// Feature rows for every analyzable meme, in meme order.
pub fn analyze_stream(stream: &[TweetRecord], cfg: &FeatureConfig) -> Result<Vec<FeatureRow>, PipelineError> {
    let index = build_index(stream);
    let mut rows = Vec::new();
    for (meme, _) in index.analyzable() {
        let posts = index.posts(meme, stream);
        let net = build_network(meme, &posts)?;
        let vector = compute_features_with(&net, &posts, cfg)?;
        rows.push(FeatureRow { meme: meme.clone(), vector });
    }
    Ok(rows)
}

/// Scores rows with `model`, or with the rule scorer fitted on the rows
/// themselves when no model is given. Highest score first.
pub fn detect(rows: &[FeatureRow], model: Option<&Model>) -> Result<Vec<Verdict>, PipelineError> {
    let model = match model {
        Some(m) => m.clone(),
        None => {
            let vectors: Vec<FeatureVector> = rows.iter().map(|r| r.vector).collect();
            ClassifierModel::rule_based(zscore_fit(&vectors)?)
        }
    };
    let mut verdicts: Vec<Verdict> = rows
        .iter()
        .map(|r| {
            let score = predict(&model, &r.vector);
            make_verdict(r.meme.clone(), score, &model, &model.scale(&r.vector))
        })
        .collect();
    verdicts.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.meme.cmp(&b.meme)));
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Label;
    use crate::simulate::{gen_dataset, CampaignSpec};

    #[test]
    fn campaign_tops_a_small_dataset() {
        let d = gen_dataset(10, &[CampaignSpec::default()], 3).unwrap();
        let rows = analyze_stream(&d.records, &FeatureConfig::default()).unwrap();
        let verdicts = detect(&rows, None).unwrap();
        let top = verdicts.iter().find(|v| d.truth.contains_key(&v.meme)).unwrap();
        assert_eq!(d.truth[&top.meme], Label::Truthy);
        assert!(verdicts.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn unknown_meme() {
        assert!(matches!(network_for(&[], &MemeId::hashtag("x")), Err(PipelineError::UnknownMeme(_))));
    }

    #[test]
    fn detect_needs_a_population() {
        assert!(detect(&[], None).is_err());
    }
}
