//! Meme scoring: a fixed-weight rule scorer and a trainable L2-regularized
//! logistic regression over z-scored feature vectors.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{zscore_apply, zscore_fit, Feature, FeatureError, FeatureStats, MemeFeatureVector, N_FEATURES};
use crate::meme::MemeId;
use crate::Scalar;

/// Probabilities are clamped to `[P_CLAMP, 1 − P_CLAMP]` inside the log-loss.
pub const P_CLAMP: f64 = 1e-12;

/// Hand-set rule weights, bias −1.
pub const RULE_WEIGHTS: [(Feature, f64); 8] = [
    (Feature::DupTextFrac, 2.0),
    (Feature::NewAccountFrac, 2.0),
    (Feature::MentionTargetFrac, 1.5),
    (Feature::Burstiness, 1.0),
    (Feature::MaxOutdegFrac, 1.0),
    (Feature::LogPeakRate, 1.0),
    (Feature::GiniOutdeg, 0.5),
    (Feature::RootsFrac, -0.5),
];
pub const RULE_BIAS: f64 = -1.0;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("training data contains a single class")]
    DegenerateLabels,
    #[error("insufficient data: need at least {needed} examples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

impl From<FeatureError> for ClassifyError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InsufficientData { needed, got } => ClassifyError::InsufficientData { needed, got },
            other => ClassifyError::InvalidModel(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Truthy,
    Organic,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Truthy => "truthy",
            Label::Organic => "organic",
        }
    }

    pub fn is_truthy(self) -> bool {
        self == Label::Truthy
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "truthy" | "1" => Ok(Label::Truthy),
            "organic" | "0" => Ok(Label::Organic),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel<T> {
    pub weights: [T; N_FEATURES],
    pub bias: T,
    pub stats: FeatureStats<T>,
    pub threshold: T,
}

impl<T: Scalar> ClassifierModel<T> {
    pub fn zero(stats: FeatureStats<T>) -> Self {
        ClassifierModel { weights: [T::zero(); N_FEATURES], bias: T::zero(), stats, threshold: T::c(0.5) }
    }

    /// The fixed rule scorer as a model, scaled by `stats`.
    pub fn rule_based(stats: FeatureStats<T>) -> Self {
        let mut weights = [T::zero(); N_FEATURES];
        for (f, w) in RULE_WEIGHTS {
            weights[f.index()] = T::c(w);
        }
        ClassifierModel { weights, bias: T::c(RULE_BIAS), stats, threshold: T::c(0.5) }
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.threshold > T::zero() && self.threshold < T::one()) {
            return Err(ClassifyError::InvalidModel(format!("threshold {} not in (0,1)", self.threshold)));
        }
        let finite = self.weights.iter().chain(&self.stats.mean).chain(&self.stats.std).all(|x| x.is_finite());
        if !finite || !self.bias.is_finite() {
            return Err(ClassifyError::InvalidModel("non-finite parameter".into()));
        }
        if self.stats.std.iter().any(|&s| s <= T::zero()) {
            return Err(ClassifyError::InvalidModel("non-positive scaling deviation".into()));
        }
        Ok(())
    }

    pub fn logit_scaled(&self, scaled: &[T; N_FEATURES]) -> T {
        self.bias + self.weights.iter().zip(scaled).map(|(&w, &x)| w * x).sum::<T>()
    }

    pub fn scale(&self, v: &MemeFeatureVector<T>) -> [T; N_FEATURES] {
        zscore_apply(v, &self.stats)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict<T> {
    pub meme: MemeId,
    pub score: T,
    pub label: Label,
    pub contributions: [T; N_FEATURES],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.1, epochs: 500, l2_lambda: 1e-3, seed: 0 }
    }
}

/// Numerically stable logistic function.
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln σ(z)` without forming `σ(z)`, so it stays accurate when `σ(z)` is
/// close to one.
fn ln_sigmoid<T: Scalar>(z: T) -> T {
    z.min(T::zero()) - (-z.abs()).exp().ln_1p()
}

pub fn logit<T: Scalar>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

pub fn predict<T: Scalar>(m: &ClassifierModel<T>, v: &MemeFeatureVector<T>) -> T {
    sigmoid(m.logit_scaled(&m.scale(v)))
}

/// Rule score of `v` against the population `stats`.
pub fn rule_score<T: Scalar>(v: &MemeFeatureVector<T>, population_stats: &FeatureStats<T>) -> T {
    predict(&ClassifierModel::rule_based(*population_stats), v)
}

/// Labels a score (ties go to truthy) and records per-feature contributions.
pub fn make_verdict<T: Scalar>(meme: MemeId, score: T, m: &ClassifierModel<T>, scaled: &[T; N_FEATURES]) -> Verdict<T> {
    let label = if score >= m.threshold { Label::Truthy } else { Label::Organic };
    Verdict { meme, score, label, contributions: std::array::from_fn(|i| m.weights[i] * scaled[i]) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossGrad<T> {
    pub loss: T,
    pub grad_w: [T; N_FEATURES],
    pub grad_b: T,
}

/// Mean log-loss plus `(λ/2)‖w‖²` and its exact gradient. The bias is not
/// regularized.
pub fn loss_and_grad<T: Scalar>(
    m: &ClassifierModel<T>,
    data: &[(MemeFeatureVector<T>, Label)],
    l2_lambda: T,
) -> Result<LossGrad<T>, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    let n = T::from_count(data.len());
    // ln of the clamped probability, i.e. ln p clamped to [ln ε, ln(1 − ε)]
    let (lo, hi) = (T::c(P_CLAMP.ln()), T::c((-P_CLAMP).ln_1p()));
    let mut loss = T::zero();
    let mut grad_w = [T::zero(); N_FEATURES];
    let mut grad_b = T::zero();
    for (v, label) in data {
        let x = m.scale(v);
        let z = m.logit_scaled(&x);
        let p = sigmoid(z);
        let y = if label.is_truthy() { T::one() } else { T::zero() };
        let ln_p = ln_sigmoid(z).max(lo).min(hi);
        let ln_q = ln_sigmoid(-z).max(lo).min(hi);
        loss = loss - (y * ln_p + (T::one() - y) * ln_q);
        let err = p - y;
        for (g, &xi) in grad_w.iter_mut().zip(&x) {
            *g = *g + err * xi;
        }
        grad_b = grad_b + err;
    }
    let half = T::c(0.5);
    let norm2 = m.weights.iter().map(|&w| w * w).sum::<T>();
    loss = loss / n + half * l2_lambda * norm2;
    for (g, &w) in grad_w.iter_mut().zip(&m.weights) {
        *g = *g / n + l2_lambda * w;
    }
    Ok(LossGrad { loss, grad_w, grad_b: grad_b / n })
}

pub fn train<T: Scalar>(data: &[(MemeFeatureVector<T>, Label)], cfg: &TrainConfig) -> Result<ClassifierModel<T>, ClassifyError> {
    train_with_history(data, cfg).map(|(m, _)| m)
}

/// Trains and returns the loss before the first update followed by the loss
/// after each epoch.
pub fn train_with_history<T: Scalar>(
    data: &[(MemeFeatureVector<T>, Label)],
    cfg: &TrainConfig,
) -> Result<(ClassifierModel<T>, Vec<T>), ClassifyError> {
    if data.len() < 2 {
        return Err(ClassifyError::InsufficientData { needed: 2, got: data.len() });
    }
    let n_truthy = data.iter().filter(|(_, l)| l.is_truthy()).count();
    if n_truthy == 0 || n_truthy == data.len() {
        return Err(ClassifyError::DegenerateLabels);
    }
    let vectors: Vec<MemeFeatureVector<T>> = data.iter().map(|(v, _)| *v).collect();
    let stats = zscore_fit(&vectors)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut model = ClassifierModel::zero(stats);
    for w in model.weights.iter_mut() {
        *w = T::c(rng.random_range(-0.01..0.01));
    }
    let lr = T::c(cfg.learning_rate);
    let lambda = T::c(cfg.l2_lambda);
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        let g = loss_and_grad(&model, data, lambda)?;
        history.push(g.loss);
        for (w, gw) in model.weights.iter_mut().zip(g.grad_w) {
            *w = *w - lr * gw;
        }
        model.bias = model.bias - lr * g.grad_b;
    }
    history.push(loss_and_grad(&model, data, lambda)?.loss);
    Ok((model, history))
}

/// Area under the ROC curve by pairwise comparison; ties count one half.
pub fn roc_auc<T: Scalar>(scored: &[(T, Label)]) -> Option<f64> {
    let pos: Vec<T> = scored.iter().filter(|(_, l)| l.is_truthy()).map(|(s, _)| *s).collect();
    let neg: Vec<T> = scored.iter().filter(|(_, l)| !l.is_truthy()).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for &p in &pos {
        for &q in &neg {
            if p > q {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}
