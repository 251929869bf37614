use serde::{Deserialize, Serialize};

use super::{FeatureError, MemeFeatureVector, N_FEATURES};
use crate::Scalar;

/// Per-feature population mean and standard deviation. A zero standard
/// deviation is stored as one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats<T> {
    pub mean: [T; N_FEATURES],
    pub std: [T; N_FEATURES],
}

impl<T: Scalar> FeatureStats<T> {
    /// Identity scaling: zero means, unit deviations.
    pub fn identity() -> Self {
        FeatureStats { mean: [T::zero(); N_FEATURES], std: [T::one(); N_FEATURES] }
    }
}

pub fn zscore_fit<T: Scalar>(vectors: &[MemeFeatureVector<T>]) -> Result<FeatureStats<T>, FeatureError> {
    if vectors.len() < 2 {
        return Err(FeatureError::InsufficientData { needed: 2, got: vectors.len() });
    }
    let n = T::from_count(vectors.len());
    let mut mean = [T::zero(); N_FEATURES];
    let mut std = [T::zero(); N_FEATURES];
    for i in 0..N_FEATURES {
        let m = vectors.iter().map(|v| v.0[i]).sum::<T>() / n;
        let var = vectors.iter().map(|v| (v.0[i] - m) * (v.0[i] - m)).sum::<T>() / n;
        mean[i] = m;
        std[i] = if var > T::zero() { var.sqrt() } else { T::one() };
    }
    Ok(FeatureStats { mean, std })
}

pub fn zscore_apply<T: Scalar>(v: &MemeFeatureVector<T>, s: &FeatureStats<T>) -> [T; N_FEATURES] {
    std::array::from_fn(|i| (v.0[i] - s.mean[i]) / s.std[i])
}
