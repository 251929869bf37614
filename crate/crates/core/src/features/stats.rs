//! Scalar summary statistics over degree lists and post timestamps.

use super::FeatureError;
use crate::{Scalar, Timestamp};

/// Gini coefficient, computed from the sorted values:
/// `G = Σ (2i − n − 1)·x₍ᵢ₎ / (n·Σx)` with 1-based rank `i`, which equals the
/// mean absolute pairwise difference over twice the mean. Zero when all
/// values are zero.
pub fn gini<T: Scalar>(values: &[T]) -> Result<T, FeatureError> {
    if values.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    if values.iter().any(|v| *v < T::zero() || v.is_nan()) {
        return Err(FeatureError::NegativeValue);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN rejected above"));
    let n = sorted.len();
    let total: T = sorted.iter().copied().sum();
    if total == T::zero() {
        return Ok(T::zero());
    }
    let weighted: T = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| T::c((2 * (i + 1)) as f64 - n as f64 - 1.0) * x)
        .sum();
    Ok(weighted / (T::from_count(n) * total))
}

/// `(σ − μ)/(σ + μ)` of the gaps between consecutive timestamps, with the
/// population standard deviation. Zero for fewer than three timestamps; one
/// when every gap is zero.
pub fn burstiness<T: Scalar>(timestamps: &[Timestamp]) -> T {
    if timestamps.len() < 3 {
        return T::zero();
    }
    let gaps: Vec<T> = timestamps
        .windows(2)
        .map(|w| T::c((w[1] - w[0]) as f64))
        .collect();
    let n = T::from_count(gaps.len());
    let mean = gaps.iter().copied().sum::<T>() / n;
    let var = gaps.iter().map(|&g| (g - mean) * (g - mean)).sum::<T>() / n;
    let sd = var.sqrt();
    if sd + mean == T::zero() {
        return T::one();
    }
    (sd - mean) / (sd + mean)
}

/// Largest number of timestamps in any bin `[first + k·bin_s, first + (k+1)·bin_s)`.
pub fn peak_rate(timestamps: &[Timestamp], bin_s: i64) -> usize {
    assert!(bin_s > 0, "bin width must be positive");
    let Some(&first) = timestamps.first() else {
        return 0;
    };
    let mut best = 0;
    let mut current_bin = None;
    let mut count = 0;
    for &t in timestamps {
        let bin = (t - first).div_euclid(bin_s);
        if Some(bin) == current_bin {
            count += 1;
        } else {
            current_bin = Some(bin);
            count = 1;
        }
        best = best.max(count);
    }
    best
}
