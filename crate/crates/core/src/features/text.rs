//! Near-duplicate detection over post texts: word 3-shingles, Jaccard
//! similarity, single-link clustering.

use std::collections::BTreeMap;

use super::FeatureError;
use crate::Scalar;

/// Lowercases, drops URL and `@` tokens, removes `#` characters and splits
/// on whitespace.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .filter(|t| !t.starts_with('@') && !t.contains("://") && !t.starts_with("www."))
        .map(|t| t.replace('#', ""))
        .filter(|t| !t.is_empty())
        .collect()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sorted, deduplicated shingle hashes. Texts shorter than three words use
/// their token set.
pub fn shingles(text: &str) -> Vec<u64> {
    let tokens = normalize_tokens(text);
    let mut out: Vec<u64> = if tokens.len() < 3 {
        tokens.iter().map(|t| fnv1a(t.as_bytes())).collect()
    } else {
        tokens
            .windows(3)
            .map(|w| fnv1a(w.join(" ").as_bytes()))
            .collect()
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Jaccard index of two sorted sets; two empty sets count as identical.
pub fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuplicateConfig {
    pub jaccard_threshold: f64,
    /// Only this many leading texts are compared pairwise; the rest are
    /// singleton clusters.
    pub max_compared: usize,
}

impl Default for DuplicateConfig {
    fn default() -> Self {
        DuplicateConfig { jaccard_threshold: 0.5, max_compared: 2000 }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Number of near-duplicate clusters among `texts` under `cfg`.
pub fn cluster_count<S: AsRef<str>>(texts: &[S], cfg: &DuplicateConfig) -> usize {
    let compared = texts.len().min(cfg.max_compared);
    // identical shingle sets are trivially linked; compare one representative each
    let mut groups: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for t in &texts[..compared] {
        *groups.entry(shingles(t.as_ref())).or_default() += 1;
    }
    let reps: Vec<&Vec<u64>> = groups.keys().collect();
    let mut parent: Vec<usize> = (0..reps.len()).collect();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (a, b) = (reps[i], reps[j]);
            let (lo, hi) = (a.len().min(b.len()), a.len().max(b.len()));
            if hi > 0 && (lo as f64) < cfg.jaccard_threshold * hi as f64 {
                continue;
            }
            if jaccard(a, b) >= cfg.jaccard_threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let clusters = (0..reps.len()).filter(|&i| find(&mut parent, i) == i).count();
    clusters + (texts.len() - compared)
}

/// `1 − clusters / texts`: zero when every text is distinct, approaching one
/// when all texts are copies of each other.
pub fn near_duplicate_fraction<T: Scalar, S: AsRef<str>>(
    texts: &[S],
    cfg: &DuplicateConfig,
) -> Result<T, FeatureError> {
    if texts.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let clusters = cluster_count(texts, cfg);
    Ok(T::one() - T::from_count(clusters) / T::from_count(texts.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac(texts: &[&str]) -> f64 {
        near_duplicate_fraction(texts, &DuplicateConfig::default()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(frac(&["a b c d", "a b c d"]), 0.5);
        assert_eq!(frac(&["a b c", "x y z"]), 0.0);
        assert_eq!(frac(&["same"]), 0.0);
        assert_eq!(
            near_duplicate_fraction::<f64, &str>(&[], &DuplicateConfig::default()),
            Err(FeatureError::EmptyInput)
        );
    }

    #[test]
    fn normalization_ignores_markers_and_case() {
        assert_eq!(normalize_tokens("RT @bob: Vote #NO  http://x.co/a now"), vec!["rt", "vote", "no", "now"]);
        assert_eq!(frac(&["Vote #NO today please", "vote no TODAY please @x http://y.z"]), 0.5);
    }

    #[test]
    fn near_duplicates_link_transitively() {
        // {abc,bcd,cde} ~ {abc,bcd,cdx} ~ {ybc,bcd,cdx} at J = 2/4; the ends share 1/5
        let texts = ["a b c d e", "a b c d x", "y b c d x"];
        assert_eq!(frac(&texts), 1.0 - 1.0 / 3.0);
        let sets: Vec<_> = texts.iter().map(|t| shingles(t)).collect();
        assert!(jaccard(&sets[0], &sets[1]) >= 0.5);
        assert!(jaccard(&sets[0], &sets[2]) < 0.5);
    }

    #[test]
    fn cap_leaves_tail_as_singletons() {
        let cfg = DuplicateConfig { max_compared: 2, ..Default::default() };
        let texts = ["x y z", "x y z", "x y z", "x y z"];
        assert_eq!(cluster_count(&texts, &cfg), 3);
    }

    #[test]
    fn empty_texts_are_identical() {
        assert_eq!(frac(&["http://a.b", "@x"]), 0.5);
    }

    /// Direct O(n²) clustering without representative grouping.
    fn brute_clusters(texts: &[String]) -> usize {
        let sets: Vec<_> = texts.iter().map(|t| shingles(t)).collect();
        let n = sets.len();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if jaccard(&sets[i], &sets[j]) >= 0.5 && label[j] < label[i] {
                        label[i] = label[j];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut l = label.clone();
        l.sort();
        l.dedup();
        l.len()
    }

    proptest! {
        #[test]
        fn grouping_matches_brute_force(texts in prop::collection::vec("(a|b|c|d) (a|b|c)( (a|b|c|d)){0,3}", 1..12)) {
            prop_assert_eq!(cluster_count(&texts, &DuplicateConfig::default()), brute_clusters(&texts));
        }

        #[test]
        fn renaming_words_keeps_fraction(
            texts in prop::collection::vec("(a|b|c|d|e)( (a|b|c|d|e|#e|@u)){0,5}", 1..10),
            perm in Just(()).prop_perturb(|_, mut rng| {
                let mut p: Vec<usize> = (0..5).collect();
                for i in (1..p.len()).rev() {
                    let j = (rng.next_u32() as usize) % (i + 1);
                    p.swap(i, j);
                }
                p
            })
        ) {
            let words = ["a", "b", "c", "d", "e"];
            let renamed: Vec<String> = texts.iter().map(|t| {
                t.split(' ').map(|tok| match words.iter().position(|w| *w == tok) {
                    Some(i) => format!("w{}", perm[i]),
                    None if tok == "#e" => format!("#w{}", perm[4]),
                    None => tok.to_string(),
                }).collect::<Vec<_>>().join(" ")
            }).collect();
            let before: f64 = near_duplicate_fraction(&texts, &DuplicateConfig::default()).unwrap();
            let after: f64 = near_duplicate_fraction(&renamed, &DuplicateConfig::default()).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
