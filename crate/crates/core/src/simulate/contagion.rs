//! Independent-cascade and linear-threshold adoption on a [`SocialGraph`].
//! Both run in synchronous rounds; seeds adopt at round 0.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::graph::SocialGraph;
use super::rng::rng_from;
use super::SimError;

fn check_seeds(g: &SocialGraph, seeds: &BTreeSet<usize>) -> Result<(), SimError> {
    if seeds.is_empty() {
        return Err(SimError::InvalidSeeds("empty seed set".into()));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= g.n()) {
        return Err(SimError::InvalidSeeds(format!("seed {bad} outside graph of {} nodes", g.n())));
    }
    Ok(())
}

/// Independent cascade: each node adopted in round `r` gets one chance to
/// activate each of its followers in round `r + 1`, independently with
/// probability `p`. Returns node → adoption round.
pub fn run_ic(g: &SocialGraph, seeds: &BTreeSet<usize>, p: f64, rng_seed: u64) -> Result<BTreeMap<usize, u32>, SimError> {
    check_seeds(g, seeds)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(SimError::InvalidParams(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = rng_from(rng_seed);
    let mut adopted: BTreeMap<usize, u32> = seeds.iter().map(|&s| (s, 0)).collect();
    let mut frontier: Vec<usize> = seeds.iter().copied().collect();
    let mut round = 0;
    while !frontier.is_empty() {
        round += 1;
        let mut next = BTreeSet::new();
        for &u in &frontier {
            for &v in g.followers(u) {
                if adopted.contains_key(&v) || next.contains(&v) {
                    continue;
                }
                if p >= 1.0 || (p > 0.0 && rng.random_bool(p)) {
                    next.insert(v);
                }
            }
        }
        for &v in &next {
            adopted.insert(v, round);
        }
        frontier = next.into_iter().collect();
    }
    Ok(adopted)
}

/// Linear threshold: a node adopts once the adopted fraction of its
/// followees reaches its threshold. Nodes with no followees adopt only when
/// seeded. Returns node → adoption round at the fixed point.
pub fn run_threshold_rounds(
    g: &SocialGraph,
    seeds: &BTreeSet<usize>,
    thresholds: &[f64],
) -> Result<BTreeMap<usize, u32>, SimError> {
    check_seeds(g, seeds)?;
    if thresholds.len() < g.n() {
        return Err(SimError::MissingThreshold { expected: g.n(), got: thresholds.len() });
    }
    let mut adopted: BTreeMap<usize, u32> = seeds.iter().map(|&s| (s, 0)).collect();
    let mut round = 0;
    loop {
        round += 1;
        let newly: Vec<usize> = (0..g.n())
            .filter(|v| !adopted.contains_key(v))
            .filter(|&v| {
                let followees = g.followees(v);
                if followees.is_empty() {
                    return false;
                }
                let active = followees.iter().filter(|u| adopted.contains_key(u)).count();
                active as f64 / followees.len() as f64 >= thresholds[v]
            })
            .collect();
        if newly.is_empty() {
            return Ok(adopted);
        }
        for v in newly {
            adopted.insert(v, round);
        }
    }
}

pub fn run_threshold(g: &SocialGraph, seeds: &BTreeSet<usize>, thresholds: &[f64]) -> Result<BTreeSet<usize>, SimError> {
    Ok(run_threshold_rounds(g, seeds, thresholds)?.into_keys().collect())
}
