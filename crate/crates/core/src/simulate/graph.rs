use rand::Rng;

use super::rng::rng_from;
use super::SimError;

/// Directed follower graph. `followees[v]` lists the accounts `v` follows;
/// information flows from a followee to its followers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    followees: Vec<Vec<usize>>,
    followers: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Builds a graph from follower → followee pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, SimError> {
        let mut followees = vec![Vec::new(); n];
        for &(from, to) in edges {
            if from >= n || to >= n || from == to {
                return Err(SimError::InvalidParams(format!("bad edge {from} -> {to} for n = {n}")));
            }
            followees[from].push(to);
        }
        for list in &mut followees {
            list.sort_unstable();
            list.dedup();
        }
        let mut followers = vec![Vec::new(); n];
        for (v, list) in followees.iter().enumerate() {
            for &u in list {
                followers[u].push(v);
            }
        }
        Ok(SocialGraph { followees, followers })
    }

    pub fn n(&self) -> usize {
        self.followees.len()
    }

    pub fn n_edges(&self) -> usize {
        self.followees.iter().map(Vec::len).sum()
    }

    pub fn followees(&self, v: usize) -> &[usize] {
        &self.followees[v]
    }

    /// Sorted list of accounts following `v`.
    pub fn followers(&self, v: usize) -> &[usize] {
        &self.followers[v]
    }
}

/// Preferential attachment: an `m`-node clique (later nodes follow earlier
/// ones), then each new node follows `m` distinct existing nodes picked with
/// probability proportional to their degree.
pub fn gen_graph_ba(n: usize, m: usize, seed: u64) -> Result<SocialGraph, SimError> {
    if m < 1 || n <= m {
        return Err(SimError::InvalidParams(format!("need n > m >= 1, got n = {n}, m = {m}")));
    }
    let mut rng = rng_from(seed);
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + (n - m) * m);
    // every edge endpoint once; sampling an entry is degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for j in 0..m {
        for i in 0..j {
            edges.push((j, i));
            endpoints.extend([j, i]);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in m..n {
        chosen.clear();
        while chosen.len() < m {
            let u = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((v, u));
            endpoints.extend([v, u]);
        }
    }
    SocialGraph::from_edges(n, &edges)
}
