//! Random state distributions for the verification suites.
//!
//! Everything here is deterministic given the caller's generator, so a fuzz
//! failure reproduces from its seed. Positions scale with a unit confidence
//! bound unless stated otherwise; the checked inequalities are scale
//! invariant.

use std::sync::Arc;

use crate::graph::SocialGraph;
use crate::rng::Xoshiro256PlusPlus;
use crate::state::HksState;

pub const EPSILON: f64 = 1.0;

/// Complete-graph state with `n` in `[n_lo, n_hi]`, dimension drawn from
/// `dims`, and positions uniform in a cube whose diagonal stays below
/// `spread_hi * epsilon`. With the default spreads the influence network is
/// well populated.
pub fn complete_state(
    rng: &mut Xoshiro256PlusPlus,
    n_lo: usize,
    n_hi: usize,
    dims: &[usize],
    spread_lo: f64,
    spread_hi: f64,
) -> HksState {
    let n = n_lo + rng.uniform_index(n_hi - n_lo + 1);
    let d = dims[rng.uniform_index(dims.len())];
    let side = rng.uniform_range(spread_lo, spread_hi) * EPSILON / (d as f64).sqrt();
    let positions: Vec<f64> = (0..n * d).map(|_| rng.uniform_range(0.0, side)).collect();
    let graph = Arc::new(SocialGraph::complete(n).expect("valid complete graph"));
    HksState::new(graph, EPSILON, d, positions).expect("valid state")
}

/// Sparse Erdos-Renyi state: each pair is an edge with probability `c / n`.
/// Spreads above 1 leave some social edges beyond the confidence bound.
pub fn sparse_state(
    rng: &mut Xoshiro256PlusPlus,
    n_lo: usize,
    n_hi: usize,
    dims: &[usize],
    spread_lo: f64,
    spread_hi: f64,
) -> HksState {
    let n = n_lo + rng.uniform_index(n_hi - n_lo + 1);
    let d = dims[rng.uniform_index(dims.len())];
    let c = rng.uniform_range(1.5, 4.0);
    let p = (c / n as f64).min(1.0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.uniform_f64() < p {
                edges.push((u as u32, v as u32));
            }
        }
    }
    let side = rng.uniform_range(spread_lo, spread_hi) * EPSILON / (d as f64).sqrt();
    let positions: Vec<f64> = (0..n * d).map(|_| rng.uniform_range(0.0, side)).collect();
    let graph = Arc::new(SocialGraph::new(n, edges).expect("valid sparse graph"));
    HksState::new(graph, EPSILON, d, positions).expect("valid state")
}

/// Complete-graph state whose influence network splits into well-separated
/// clusters, every active edge of length at most `epsilon / 2`: cluster
/// centers sit `3 * epsilon` apart on the first axis and members jitter
/// within a cube of diagonal `epsilon / 2` around their center.
pub fn clustered_complete_state(
    rng: &mut Xoshiro256PlusPlus,
    n_lo: usize,
    n_hi: usize,
) -> HksState {
    let n = n_lo + rng.uniform_index(n_hi - n_lo + 1);
    let d = 1 + rng.uniform_index(3);
    let clusters = 1 + rng.uniform_index(3);
    let half_side = EPSILON / (4.0 * (d as f64).sqrt());
    let mut positions = vec![0.0; n * d];
    for v in 0..n {
        let cluster = rng.uniform_index(clusters) as f64;
        positions[v * d] = 3.0 * EPSILON * cluster + rng.uniform_range(-half_side, half_side);
        for i in 1..d {
            positions[v * d + i] = rng.uniform_range(-half_side, half_side);
        }
    }
    let graph = Arc::new(SocialGraph::complete(n).expect("valid complete graph"));
    HksState::new(graph, EPSILON, d, positions).expect("valid state")
}

/// Applies `steps` random activations in place.
pub fn evolve(state: &mut HksState, rng: &mut Xoshiro256PlusPlus, steps: u64) {
    let n = state.n();
    for _ in 0..steps {
        let v = rng.uniform_index(n);
        state.activate_fast(v).expect("agent in range");
    }
}

/// Uniformly random active edge with strictly positive length, if any.
pub fn random_positive_edge(
    state: &HksState,
    rng: &mut Xoshiro256PlusPlus,
) -> Option<(usize, usize)> {
    let candidates: Vec<(usize, usize)> = state
        .graph()
        .edges()
        .iter()
        .enumerate()
        .filter(|&(e, _)| state.is_edge_active(e) && state.edge_length(e) > 0.0)
        .map(|(_, &(u, v))| (u as usize, v as usize))
        .collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.uniform_index(candidates.len())])
    }
}
