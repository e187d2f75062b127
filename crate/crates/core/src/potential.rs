//! Potential function and per-activation drop bounds.
//!
//! The potential of a state sums, over all social edges, the squared edge
//! length capped at `epsilon^2`. It never increases under activations, and
//! activating agent `v` decreases it by at least
//! `(|N(v)| + 1) * ||m(v)||^2` where `N(v)` is the influencing neighborhood
//! and `m(v)` the movement vector, with equality whenever the influence
//! network is unchanged by the activation. Averaging that bound over a
//! uniformly random activated agent gives the expected single-step drop,
//! which a descent argument lower-bounds by `2*lambda^2 / (n * |E_t|)` for
//! the longest active edge length `lambda`.

use crate::error::Result;
use crate::state::{norm, HksState};

/// Potential of the state: sum over social edges of
/// `min(length^2, epsilon^2)`.
pub fn potential(state: &HksState) -> f64 {
    let cap = state.epsilon() * state.epsilon();
    let mut acc = 0.0;
    for e in 0..state.graph().edge_count() {
        let len = state.edge_length(e);
        acc += (len * len).min(cap);
    }
    acc
}

/// Guaranteed potential drop when activating `v` now:
/// `(|N(v)| + 1) * ||m(v)||^2`.
pub fn drop_lower_bound(state: &HksState, v: usize) -> Result<f64> {
    let m = state.movement(v)?;
    let count = state.neighborhood_size(v)?;
    let n2 = m.iter().map(|a| a * a).sum::<f64>();
    Ok((count + 1) as f64 * n2)
}

/// Mean of [`drop_lower_bound`] over all agents: the guaranteed expected
/// potential drop for one uniformly random activation.
pub fn expected_drop(state: &HksState) -> f64 {
    let n = state.n();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for v in 0..n {
        acc += drop_lower_bound(state, v).expect("agent in range");
    }
    acc / n as f64
}

/// Descent floor `2*lambda^2 / (n * |E_t|)` for the longest active edge
/// length `lambda`; zero when the influence network is empty.
///
/// The floor presumes a populated influence network. Degenerate states, such
/// as an influence network consisting of one isolated edge, can undershoot
/// it; see the verification suites for the distributions on which it is
/// exercised.
pub fn expected_drop_floor(state: &HksState) -> f64 {
    let edges = state.active_edge_count();
    if edges == 0 || state.n() == 0 {
        return 0.0;
    }
    match state.longest_active_edge() {
        Some((_, _, lambda)) => 2.0 * lambda * lambda / (state.n() as f64 * edges as f64),
        None => 0.0,
    }
}

/// Potential diagnostics for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialReport {
    /// Potential of the state.
    pub phi: f64,
    /// Per-agent guaranteed drop `(|N(v)| + 1) * ||m(v)||^2`.
    pub drop_bound_per_agent: Vec<f64>,
    /// Mean of the per-agent bounds.
    pub expected_drop: f64,
    /// Descent floor `2*lambda^2 / (n * |E_t|)`.
    pub expected_drop_floor: f64,
}

pub fn potential_report(state: &HksState) -> PotentialReport {
    let drop_bound_per_agent: Vec<f64> = (0..state.n())
        .map(|v| drop_lower_bound(state, v).expect("agent in range"))
        .collect();
    let expected_drop = if drop_bound_per_agent.is_empty() {
        0.0
    } else {
        drop_bound_per_agent.iter().sum::<f64>() / drop_bound_per_agent.len() as f64
    };
    PotentialReport {
        phi: potential(state),
        drop_bound_per_agent,
        expected_drop,
        expected_drop_floor: expected_drop_floor(state),
    }
}

/// Result of simulating one activation on a scratch copy.
#[derive(Clone, Debug, PartialEq)]
pub struct DropCheck {
    /// Guaranteed drop `(|N(v)| + 1) * ||m(v)||^2`.
    pub bound: f64,
    /// Realized drop `phi(before) - phi(after)`.
    pub actual: f64,
    /// Whether any edge incident to `v` changed its active status.
    pub network_changed: bool,
}

/// Simulates activating `v` on a scratch copy and compares the realized
/// potential drop to its guaranteed bound. The live state is not perturbed.
///
/// Contract: `actual >= bound` up to rounding, with equality whenever
/// `network_changed` is false.
pub fn check_drop_equality(state: &HksState, v: usize) -> Result<DropCheck> {
    let bound = drop_lower_bound(state, v)?;
    let mut scratch = state.clone();
    let incident: Vec<(usize, bool)> = state
        .graph()
        .neighbors(v)
        .iter()
        .map(|a| (a.edge as usize, state.is_edge_active(a.edge as usize)))
        .collect();
    let phi_before = potential(&scratch);
    scratch.activate(v)?;
    let phi_after = potential(&scratch);
    let network_changed = incident
        .iter()
        .any(|&(e, was)| scratch.is_edge_active(e) != was);
    Ok(DropCheck {
        bound,
        actual: phi_before - phi_after,
        network_changed,
    })
}

/// Total weighted movement `sum_v |N(v)| * ||m(v)||`.
///
/// Projecting along a longest active edge and cutting at its midpoint shows
/// this is at least twice the longest active edge length.
pub fn total_weighted_movement(state: &HksState) -> f64 {
    let mut acc = 0.0;
    for v in 0..state.n() {
        let m = state.movement(v).expect("agent in range");
        let count = state.neighborhood_size(v).expect("agent in range");
        acc += count as f64 * norm(&m);
    }
    acc
}
