//! Hegselmann-Krause system state and the asynchronous update rule.
//!
//! An [`HksState`] binds agent opinions (points in `R^d`) to a
//! [`SocialGraph`] and a confidence bound `epsilon`. An agent only listens to
//! graph neighbors whose opinion is within `epsilon` of its own; activating
//! an agent moves it to the mean opinion of that influencing neighborhood
//! (itself included).
//!
//! The state keeps per-edge lengths and three incremental aggregates
//! current across activations:
//!
//! * the number of *active* edges (length within the influence threshold),
//! * the number of *violating* edges (active and longer than a tracked
//!   stability bound `delta`), which makes `is_delta_stable` O(1) and lets a
//!   driver detect the exact first stable step,
//! * the longest active edge, cached lazily: a full rescan happens only when
//!   the cached maximum shrank or deactivated and the maximum is queried.
//!
//! Each activation touches only the edges incident to the activated agent,
//! so the cost per step is O(deg(v) * d). Lengths are always recomputed from
//! the current positions, never accumulated, so the aggregates match a
//! from-scratch recomputation bit for bit.
//!
//! A state is a single-threaded entity: it can be moved across threads but
//! is never shared mutably. Trial-level parallelism lives in
//! [`crate::experiments`].

use std::cell::RefCell;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::SocialGraph;

/// Default relative tolerance of the influence predicate.
///
/// An edge is active when its length is at most `epsilon * (1 + tolerance)`.
/// Constructed instances place edges at exactly `epsilon`; the slack keeps
/// them active under floating-point accumulation instead of silently
/// dropping them. Set the tolerance to 0 for exact-threshold studies.
pub const DEFAULT_INFLUENCE_TOLERANCE: f64 = 1e-9;

const NO_EDGE: u32 = u32::MAX;

/// Outcome of a single activation.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveRecord {
    /// Whether the agent's position changed.
    pub moved: bool,
    /// Position delta, equal to the movement vector at activation time.
    pub displacement: Vec<f64>,
}

/// Snapshot of the influence-network aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceSummary {
    /// Number of active edges, `|E_t|`.
    pub active_edge_count: usize,
    /// Active edges longer than the queried stability bound.
    pub violating_edge_count: usize,
    /// Longest active edge as `(u, v, length)`; `None` when no edge is active.
    pub longest_edge: Option<(usize, usize, f64)>,
}

#[derive(Clone, Debug)]
struct LongestCache {
    edge: u32,
    /// Length of `edge` when clean; a stale upper bound on the true maximum
    /// when `dirty` (lengths only shrink between cache writes).
    len: f64,
    dirty: bool,
}

#[derive(Clone, Debug)]
struct DeltaTracker {
    delta: f64,
    violating: usize,
}

/// Opinions of `n` agents in `d` dimensions bound to a social network.
#[derive(Clone, Debug)]
pub struct HksState {
    graph: Arc<SocialGraph>,
    dimension: usize,
    epsilon: f64,
    tolerance: f64,
    /// `epsilon * (1 + tolerance)`, the active-edge threshold.
    eps_active: f64,
    /// Flat `n * dimension` opinion coordinates.
    positions: Vec<f64>,
    step: u64,
    edge_lengths: Vec<f64>,
    active_edges: usize,
    tracker: Option<DeltaTracker>,
    longest: RefCell<LongestCache>,
}

impl HksState {
    /// Creates a state from flat positions (`n * dimension` values,
    /// agent-major) with the default influence tolerance.
    pub fn new(
        graph: Arc<SocialGraph>,
        epsilon: f64,
        dimension: usize,
        positions: Vec<f64>,
    ) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if positions.len() != graph.n() * dimension {
            return Err(Error::invalid(format!(
                "expected {} coordinates ({} agents x {} dims), got {}",
                graph.n() * dimension,
                graph.n(),
                dimension,
                positions.len()
            )));
        }
        if let Some(bad) = positions.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        let mut state = HksState {
            graph,
            dimension,
            epsilon,
            tolerance: DEFAULT_INFLUENCE_TOLERANCE,
            eps_active: epsilon * (1.0 + DEFAULT_INFLUENCE_TOLERANCE),
            positions,
            step: 0,
            edge_lengths: Vec::new(),
            active_edges: 0,
            tracker: None,
            longest: RefCell::new(LongestCache {
                edge: NO_EDGE,
                len: f64::NEG_INFINITY,
                dirty: false,
            }),
        };
        state.rebuild_caches();
        Ok(state)
    }

    /// Creates a state from per-agent coordinate rows.
    pub fn from_rows(graph: Arc<SocialGraph>, epsilon: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dimension = rows.first().map(|r| r.len()).unwrap_or(1);
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dimension) {
            return Err(Error::Validation(format!(
                "position row {i} has {} coordinates, expected {dimension}",
                row.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        HksState::new(graph, epsilon, dimension, flat)
    }

    /// Replaces the influence tolerance and rebuilds the incremental caches.
    pub fn with_influence_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if tolerance < 0.0 || !tolerance.is_finite() {
            return Err(Error::invalid(format!(
                "influence tolerance must be a finite non-negative number, got {tolerance}"
            )));
        }
        self.tolerance = tolerance;
        self.eps_active = self.epsilon * (1.0 + tolerance);
        self.rebuild_caches();
        Ok(self)
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<SocialGraph> {
        Arc::clone(&self.graph)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn influence_tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Active-edge threshold `epsilon * (1 + tolerance)`.
    pub fn active_threshold(&self) -> f64 {
        self.eps_active
    }

    /// Number of activations applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Coordinates of agent `v`.
    pub fn position(&self, v: usize) -> &[f64] {
        &self.positions[v * self.dimension..(v + 1) * self.dimension]
    }

    /// Flat agent-major coordinate slice.
    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    /// Per-agent coordinate rows (copies).
    pub fn position_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|v| self.position(v).to_vec()).collect()
    }

    fn check_agent(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange {
                agent: v,
                n: self.n(),
            })
        }
    }

    /// Euclidean distance between the opinions of `u` and `v`.
    ///
    /// For one-dimensional states this is `|x_u - x_v|`; all length
    /// computations in the crate go through the same rule.
    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        self.check_agent(u)?;
        self.check_agent(v)?;
        Ok(self.dist_unchecked(u, v))
    }

    #[inline]
    fn dist_unchecked(&self, u: usize, v: usize) -> f64 {
        let d = self.dimension;
        if d == 1 {
            return (self.positions[u] - self.positions[v]).abs();
        }
        let a = &self.positions[u * d..u * d + d];
        let b = &self.positions[v * d..v * d + d];
        let mut acc = 0.0;
        for i in 0..d {
            let t = a[i] - b[i];
            acc += t * t;
        }
        acc.sqrt()
    }

    /// Cached length of edge `e` (index into `graph().edges()`).
    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    #[inline]
    pub fn is_edge_active(&self, e: usize) -> bool {
        self.edge_lengths[e] <= self.eps_active
    }

    /// Influencing neighborhood of `v`: graph neighbors within the influence
    /// threshold, plus `v` itself. Ascending agent ids.
    pub fn influencing_neighborhood(&self, v: usize) -> Result<Vec<usize>> {
        self.check_agent(v)?;
        let mut out: Vec<usize> = Vec::with_capacity(self.graph.degree(v) + 1);
        for a in self.graph.neighbors(v) {
            if self.edge_lengths[a.edge as usize] <= self.eps_active {
                out.push(a.neighbor as usize);
            }
        }
        let at = out.partition_point(|&u| u < v);
        out.insert(at, v);
        Ok(out)
    }

    /// `|N_t(v)|`, the influencing-neighborhood size including `v`.
    pub fn neighborhood_size(&self, v: usize) -> Result<usize> {
        self.check_agent(v)?;
        let active = self
            .graph
            .neighbors(v)
            .iter()
            .filter(|a| self.edge_lengths[a.edge as usize] <= self.eps_active)
            .count();
        Ok(active + 1)
    }

    /// Movement vector of `v`: the displacement it would undergo if
    /// activated now (mean of neighborhood opinions minus its own).
    pub fn movement(&self, v: usize) -> Result<Vec<f64>> {
        self.check_agent(v)?;
        let d = self.dimension;
        let mut acc = vec![0.0; d];
        let count = self.accumulate_movement(v, &mut acc);
        for a in &mut acc {
            *a /= count as f64;
        }
        Ok(acc)
    }

    /// Euclidean norm of the movement vector of `v`.
    pub fn movement_norm(&self, v: usize) -> Result<f64> {
        let m = self.movement(v)?;
        Ok(norm(&m))
    }

    /// Sums `x_u - x_v` over active neighbors into `acc`; returns `|N_t(v)|`.
    #[inline]
    fn accumulate_movement(&self, v: usize, acc: &mut [f64]) -> usize {
        let d = self.dimension;
        let mut count = 1usize;
        if d == 1 {
            let xv = self.positions[v];
            for a in self.graph.neighbors(v) {
                let xu = self.positions[a.neighbor as usize];
                if (xu - xv).abs() <= self.eps_active {
                    acc[0] += xu - xv;
                    count += 1;
                }
            }
        } else {
            let xv = v * d;
            for a in self.graph.neighbors(v) {
                let u = a.neighbor as usize;
                if self.dist_unchecked(u, v) <= self.eps_active {
                    let xu = u * d;
                    for (i, slot) in acc.iter_mut().enumerate() {
                        *slot += self.positions[xu + i] - self.positions[xv + i];
                    }
                    count += 1;
                }
            }
        }
        count
    }

    /// Activates `v`: moves it to its neighborhood mean, advances the step
    /// counter, and updates the incremental aggregates.
    pub fn activate(&mut self, v: usize) -> Result<MoveRecord> {
        self.check_agent(v)?;
        let mut displacement = vec![0.0; self.dimension];
        let moved = self.step_agent(v, Some(&mut displacement));
        Ok(MoveRecord {
            moved,
            displacement,
        })
    }

    /// Like [`HksState::activate`] without materializing the displacement;
    /// returns whether the agent moved. This is the simulation hot path.
    pub fn activate_fast(&mut self, v: usize) -> Result<bool> {
        self.check_agent(v)?;
        Ok(self.step_agent(v, None))
    }

    fn step_agent(&mut self, v: usize, displacement: Option<&mut [f64]>) -> bool {
        let d = self.dimension;
        let moved;
        if d == 1 {
            let xv = self.positions[v];
            let mut acc = 0.0;
            let mut count = 1usize;
            let graph = Arc::clone(&self.graph);
            for a in graph.neighbors(v) {
                let xu = self.positions[a.neighbor as usize];
                if (xu - xv).abs() <= self.eps_active {
                    acc += xu - xv;
                    count += 1;
                }
            }
            let m = acc / count as f64;
            let new = xv + m;
            moved = new != xv;
            if let Some(out) = displacement {
                out[0] = m;
            }
            if moved {
                self.positions[v] = new;
                for a in graph.neighbors(v) {
                    let len = (self.positions[a.neighbor as usize] - new).abs();
                    self.update_edge_length(a.edge as usize, len);
                }
            }
        } else {
            let mut acc = vec![0.0; d];
            let count = self.accumulate_movement(v, &mut acc);
            for a in &mut acc {
                *a /= count as f64;
            }
            let base = v * d;
            let mut any = false;
            for (i, &m) in acc.iter().enumerate() {
                let old = self.positions[base + i];
                any |= old + m != old;
            }
            moved = any;
            if moved {
                for (i, &m) in acc.iter().enumerate() {
                    self.positions[base + i] += m;
                }
                let graph = Arc::clone(&self.graph);
                for a in graph.neighbors(v) {
                    let len = self.dist_unchecked(a.neighbor as usize, v);
                    self.update_edge_length(a.edge as usize, len);
                }
            }
            if let Some(out) = displacement {
                out.copy_from_slice(&acc);
            }
        }
        self.step += 1;
        moved
    }

    #[inline]
    fn update_edge_length(&mut self, e: usize, new_len: f64) {
        let old = self.edge_lengths[e];
        self.edge_lengths[e] = new_len;
        let was_active = old <= self.eps_active;
        let now_active = new_len <= self.eps_active;
        match (was_active, now_active) {
            (true, false) => self.active_edges -= 1,
            (false, true) => self.active_edges += 1,
            _ => {}
        }
        if let Some(tr) = &mut self.tracker {
            let was_violating = was_active && old > tr.delta;
            let now_violating = now_active && new_len > tr.delta;
            match (was_violating, now_violating) {
                (true, false) => tr.violating -= 1,
                (false, true) => tr.violating += 1,
                _ => {}
            }
        }
        let cache = self.longest.get_mut();
        if now_active && new_len >= cache.len {
            // Dominates even a stale upper bound, so the cache is clean again.
            cache.edge = e as u32;
            cache.len = new_len;
            cache.dirty = false;
        } else if cache.edge == e as u32 && !cache.dirty {
            // The cached maximum shrank or deactivated; its old length stays
            // valid as an upper bound until someone asks.
            cache.dirty = true;
        }
    }

    fn rebuild_caches(&mut self) {
        let graph = Arc::clone(&self.graph);
        self.edge_lengths = graph
            .edges()
            .iter()
            .map(|&(u, v)| self.dist_unchecked(u as usize, v as usize))
            .collect();
        self.active_edges = self
            .edge_lengths
            .iter()
            .filter(|&&l| l <= self.eps_active)
            .count();
        if let Some(tr) = &mut self.tracker {
            let delta = tr.delta;
            tr.violating = self
                .edge_lengths
                .iter()
                .filter(|&&l| l <= self.eps_active && l > delta)
                .count();
        }
        *self.longest.get_mut() = self.scan_longest();
    }

    fn scan_longest(&self) -> LongestCache {
        let mut best = LongestCache {
            edge: NO_EDGE,
            len: f64::NEG_INFINITY,
            dirty: false,
        };
        for (e, &len) in self.edge_lengths.iter().enumerate() {
            if len <= self.eps_active && len > best.len {
                best.edge = e as u32;
                best.len = len;
            }
        }
        best
    }

    /// Longest active edge as `(u, v, length)`, `None` if no edge is active.
    pub fn longest_active_edge(&self) -> Option<(usize, usize, f64)> {
        if self.active_edges == 0 {
            return None;
        }
        let mut cache = self.longest.borrow_mut();
        if cache.dirty || cache.edge == NO_EDGE {
            *cache = self.scan_longest();
        }
        let (u, v) = self.graph.endpoints(cache.edge as usize);
        Some((u, v, cache.len))
    }

    /// Number of active edges, `|E_t|`.
    pub fn active_edge_count(&self) -> usize {
        self.active_edges
    }

    /// Active edges of the influence network, canonical order.
    pub fn influence_network(&self) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .iter()
            .zip(&self.edge_lengths)
            .filter(|(_, &len)| len <= self.eps_active)
            .map(|(&(u, v), _)| (u as usize, v as usize))
            .collect()
    }

    /// Starts incremental tracking of the stability bound `delta`, making
    /// [`HksState::is_delta_stable`] for that bound O(1).
    pub fn track_delta(&mut self, delta: f64) -> Result<()> {
        check_delta(delta)?;
        let violating = self.count_violating(delta);
        self.tracker = Some(DeltaTracker { delta, violating });
        Ok(())
    }

    pub fn tracked_delta(&self) -> Option<f64> {
        self.tracker.as_ref().map(|t| t.delta)
    }

    fn count_violating(&self, delta: f64) -> usize {
        self.edge_lengths
            .iter()
            .filter(|&&l| l <= self.eps_active && l > delta)
            .count()
    }

    /// Number of active edges longer than `delta`. O(1) when `delta` is the
    /// tracked bound, otherwise a full scan.
    pub fn violating_edge_count(&self, delta: f64) -> Result<usize> {
        check_delta(delta)?;
        if let Some(tr) = &self.tracker {
            if tr.delta == delta {
                return Ok(tr.violating);
            }
        }
        Ok(self.count_violating(delta))
    }

    /// True iff every social edge is either within `delta` or beyond the
    /// influence threshold: no active edge is longer than `delta`.
    pub fn is_delta_stable(&self, delta: f64) -> Result<bool> {
        Ok(self.violating_edge_count(delta)? == 0)
    }

    /// True iff every connected component of the influence network has
    /// Euclidean opinion diameter at most `delta`. Strictly stronger than
    /// `delta`-stability on non-complete networks.
    pub fn is_delta_equilibrium(&self, delta: f64) -> Result<bool> {
        check_delta(delta)?;
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = Vec::new();
        let mut component: Vec<usize> = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            component.clear();
            stack.push(start);
            seen[start] = true;
            while let Some(v) = stack.pop() {
                component.push(v);
                for a in self.graph.neighbors(v) {
                    let u = a.neighbor as usize;
                    if !seen[u] && self.edge_lengths[a.edge as usize] <= self.eps_active {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            for (i, &u) in component.iter().enumerate() {
                for &w in &component[i + 1..] {
                    if self.dist_unchecked(u, w) > delta {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// True iff every connected component of the influence network induces a
    /// clique in it.
    pub fn components_are_cliques(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = Vec::new();
        let mut component: Vec<usize> = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            component.clear();
            stack.push(start);
            seen[start] = true;
            while let Some(v) = stack.pop() {
                component.push(v);
                for a in self.graph.neighbors(v) {
                    let u = a.neighbor as usize;
                    if !seen[u] && self.edge_lengths[a.edge as usize] <= self.eps_active {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            // Active edges never leave a component, so the active degree of
            // each member must be exactly |C| - 1.
            for &v in &component {
                let active_deg = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .filter(|a| self.edge_lengths[a.edge as usize] <= self.eps_active)
                    .count();
                if active_deg != component.len() - 1 {
                    return false;
                }
            }
        }
        true
    }

    /// True iff the influence network currently equals the social network.
    pub fn is_socially_stable_state(&self) -> bool {
        self.active_edges == self.graph.edge_count()
    }

    /// Aggregates of the influence network relative to the bound `delta`.
    pub fn influence_summary(&self, delta: f64) -> Result<InfluenceSummary> {
        Ok(InfluenceSummary {
            active_edge_count: self.active_edges,
            violating_edge_count: self.violating_edge_count(delta)?,
            longest_edge: self.longest_active_edge(),
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "delta must be positive and finite, got {delta}"
        )))
    }
}

/// Euclidean norm of a vector.
pub fn norm(x: &[f64]) -> f64 {
    if x.len() == 1 {
        return x[0].abs();
    }
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_path;
    use crate::rng::Xoshiro256PlusPlus;
    use proptest::prelude::*;

    fn two_agents(eps: f64) -> HksState {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        HksState::new(g, eps, 1, vec![0.0, eps]).unwrap()
    }

    #[test]
    fn distance_three_four_five() {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let s = HksState::new(g, 10.0, 2, vec![0.0, 0.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.distance(0, 1).unwrap(), 5.0);
        assert_eq!(s.distance(1, 0).unwrap(), 5.0);
    }

    #[test]
    fn distance_identical_positions_is_zero() {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let s = HksState::new(g, 1.0, 3, vec![1.5, -2.0, 0.25, 1.5, -2.0, 0.25]).unwrap();
        assert_eq!(s.distance(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn path_adjacent_pairs_at_exactly_epsilon() {
        let s = gen_path(6, 100.0).unwrap();
        for e in 0..s.graph().edge_count() {
            let (u, v) = s.graph().endpoints(e);
            assert_eq!(s.distance(u, v).unwrap(), 100.0);
        }
    }

    #[test]
    fn distance_rejects_bad_agent() {
        let s = two_agents(1.0);
        assert!(matches!(
            s.distance(0, 2),
            Err(Error::AgentOutOfRange { agent: 2, n: 2 })
        ));
    }

    #[test]
    fn neighborhood_includes_self_and_respects_threshold() {
        let s = gen_path(3, 100.0).unwrap();
        assert_eq!(s.influencing_neighborhood(1).unwrap(), vec![0, 1, 2]);

        // Isolated agent: graph with no edges.
        let g = Arc::new(SocialGraph::new(1, Vec::new()).unwrap());
        let lone = HksState::new(g, 1.0, 1, vec![0.0]).unwrap();
        assert_eq!(lone.influencing_neighborhood(0).unwrap(), vec![0]);

        // Two graph-adjacent agents beyond the confidence bound.
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let far = HksState::new(g, 1.0, 1, vec![0.0, 2.0]).unwrap();
        assert_eq!(far.influencing_neighborhood(0).unwrap(), vec![0]);
        assert_eq!(far.influencing_neighborhood(1).unwrap(), vec![1]);
        assert_eq!(far.active_edge_count(), 0);
    }

    #[test]
    fn movement_of_two_agent_pair() {
        let s = two_agents(100.0);
        assert_eq!(s.movement(0).unwrap(), vec![50.0]);
        assert_eq!(s.movement(1).unwrap(), vec![-50.0]);
    }

    #[test]
    fn movement_zero_for_interior_path_agent() {
        let s = gen_path(5, 100.0).unwrap();
        for v in 1..4 {
            assert_eq!(s.movement(v).unwrap(), vec![0.0]);
            assert_eq!(s.movement_norm(v).unwrap(), 0.0);
        }
        assert_eq!(s.movement(0).unwrap(), vec![50.0]);
    }

    #[test]
    fn activate_two_agents_moves_to_midpoint() {
        let mut s = two_agents(100.0);
        let rec = s.activate(0).unwrap();
        assert!(rec.moved);
        assert_eq!(rec.displacement, vec![50.0]);
        assert_eq!(s.position(0), &[50.0]);
        assert_eq!(s.position(1), &[100.0]);
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn activate_isolated_agent_is_a_counted_no_op() {
        let g = Arc::new(SocialGraph::new(2, Vec::new()).unwrap());
        let mut s = HksState::new(g, 1.0, 1, vec![0.3, 0.9]).unwrap();
        let rec = s.activate(0).unwrap();
        assert!(!rec.moved);
        assert_eq!(rec.displacement, vec![0.0]);
        assert_eq!(s.position(0), &[0.3]);
        // Every activation counts toward convergence time.
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn activate_middle_of_equal_spacing_path_does_not_move() {
        let mut s = gen_path(3, 100.0).unwrap();
        let rec = s.activate(1).unwrap();
        assert!(!rec.moved);
        assert_eq!(s.position(1), &[200.0]);
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn activation_leaves_other_positions_bit_identical() {
        let mut s = gen_path(6, 100.0).unwrap();
        let before = s.positions_flat().to_vec();
        s.activate(2).unwrap();
        for (v, (&now, &was)) in s.positions_flat().iter().zip(&before).enumerate() {
            if v != 2 {
                assert_eq!(now, was);
            }
        }
    }

    #[test]
    fn influence_network_full_on_fresh_path() {
        let s = gen_path(5, 100.0).unwrap();
        assert_eq!(s.influence_network().len(), 4);
        assert!(s.is_socially_stable_state());
    }

    #[test]
    fn influence_network_complete_when_coincident() {
        let g = Arc::new(SocialGraph::complete(4).unwrap());
        let s = HksState::new(g, 1.0, 1, vec![0.5; 4]).unwrap();
        assert_eq!(s.influence_network().len(), 6);
        assert!(s.is_socially_stable_state());
    }

    #[test]
    fn delta_stability_boundary_is_inclusive() {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let s = HksState::new(g, 100.0, 1, vec![0.0, 25.0]).unwrap();
        assert!(s.is_delta_stable(25.0).unwrap());
        assert!(!s.is_delta_stable(24.0).unwrap());
    }

    #[test]
    fn path_not_stable_coincident_stable() {
        let s = gen_path(4, 100.0).unwrap();
        assert!(!s.is_delta_stable(1.0).unwrap());
        let g = Arc::new(SocialGraph::complete(3).unwrap());
        let c = HksState::new(g, 1.0, 2, vec![0.7; 6]).unwrap();
        assert!(c.is_delta_stable(1e-300).unwrap());
    }

    #[test]
    fn delta_must_be_positive() {
        let s = two_agents(1.0);
        assert!(s.is_delta_stable(0.0).is_err());
        assert!(s.is_delta_stable(-1.0).is_err());
        assert!(s.is_delta_equilibrium(0.0).is_err());
    }

    #[test]
    fn stable_but_not_equilibrium() {
        // Three agents at 0, delta, 2*delta on a path: every edge is within
        // delta but the component diameter is 2*delta.
        let g = Arc::new(SocialGraph::path(3).unwrap());
        let s = HksState::new(g, 100.0, 1, vec![0.0, 10.0, 20.0]).unwrap();
        assert!(s.is_delta_stable(10.0).unwrap());
        assert!(!s.is_delta_equilibrium(10.0).unwrap());
        assert!(s.is_delta_equilibrium(20.0).unwrap());
    }

    #[test]
    fn single_agent_is_equilibrium() {
        let g = Arc::new(SocialGraph::new(1, Vec::new()).unwrap());
        let s = HksState::new(g, 1.0, 1, vec![42.0]).unwrap();
        assert!(s.is_delta_equilibrium(1e-12).unwrap());
        assert!(s.components_are_cliques());
    }

    #[test]
    fn clique_components_on_complete_graph_within_half_epsilon() {
        let g = Arc::new(SocialGraph::complete(5).unwrap());
        // Two clusters, each of diameter <= eps/2, farther than eps apart.
        let s = HksState::new(g, 1.0, 1, vec![0.0, 0.2, 0.1, 5.0, 5.3]).unwrap();
        assert!(s.components_are_cliques());
        assert!(s.is_delta_equilibrium(0.5).unwrap());
    }

    #[test]
    fn path_of_three_is_not_clique_components() {
        let s = gen_path(3, 100.0).unwrap();
        assert!(!s.components_are_cliques());
        let pair = two_agents(1.0);
        assert!(pair.components_are_cliques());
    }

    #[test]
    fn socially_stable_cases() {
        assert!(gen_path(4, 100.0).unwrap().is_socially_stable_state());
        let g = Arc::new(SocialGraph::new(3, Vec::new()).unwrap());
        let empty = HksState::new(g, 1.0, 1, vec![0.0, 10.0, 20.0]).unwrap();
        assert!(empty.is_socially_stable_state());
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let far = HksState::new(g, 1.0, 1, vec![0.0, 3.0]).unwrap();
        assert!(!far.is_socially_stable_state());
    }

    #[test]
    fn zero_tolerance_keeps_exact_epsilon_edges_active() {
        // Constructed instances place edges at exactly epsilon; with the
        // tolerance disabled the boundary is still inclusive.
        let s = gen_path(4, 100.0)
            .unwrap()
            .with_influence_tolerance(0.0)
            .unwrap();
        assert_eq!(s.active_threshold(), 100.0);
        assert_eq!(s.active_edge_count(), 3);
        assert!(s.is_socially_stable_state());
        let far = HksState::new(
            Arc::new(SocialGraph::path(2).unwrap()),
            1.0,
            1,
            vec![0.0, 1.0 + f64::EPSILON],
        )
        .unwrap()
        .with_influence_tolerance(0.0)
        .unwrap();
        assert_eq!(far.active_edge_count(), 0);
        assert!(HksState::new(
            Arc::new(SocialGraph::path(2).unwrap()),
            1.0,
            1,
            vec![0.0, 0.5]
        )
        .unwrap()
        .with_influence_tolerance(-1e-3)
        .is_err());
    }

    #[test]
    fn tracked_delta_matches_scan_and_is_constant_time_path() {
        let mut s = gen_path(8, 100.0).unwrap();
        s.track_delta(1.0).unwrap();
        assert_eq!(s.violating_edge_count(1.0).unwrap(), 7);
        assert_eq!(s.tracked_delta(), Some(1.0));
        // Untracked bound falls back to a scan.
        assert_eq!(s.violating_edge_count(150.0).unwrap(), 0);
    }

    #[test]
    fn summary_reports_longest_edge() {
        let g = Arc::new(SocialGraph::path(3).unwrap());
        let s = HksState::new(g, 10.0, 1, vec![0.0, 4.0, 11.0]).unwrap();
        let sum = s.influence_summary(1.0).unwrap();
        assert_eq!(sum.active_edge_count, 2);
        assert_eq!(sum.violating_edge_count, 2);
        assert_eq!(sum.longest_edge, Some((1, 2, 7.0)));
    }

    /// From-scratch recomputation of the incremental aggregates, used as the
    /// independent oracle for the consistency fuzz. Mirrors the documented
    /// length rule (absolute difference in one dimension).
    fn scratch_summary(s: &HksState, delta: f64) -> (usize, usize, Option<f64>) {
        let d = s.dimension();
        let pos = s.positions_flat();
        let thr = s.active_threshold();
        let mut active = 0usize;
        let mut violating = 0usize;
        let mut longest: Option<f64> = None;
        for &(u, v) in s.graph().edges() {
            let (u, v) = (u as usize, v as usize);
            let len = if d == 1 {
                (pos[u] - pos[v]).abs()
            } else {
                let mut acc = 0.0;
                for i in 0..d {
                    let t = pos[u * d + i] - pos[v * d + i];
                    acc += t * t;
                }
                acc.sqrt()
            };
            if len <= thr {
                active += 1;
                if len > delta {
                    violating += 1;
                }
                if longest.is_none_or(|l| len > l) {
                    longest = Some(len);
                }
            }
        }
        (active, violating, longest)
    }

    #[test]
    fn incremental_aggregates_match_scratch_recomputation() {
        // >= 10^4 random activations across several instance shapes.
        let mut rng = Xoshiro256PlusPlus::new(0xC0FFEE);
        let shapes: Vec<HksState> = vec![
            gen_path(12, 100.0).unwrap(),
            {
                let g = Arc::new(SocialGraph::complete(10).unwrap());
                let pos: Vec<f64> = (0..20).map(|_| rng.uniform_range(0.0, 150.0)).collect();
                HksState::new(g, 100.0, 2, pos).unwrap()
            },
            {
                let g = Arc::new(
                    SocialGraph::new(
                        9,
                        vec![
                            (0, 1),
                            (1, 2),
                            (2, 3),
                            (3, 4),
                            (4, 5),
                            (5, 6),
                            (6, 7),
                            (7, 8),
                            (0, 4),
                            (2, 6),
                            (1, 7),
                        ],
                    )
                    .unwrap(),
                );
                let pos: Vec<f64> = (0..9).map(|_| rng.uniform_range(0.0, 220.0)).collect();
                HksState::new(g, 100.0, 1, pos).unwrap()
            },
        ];
        for mut s in shapes {
            let delta = 1.0;
            s.track_delta(delta).unwrap();
            for i in 0..4000u64 {
                let v = rng.uniform_index(s.n());
                s.activate_fast(v).unwrap();
                if i % 7 == 0 {
                    let (active, violating, longest) = scratch_summary(&s, delta);
                    assert_eq!(s.active_edge_count(), active);
                    assert_eq!(s.violating_edge_count(delta).unwrap(), violating);
                    let cached = s.longest_active_edge();
                    assert_eq!(cached.map(|(_, _, l)| l), longest);
                    if let Some((u, v, l)) = cached {
                        assert_eq!(s.distance(u, v).unwrap(), l);
                        assert!(l <= s.active_threshold());
                    }
                }
            }
            let (active, violating, longest) = scratch_summary(&s, delta);
            assert_eq!(s.active_edge_count(), active);
            assert_eq!(s.violating_edge_count(delta).unwrap(), violating);
            assert_eq!(s.longest_active_edge().map(|(_, _, l)| l), longest);
        }
    }

    #[test]
    fn displacement_equals_movement_prediction() {
        let mut rng = Xoshiro256PlusPlus::new(77);
        let g = Arc::new(SocialGraph::complete(8).unwrap());
        let pos: Vec<f64> = (0..24).map(|_| rng.uniform_range(0.0, 2.0)).collect();
        let mut s = HksState::new(g, 1.0, 3, pos).unwrap();
        for _ in 0..200 {
            let v = rng.uniform_index(8);
            let predicted = s.movement(v).unwrap();
            let rec = s.activate(v).unwrap();
            assert_eq!(rec.displacement, predicted);
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_triangle(
            coords in proptest::collection::vec(-1e6f64..1e6, 9)
        ) {
            let g = Arc::new(SocialGraph::complete(3).unwrap());
            let s = HksState::new(g, 1.0, 3, coords).unwrap();
            let ab = s.distance(0, 1).unwrap();
            let ba = s.distance(1, 0).unwrap();
            let bc = s.distance(1, 2).unwrap();
            let ac = s.distance(0, 2).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!(ab <= ac + bc + 1e-9);
        }

        #[test]
        fn neighborhood_always_contains_self(
            coords in proptest::collection::vec(0.0f64..3.0, 6),
            v in 0usize..6
        ) {
            let g = Arc::new(SocialGraph::path(6).unwrap());
            let s = HksState::new(g, 1.0, 1, coords).unwrap();
            let nb = s.influencing_neighborhood(v).unwrap();
            prop_assert!(nb.contains(&v));
            prop_assert!(!nb.is_empty());
            let mut sorted = nb.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, nb);
        }
    }
}
