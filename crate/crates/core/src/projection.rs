//! Projection of a d-dimensional state to one dimension along an active
//! edge, and the cut-movement bound for one-dimensional states.
//!
//! For an active edge `{u, w}` of positive length, the projection vector is
//! `p = (x_u - x_w) / ||x_u - x_w||` (with `u` the smaller agent id, for
//! determinism) and each agent projects to the scalar `x_v . p`. The
//! projected system keeps exactly the influence-network edges of the source
//! state as its social network. Three laws connect the two systems:
//!
//! 1. the defining edge keeps its length,
//! 2. influencing neighborhoods are identical,
//! 3. per agent, the projected movement never exceeds the original movement
//!    in magnitude (so the total weighted movement only shrinks).
//!
//! In one dimension, splitting the agents at any threshold `c` (ties go
//! left) bounds the total weighted movement from below by twice the summed
//! length of the influence edges crossing the cut.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::potential::total_weighted_movement;
use crate::state::{norm, HksState};

/// One-dimensional image of a state under projection along an edge.
#[derive(Clone, Debug)]
pub struct ProjectedState {
    state: HksState,
    source_edge: (usize, usize),
    source_length: f64,
}

impl ProjectedState {
    /// The projected system: a one-dimensional state whose social network is
    /// the influence network of the source state.
    pub fn hks(&self) -> &HksState {
        &self.state
    }

    /// Projected scalar positions, agent order preserved.
    pub fn positions(&self) -> &[f64] {
        self.state.positions_flat()
    }

    /// Edge that defined the projection vector, `(min_id, max_id)`.
    pub fn source_edge(&self) -> (usize, usize) {
        self.source_edge
    }

    /// Length of the source edge in the original state.
    pub fn source_length(&self) -> f64 {
        self.source_length
    }

    /// Cut-movement bound of the projected one-dimensional system at `c`.
    pub fn cut_movement_bound(&self, c: f64) -> CutMovementBound {
        cut_movement_bound(&self.state, c).expect("projected state is one-dimensional")
    }
}

/// Projects `state` along the active edge `{u, w}`.
///
/// Fails if the edge is missing from the social network, inactive, or has
/// zero length (no direction to project onto).
pub fn project(state: &HksState, u: usize, w: usize) -> Result<ProjectedState> {
    let edge = state
        .graph()
        .find_edge(u, w)
        .ok_or(Error::NoSuchEdge { u, v: w })?;
    if !state.is_edge_active(edge) {
        return Err(Error::EdgeNotActive { u, v: w });
    }
    let (a, b) = state.graph().endpoints(edge);
    let len = state.edge_length(edge);
    if len <= 0.0 {
        return Err(Error::DegenerateProjection { u: a, v: b });
    }

    let d = state.dimension();
    let pa = state.position(a);
    let pb = state.position(b);
    let p: Vec<f64> = (0..d).map(|i| (pa[i] - pb[i]) / len).collect();

    let positions: Vec<f64> = (0..state.n())
        .map(|v| {
            let x = state.position(v);
            (0..d).map(|i| x[i] * p[i]).sum()
        })
        .collect();

    let influence_edges: Vec<(u32, u32)> = state
        .influence_network()
        .into_iter()
        .map(|(x, y)| (x as u32, y as u32))
        .collect();
    let graph = Arc::new(SocialGraph::new(state.n(), influence_edges)?);
    let projected = HksState::new(graph, state.epsilon(), 1, positions)?
        .with_influence_tolerance(state.influence_tolerance())?;

    Ok(ProjectedState {
        state: projected,
        source_edge: (a, b),
        source_length: len,
    })
}

/// Outcome of checking the three projection laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionLaws {
    /// The source edge has the same length in both systems.
    pub edge_preserved: bool,
    /// Influencing neighborhoods agree for every agent.
    pub network_equal: bool,
    /// `|m_proj(v)| <= ||m(v)||` per agent, and the weighted totals follow.
    pub movement_dominated: bool,
}

impl ProjectionLaws {
    pub fn all_hold(&self) -> bool {
        self.edge_preserved && self.network_equal && self.movement_dominated
    }
}

/// Projects along `{u, w}` and verifies the projection laws numerically
/// (relative tolerance 1e-9).
pub fn check_projection_laws(state: &HksState, u: usize, w: usize) -> Result<ProjectionLaws> {
    let proj = project(state, u, w)?;
    let (a, b) = proj.source_edge();

    let gap = (proj.positions()[a] - proj.positions()[b]).abs();
    let edge_preserved = (gap - proj.source_length()).abs() <= 1e-9 * proj.source_length();

    let mut network_equal = true;
    for v in 0..state.n() {
        if state.influencing_neighborhood(v)? != proj.hks().influencing_neighborhood(v)? {
            network_equal = false;
            break;
        }
    }

    let tol = 1e-9 * state.epsilon();
    let mut movement_dominated = true;
    let mut total_src = 0.0;
    let mut total_proj = 0.0;
    for v in 0..state.n() {
        let m_src = norm(&state.movement(v)?);
        let m_proj = proj.hks().movement(v)?[0].abs();
        let count_src = state.neighborhood_size(v)? as f64;
        let count_proj = proj.hks().neighborhood_size(v)? as f64;
        total_src += count_src * m_src;
        total_proj += count_proj * m_proj;
        if m_proj > m_src + tol {
            movement_dominated = false;
        }
    }
    if total_src + tol * (state.n() as f64) < total_proj {
        movement_dominated = false;
    }

    Ok(ProjectionLaws {
        edge_preserved,
        network_equal,
        movement_dominated,
    })
}

/// Both sides of the one-dimensional cut-movement inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutMovementBound {
    /// `sum_v |N(v)| * |m(v)|`.
    pub lhs: f64,
    /// `2 * sum of lengths of influence edges crossing the cut`.
    pub rhs: f64,
}

/// Evaluates the cut-movement inequality for a one-dimensional state: agents
/// with position `<= c` form the left side, and the total weighted movement
/// is at least twice the summed length of the crossing influence edges.
pub fn cut_movement_bound(state: &HksState, c: f64) -> Result<CutMovementBound> {
    if state.dimension() != 1 {
        return Err(Error::NotOneDimensional {
            dimension: state.dimension(),
        });
    }
    let pos = state.positions_flat();
    let mut lhs = 0.0;
    for v in 0..state.n() {
        let m = state.movement(v)?[0];
        lhs += state.neighborhood_size(v)? as f64 * m.abs();
    }
    let mut crossing = 0.0;
    for (e, &(u, w)) in state.graph().edges().iter().enumerate() {
        if !state.is_edge_active(e) {
            continue;
        }
        let left_u = pos[u as usize] <= c;
        let left_w = pos[w as usize] <= c;
        if left_u != left_w {
            crossing += state.edge_length(e);
        }
    }
    Ok(CutMovementBound {
        lhs,
        rhs: 2.0 * crossing,
    })
}

/// Evidence that the total weighted movement dominates twice the longest
/// active edge length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongestEdgeBound {
    /// `sum_v |N(v)| * ||m(v)||` in the original state.
    pub lhs_original: f64,
    /// Same sum in the projection along the longest active edge.
    pub lhs_projected: f64,
    /// Cut bound `2 * sum of crossing lengths` at the edge midpoint.
    pub rhs_cut: f64,
    /// `2 * lambda`, twice the longest active edge length.
    pub two_lambda: f64,
}

/// Projects along a longest active edge, cuts at its midpoint, and returns
/// the resulting chain of lower bounds:
/// `lhs_original >= lhs_projected >= rhs_cut >= two_lambda` (up to rounding).
///
/// Returns `None` when the influence network is empty or its longest edge
/// has zero length (nothing to bound).
pub fn longest_edge_cut_bound(state: &HksState) -> Result<Option<LongestEdgeBound>> {
    let Some((u, w, lambda)) = state.longest_active_edge() else {
        return Ok(None);
    };
    if lambda <= 0.0 {
        return Ok(None);
    }
    let proj = project(state, u, w)?;
    let c = (proj.positions()[u] + proj.positions()[w]) / 2.0;
    let cut = proj.cut_movement_bound(c);
    Ok(Some(LongestEdgeBound {
        lhs_original: total_weighted_movement(state),
        lhs_projected: cut.lhs,
        rhs_cut: cut.rhs,
        two_lambda: 2.0 * lambda,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_path;
    use crate::rng::Xoshiro256PlusPlus;

    fn state_2d(positions: Vec<f64>, eps: f64, edges: Vec<(u32, u32)>) -> HksState {
        let n = positions.len() / 2;
        let g = Arc::new(SocialGraph::new(n, edges).unwrap());
        HksState::new(g, eps, 2, positions).unwrap()
    }

    #[test]
    fn one_dimensional_projection_reproduces_positions_up_to_sign() {
        let s = gen_path(4, 100.0).unwrap();
        let proj = project(&s, 1, 2).unwrap();
        // p = (x_1 - x_2)/eps = -1: the projection flips the axis.
        for v in 0..4 {
            assert_eq!(proj.positions()[v], -s.positions_flat()[v]);
        }
        assert_eq!(proj.source_edge(), (1, 2));
        assert_eq!(proj.source_length(), 100.0);
    }

    #[test]
    fn axis_aligned_two_dimensional_projection() {
        let s = state_2d(vec![0.0, 0.0, 0.0, 100.0], 100.0, vec![(0, 1)]);
        let proj = project(&s, 0, 1).unwrap();
        // p = (x_0 - x_1)/100 = (0, -1).
        assert_eq!(proj.positions(), &[0.0, -100.0]);
        let gap = (proj.positions()[0] - proj.positions()[1]).abs();
        assert_eq!(gap, 100.0);
    }

    #[test]
    fn projection_along_second_axis_reads_off_second_coordinate() {
        // Orient the defining edge so p = (0, 1); the third agent projects
        // to its second coordinate.
        let s = state_2d(
            vec![0.0, 100.0, 0.0, 0.0, 37.5, 81.25],
            100.0,
            vec![(0, 1), (1, 2)],
        );
        let proj = project(&s, 0, 1).unwrap();
        assert_eq!(proj.positions()[2], 81.25);
    }

    #[test]
    fn project_rejects_zero_length_and_inactive_edges() {
        let g = Arc::new(SocialGraph::path(3).unwrap());
        let s = HksState::new(g, 1.0, 1, vec![0.5, 0.5, 9.0]).unwrap();
        assert!(matches!(
            project(&s, 0, 1),
            Err(Error::DegenerateProjection { .. })
        ));
        assert!(matches!(
            project(&s, 1, 2),
            Err(Error::EdgeNotActive { .. })
        ));
        assert!(matches!(project(&s, 0, 2), Err(Error::NoSuchEdge { .. })));
    }

    #[test]
    fn laws_hold_on_one_dimensional_states_exactly() {
        let s = gen_path(5, 100.0).unwrap();
        let laws = check_projection_laws(&s, 2, 3).unwrap();
        assert!(laws.all_hold());
        // Per-agent equality in one dimension.
        let proj = project(&s, 2, 3).unwrap();
        for v in 0..5 {
            assert_eq!(
                proj.hks().movement(v).unwrap()[0].abs(),
                s.movement(v).unwrap()[0].abs()
            );
        }
    }

    #[test]
    fn laws_hold_on_random_three_dimensional_states() {
        let mut rng = Xoshiro256PlusPlus::new(41);
        for _ in 0..50 {
            let n = 6 + rng.uniform_index(6);
            let g = Arc::new(SocialGraph::complete(n).unwrap());
            let pos: Vec<f64> = (0..n * 3).map(|_| rng.uniform_range(0.0, 0.8)).collect();
            let s = HksState::new(g, 1.0, 3, pos).unwrap();
            let Some((u, w, len)) = s.longest_active_edge() else {
                continue;
            };
            if len == 0.0 {
                continue;
            }
            let laws = check_projection_laws(&s, u, w).unwrap();
            assert!(laws.all_hold(), "laws failed: {laws:?}");
        }
    }

    #[test]
    fn laws_hold_on_dumbbell_along_its_longest_edge() {
        let s = crate::instances::gen_dumbbell(16, 100.0, true).unwrap();
        let (u, w, len) = s.longest_active_edge().unwrap();
        assert_eq!(len, 100.0);
        let laws = check_projection_laws(&s, u, w).unwrap();
        assert!(laws.all_hold(), "{laws:?}");
    }

    #[test]
    fn cut_with_no_crossing_edges_is_trivial() {
        let s = gen_path(3, 100.0).unwrap();
        let cut = cut_movement_bound(&s, 1000.0).unwrap();
        assert_eq!(cut.rhs, 0.0);
        assert!(cut.lhs >= 0.0);
    }

    #[test]
    fn two_agent_cut_is_tight() {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let s = HksState::new(g, 100.0, 1, vec![0.0, 100.0]).unwrap();
        let cut = cut_movement_bound(&s, 50.0).unwrap();
        assert_eq!(cut.lhs, 200.0);
        assert_eq!(cut.rhs, 200.0);
    }

    #[test]
    fn ties_at_the_cut_go_left() {
        let g = Arc::new(SocialGraph::path(2).unwrap());
        let s = HksState::new(g, 100.0, 1, vec![50.0, 100.0]).unwrap();
        // Agent at exactly c belongs to the left side, so the edge crosses.
        let cut = cut_movement_bound(&s, 50.0).unwrap();
        assert_eq!(cut.rhs, 100.0);
        // Both at or below c: nothing crosses.
        let cut = cut_movement_bound(&s, 100.0).unwrap();
        assert_eq!(cut.rhs, 0.0);
    }

    #[test]
    fn cut_requires_one_dimension() {
        let s = state_2d(vec![0.0; 4], 1.0, vec![(0, 1)]);
        assert!(matches!(
            cut_movement_bound(&s, 0.0),
            Err(Error::NotOneDimensional { dimension: 2 })
        ));
    }

    #[test]
    fn longest_edge_chain_bounds_hold_on_random_states() {
        let mut rng = Xoshiro256PlusPlus::new(1234);
        for dim in [1usize, 2, 3] {
            for _ in 0..40 {
                let n = 5 + rng.uniform_index(8);
                let g = Arc::new(SocialGraph::complete(n).unwrap());
                let spread = rng.uniform_range(0.3, 1.2) / (dim as f64).sqrt();
                let pos: Vec<f64> = (0..n * dim)
                    .map(|_| rng.uniform_range(0.0, spread))
                    .collect();
                let s = HksState::new(g, 1.0, dim, pos).unwrap();
                let Some(b) = longest_edge_cut_bound(&s).unwrap() else {
                    continue;
                };
                let tol = 1e-9 * (1.0 + b.lhs_original.abs());
                assert!(b.lhs_original >= b.lhs_projected - tol);
                assert!(b.lhs_projected >= b.rhs_cut - tol);
                assert!(b.rhs_cut >= b.two_lambda - tol);
            }
        }
    }

    #[test]
    fn projection_contracts_pairwise_distances() {
        let mut rng = Xoshiro256PlusPlus::new(9);
        let g = Arc::new(SocialGraph::complete(6).unwrap());
        let pos: Vec<f64> = (0..18).map(|_| rng.uniform_range(0.0, 0.9)).collect();
        let s = HksState::new(g, 1.0, 3, pos).unwrap();
        let (u, w, _) = s.longest_active_edge().unwrap();
        let proj = project(&s, u, w).unwrap();
        for a in 0..6 {
            for b in (a + 1)..6 {
                let original = s.distance(a, b).unwrap();
                let projected = (proj.positions()[a] - proj.positions()[b]).abs();
                assert!(projected <= original + 1e-9);
            }
        }
    }
}
