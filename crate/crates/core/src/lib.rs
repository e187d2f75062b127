//! Asynchronous Hegselmann-Krause opinion dynamics on social networks.
//!
//! Agents hold opinions in `R^d` and are connected by a static social
//! network. One uniformly random agent activates per step and adopts the
//! mean opinion of its influencing neighborhood: itself plus every graph
//! neighbor within the confidence bound `epsilon`. The crate provides
//!
//! * the state representation with incremental influence-network
//!   maintenance ([`HksState`]),
//! * the edge-capped quadratic potential and its per-activation drop bounds
//!   (module [`mod@potential`]),
//! * projection to one dimension along an edge and cut-movement bounds
//!   (module [`projection`]),
//! * instance generators and file round-tripping (module [`instances`]),
//! * a deterministic random-activation runner (module [`runner`]),
//! * a parallel Monte-Carlo sweep engine with CSV export and power-law
//!   fitting (module [`experiments`]),
//! * seeded verification suites for the analytical guarantees
//!   (module [`verify`]).

pub mod error;
pub mod experiments;
pub mod fuzz;
pub mod graph;
pub mod instances;
pub mod potential;
pub mod projection;
pub mod rng;
pub mod runner;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use experiments::{
    export_csv, export_csv_path, fit_scaling_exponent, import_csv, run_sweep, trial_seed,
    CellSummary, ScalingFit, SweepConfig, SweepResult, TrialRow,
};
pub use graph::{AdjEntry, SocialGraph};
pub use instances::{
    gen_complete_random, gen_dumbbell, gen_path, load_instance, save_instance, InstanceSpec,
    Topology,
};
pub use potential::{
    check_drop_equality, drop_lower_bound, expected_drop, expected_drop_floor, potential,
    potential_report, DropCheck, PotentialReport,
};
pub use projection::{
    check_projection_laws, cut_movement_bound, longest_edge_cut_bound, project, CutMovementBound,
    ProjectedState, ProjectionLaws,
};
pub use runner::{first_move_times, run_until_stable, ConvergenceReport, RunConfig};
pub use state::{HksState, InfluenceSummary, MoveRecord, DEFAULT_INFLUENCE_TOLERANCE};
