//! Graph-based semi-supervised classification.
//!
//! Labels on a few nodes of a similarity graph are diffused to the rest by
//! solving `F = αBF + (1-α)Y`, where `B = D^-σ A D^(σ-1)`. Two solvers are
//! provided: a parallel power iteration ([`power`]) and a sequential
//! random-walk stochastic approximation ([`sampling`]) that only needs local
//! graph information at each step and can follow a changing graph.

pub mod cli;
pub mod datasets;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod power;
pub mod sampling;

pub use error::{Error, Result};
pub use graph::{FeatureMatrix, LabelAssignment, LabeledGraph, NodeId, SimilarityGraph};
pub use metrics::{classify, error_against, ErrorSummary, TrajectoryRecord, TrajectoryRow};
pub use operators::{
    alpha_from_mu, closed_form_solve, objective, perron_weights, weighted_norm, DiffusionOperator,
    WalkKernel,
};
pub use power::{power_solve, power_step, PowerSolveReport};
pub use sampling::{
    run_sampling, sampling_update, track_new_node, SamplingSolver, SelectionPolicy, SolverConfig,
    StepSchedule, UpdateRule,
};
