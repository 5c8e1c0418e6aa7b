//! Sensor-array geometry design by greedy maximization of the mutual information between
//! far-field measurements and a Gaussian Fourier-coefficient scene prior.
//!
//! The pipeline is: build a [`SensingModel`] (prior, candidate grid, noise level), pick sensors
//! with one of the [`optimizer`] solvers, attach certificates from [`bounds`], and evaluate
//! reconstructions with [`bayes`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod bounds;
pub mod error;
mod linalg;
pub mod matroids;
pub mod model;
pub mod objective;
pub mod optimizer;

pub use bayes::{
    mc_mse, posterior, sample_scene, scene_mse, simulate_measurements, stream, synthesize_scene, MseRow, MseTable,
    PosteriorOperator, PosteriorResult, SceneSample,
};
pub use bounds::{
    certify, combined_bound, discretization_bound, truncation_bounds, BoundOutcome, BoundsReport, CombinedBound,
    EpsilonSource,
};
pub use error::{DesignError, Result};
pub use matroids::{partition_from_bins, MatroidKind, MatroidSpec};
pub use model::{build_model, build_prior, kernel_row, sinc, CandidateGrid, PriorSpec, SensingModel, TailMass};
pub use objective::{mutual_information, SelectionState};
pub use optimizer::{
    exhaustive_matroid_opt, exhaustive_opt, greedy, lazy_greedy, matroid_greedy, nemhauser_bound, online_bound,
    online_bound_for, Constraint, Design, Solver,
};
