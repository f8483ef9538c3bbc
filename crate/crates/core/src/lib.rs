//! Distributionally robust chance constrained programs over type-1 Wasserstein
//! balls centred at an empirical distribution.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`] problem data, validation and the JSON problem format;
//! - [`geometry`] dual norms and closed-form distances to halfspaces;
//! - [`oracle`] worst-case probabilities, partial sums and feasibility tests;
//! - [`reform`] solver-agnostic mixed-integer and linear models;
//! - [`solve`] dense simplex, branch-and-bound and model export;
//! - [`methods`] end-to-end solution pipelines (exact, CVaR, Bonferroni, classical);
//! - [`experiments`] seeded generators and the reproducible studies.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod methods;
pub mod model;
pub mod oracle;
pub mod reform;
pub mod solve;

pub use error::{Error, Result};
pub use geometry::Halfspace;
pub use methods::{Method, MethodOptions, Solution};
pub use model::{
    Bounds, ChanceProgram, IndividualSafety, JointRhsSafety, JointRow, Norm, Polytope, Safety, TrainingSet,
    WassersteinBall,
};
pub use oracle::{ChanceCheck, DistanceProfile, WorstCaseDistribution};
pub use reform::{MipModel, RowRole, Sense, VarKind, VarRole};
pub use solve::{SolveOptions, SolveResult, Status};
