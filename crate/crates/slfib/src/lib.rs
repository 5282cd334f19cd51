//! Numerical laboratory for U(1)-invariant special Lagrangian 3-folds and
//! fibrations of C³.
//!
//! - [`calibration_core`]: flat forms, SL residuals, fiber chart.
//! - [`explicit_models`]: Harvey–Lawson map, `N_a` oracle, fibrations `F`, `F′`.
//! - [`elliptic_engine`]: disc and strip Dirichlet solvers.
//! - [`singularity_lab`]: zeros of `v` on the x-axis, type and multiplicity.
//! - [`fibration_factory`]: the disc and strip families and their discriminants.
//! - [`monodromy_graph`]: integer monodromy matrices and ribbon figure data.
//! - [`cli_toolkit`]: the `slfib` command line.

pub mod calibration_core;
pub mod cli_toolkit;
pub mod elliptic_engine;
pub mod error;
pub mod explicit_models;
pub mod fibration_factory;
pub mod monodromy_graph;
pub mod singularity_lab;

pub use error::{Result, SlError};
