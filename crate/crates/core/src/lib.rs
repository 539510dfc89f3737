//! Hitting times, cut-off and escape diagnostics for nearest-neighbour
//! random walks on finite rooted trees.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod chain;
pub mod chainfile;
pub mod cli;
pub mod corpus;
pub mod drift;
pub mod exec;
pub mod hitting;
pub mod numeric;
pub mod oracle;
pub mod regular;
pub mod sim;
pub mod stats;
pub mod tree;
pub mod verify;

pub use chain::{validate, ChainSpec, StationaryMeasure, ValidationReport};
pub use drift::{drift_report, family_verdict, DriftReport, FamilyVerdict, Verdict};
pub use exec::Execution;
pub use hitting::{HittingTimes, MomentReport};
pub use numeric::Magnitude;
pub use oracle::{solve_hitting, LinearHittingSolution};
pub use tree::{NodeId, Tree, ROOT};
