//! Binary Boolean VCSP fitness landscapes and the gadget-chain family on
//! which steepest ascent takes exponentially many steps.
//!
//! An [`Instance`] is a pseudo-Boolean polynomial of degree at most two over
//! `n` binary variables. The [`generator`] builds the chain family, the
//! [`landscape`] module analyses sign dependence and brute-forces small
//! landscapes, [`structure`] covers constraint graphs and path
//! decompositions, and [`search`] runs local-search update rules.
//!
//! ```
//! use vcsp_landscape::{build_chain, steepest_ascent, Assignment, FamilyParams, Sign, TiePolicy};
//!
//! let params = FamilyParams::new(3, 3, Sign::Plus).unwrap();
//! let chain = build_chain(params).unwrap();
//! let trace = steepest_ascent(&chain, &Assignment::zeros(18), TiePolicy::Error).unwrap();
//! assert_eq!(trace.len(), 49);
//! ```

pub mod assignment;
pub mod cli;
pub mod error;
pub mod format;
pub mod generator;
pub mod instance;
pub mod landscape;
pub mod search;
pub mod structure;

pub use assignment::Assignment;
pub use error::{Error, Result};
pub use format::{instance_hash, parse_instance, write_instance};
pub use generator::{
    build_chain, canonical_decomposition, expected_peak, gadget_weights, predicted_ascent_length,
    validate_chain, FamilyParams, Sign,
};
pub use instance::{BitOrder, ConstraintTable, Instance, Label, Move};
pub use landscape::{
    ascent_graph, check_semismooth, enumerate_peaks, orient, sign_depends, Orientation, Semismoothness,
    Verdict,
};
pub use search::{
    first_improvement_ascent, random_ascent, run_trials, steepest_ascent, AscentOptions, AscentSummary,
    Method, Step, StepObserver, TiePolicy, Trace,
};
pub use structure::{constraint_graph, validate_path_decomposition, ConstraintGraph, PathDecomposition};
