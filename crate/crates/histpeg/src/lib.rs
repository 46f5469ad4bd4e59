//! Complex-valued peg calculus for quantum history propositions.
//!
//! A *peg* is a generalized probability: a complex number attached to a
//! multi-time proposition, additive on disjoint propositions, normalized on
//! the always-true proposition, and conjugated under temporal reversal.
//! This crate builds the whole calculus at desk scale:
//!
//! - [`hilbert`]: dense complex linear algebra (tensor products, partial
//!   traces, seeded random ensembles);
//! - [`hpo`]: history propositions as projectors on the tensor-power
//!   space, lattice connectives, and the reversal and cyclic-shift
//!   permutation operators;
//! - [`peg`]: class operators, peg evaluation, trace identities, and the
//!   absorbed-state operators that put pegs in trace form;
//! - [`gleason`]: reconstruction of the absorbed operator from a
//!   black-box additive assignment, and its split into a pair of density
//!   operators;
//! - [`entropy`]: complex Shannon entropy with logarithm-branch tracking;
//! - [`order`]: partial orders on the complex plane and monotonicity
//!   audits;
//! - [`compare`]: decoherence functional, linear positivity, consistency
//!   and classical reduction;
//! - [`scenario`], [`report`], [`suite`]: file ingestion, machine-readable
//!   reports, and the composed property battery behind the CLI.

pub mod compare;
pub mod entropy;
pub mod error;
pub mod gleason;
pub mod hilbert;
pub mod hpo;
pub mod order;
pub mod peg;
pub mod report;
pub mod scenario;
pub mod suite;

pub use error::{Error, Result};
pub use hilbert::{CMatrix, CVector, SubsystemDims};
pub use hpo::{Dynamics, HistoryProjector, HomogeneousHistory};
pub use peg::{GleasonOperator, Scenario};

pub use num_complex::Complex64;

