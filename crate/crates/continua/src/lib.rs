//! Exact machinery for locally connected plane continua.
//!
//! The crate builds up, in layers, everything needed to turn local
//! connectivity data about a Euclidean continuum into a certified arc
//! parametrization:
//!
//! * [`geometry`]: exact rational points, boxes, dilated regions, and the
//!   squared-distance predicates every other layer decides through.
//! * [`names`]: stream-style names for points, compact sets, and continuous
//!   functions, together with the test continua used as oracles.
//! * [`catalog`]: the canonical dyadic window catalogs that realize compact
//!   set names, and derivation of local connectivity moduli.
//! * [`lebesgue`]: the computable Lebesgue number of an open cover.
//! * [`chains`]: witnessing chains and arc chains of dilated regions, their
//!   validity checks, and the searches that produce them.
//! * [`connectivity`]: conversions between the local connectivity moduli.
//! * [`arcs`]: chain towers, arc parametrization, moduli of continuity, and
//!   endpoint recovery.
//!
//! All set-theoretic decisions are made in exact rational arithmetic; the
//! only floating point in the workspace lives in output formatting.

pub mod arcs;
pub mod catalog;
pub mod chains;
pub mod connectivity;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod lebesgue;
pub mod memo;
pub mod names;

pub use error::{Error, Result};
