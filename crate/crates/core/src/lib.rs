//! Toolkit for the heptagon noncontextuality inequalities: exclusivity-graph
//! bounds (exact independence number, Lovász theta SDP), the explicit
//! quantum realizations and their ideal probability tables, photon-count
//! simulation with configurable noise, and the MNCHV epsilon analysis with
//! verdicts against every bound.
//!
//! Data-parallel loops run on rayon by default; build with
//! `--no-default-features` for the sequential fallback. Determinism never
//! depends on the schedule (per-context RNG streams).

pub mod analyze;
pub mod error;
pub mod graph;
pub mod independence;
pub mod jsonio;
pub mod par;
pub mod quantum;
pub mod render;
pub mod rng;
pub mod simulate;
pub mod table;
pub mod theta;

pub use error::{Error, Result};
