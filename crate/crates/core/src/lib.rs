//! Growth models under geometric catastrophes with post-catastrophe dispersion.
//!
//! A colony grows by one individual at rate `lambda` and is struck by a
//! geometric catastrophe at rate 1: individuals are removed one at a time,
//! each removal continuing with probability `1 - p`, until one individual
//! survives the strike or the colony is empty. Survivors either stay put
//! (no dispersion) or move to the `d` child vertices of a rooted tree, where
//! each occupied child becomes a new colony of size one. The three dispersal
//! rules are optimal, independent and uniform.
//!
//! The crate has two layers that check each other:
//!
//! * [`analytic`] and [`phase`]: closed-form extinction probabilities,
//!   survival conditions, critical curves and strategy-dominance regions,
//!   backed by an exact offspring-law assembly in [`distributions`] and a
//!   generic smallest-fixed-point solver.
//! * [`simulator`]: Monte Carlo estimates built only from the sampling
//!   mechanics of the model, reproducible for a fixed seed under any
//!   thread count.
//!
//! [`cli`] holds the command implementations behind the `catlab` binary.

pub mod analytic;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod model;
pub mod output;
pub mod phase;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{Degree, DispersionScheme, ExtinctionResult, Method, ModelParams, OffspringPmf, SurvivorLaw};
