//! Particle simulation of inelastic Maxwell kinetic models with an exact
//! empirical optimal-transport engine for measuring Wasserstein distances.
//!
//! Module map:
//!
//! * [`transport`]: exact `W2` between discrete measures, sphere and circle
//!   transport constructions.
//! * [`collision`]: binary collision rules, angular sampling, contraction
//!   constants.
//! * [`ensemble`]: velocity ensembles, initial recipes, snapshots.
//! * [`dynamics`]: stochastic time stepping and paired runs.
//! * [`moments`]: moment observables, Haff's law, the fourth-moment ODE.

pub mod collision;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod moments;
pub mod numeric;
pub mod rng;
pub mod transport;
pub mod vec3;

pub use error::{Error, Result};
