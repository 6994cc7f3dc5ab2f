//! Mobility-aid specific sidewalk accessibility.
//!
//! The pipeline runs survey responses through [`analysis`] into per-group
//! confidence-not-passable values, turns those into [`profiles`], builds a
//! labeled [`graph`] from sidewalk geometry, and uses both for [`scoring`]
//! and personalized [`routing`]. [`service`] exposes the result over HTTP.

pub mod analysis;
pub mod error;
pub mod geo;
pub mod graph;
pub mod pipeline;
pub mod profiles;
pub mod routing;
pub mod scoring;
pub mod service;
pub mod survey;

pub use error::{Error, Result};
