//! Brown measure of `y₀ + σ̃_{s−t/2} + i·σ_{t/2}`: a self-adjoint element with
//! law ν plus a freely independent elliptic element.
//!
//! The crate computes the domain boundary and the (vertically constant) density
//! of the Brown measure for an arbitrary compactly supported ν, the two
//! push-forward maps relating it to the circular case and to the free
//! convolution `ν ⊞ semicircle(s)`, large-`s` asymptotic checks, and a random
//! matrix harness that compares eigenvalue clouds against the computed measure.

pub mod asymptotics;
pub mod biane;
pub mod cli;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod measure;
pub mod pushforward;
pub mod rmt;
pub mod roots;
pub mod stats;

pub use biane::BianeData;
pub use config::Config;
pub use elliptic::{build_field, BrownDensityField, EllipticParams};
pub use error::{Error, Result};
pub use measure::Law;
