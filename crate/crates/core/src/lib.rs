//! Direct and inverse scattering for the third-order operator
//!
//! ```text
//! L y = i y''' + i (p y)' + i p y' + q y
//! ```
//!
//! on the whole line, with `p`, `q` real and exponentially decaying.
//!
//! The crate builds Jost solutions from their Volterra equations, assembles
//! the transition matrix and scattering data, locates bound states, and
//! recovers the potentials from scattering data by solving singular integral
//! systems on the half-axes.

mod error;

pub mod rootsys;
pub mod numerics;
pub mod potential;
pub mod jost;
pub mod oracle;
pub mod scatter;
pub mod inverse;
pub mod reflectionless;

pub use error::{Error, Result};
pub use num_complex::Complex64;
