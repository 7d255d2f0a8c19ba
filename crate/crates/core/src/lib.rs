//! Constraint propagation as chaotic iteration of reduction functions over
//! compound domains.
//!
//! [`iterate`] holds the generic worklist engines. [`arc`], [`path`] and
//! [`directional`] instantiate them for CSPs from [`csp`]. [`oracle`] has the
//! brute-force references the engines are tested against.

pub mod arc;
pub mod bundled;
pub mod csp;
pub mod directional;
pub mod error;
pub mod format;
pub mod generate;
pub mod iterate;
pub mod oracle;
pub mod order;
pub mod path;

pub use error::{Error, Result};
