//! Magnon blockade in a driven two-magnon/qubit system.
//!
//! The driven magnon's equal-time correlation `g²(0)` is obtained two ways:
//! numerically from the Lindblad steady state ([`lindblad`]) and in closed
//! form from a nine-state weak-drive truncation ([`analytic`]). The
//! [`experiments`] layer sweeps either over parameter grids.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod optimize;
pub mod sparse;

pub use error::{Error, Result};
pub use exec::ExecutionMode;
pub use hilbert::{EffectiveParams, FullModelParams, HilbertSpace};
