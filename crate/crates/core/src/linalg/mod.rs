//! Direct solvers for the trace-constrained steady-state systems.

mod block_lu;
mod dense_lu;
mod refine;

pub use block_lu::BlockLu;
pub use dense_lu::{dense_solve, DenseLu};
pub use refine::{refine, residual};

/// Pivots below this fraction of the largest matrix entry count as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-13;
