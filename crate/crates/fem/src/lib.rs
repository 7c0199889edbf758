//! P1 finite elements for Laplace eigenproblems with alternating boundary conditions.
//!
//! Everything here works in `f64`; the generic scalar layer lives in `freqbc-core`.

pub mod assembly;
pub mod asymptotics;
pub mod eigen;
pub mod homogenized;
pub mod mesh;
pub mod sparse;
pub mod trace;

pub use assembly::{assemble, OperatorSet};
pub use eigen::{solve_eigs, solve_eigs_with, SolveOptions, Spectrum};
pub use homogenized::{disk_oracle, solve_limit, weighted_orthogonalize, LimitKind};
pub use mesh::{BoundaryEdge, BoundaryNode, EdgeParam, Mesh, MeshError, MeshOptions, PatchOptions, PatchTarget, Tag};
pub use sparse::Csr;
pub use trace::{boundary_trace_integral, normal_derivative_integral};
