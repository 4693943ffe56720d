//! Numerical solver and verification suite for prescribing Gaussian curvature
//! in the interior and geodesic curvature on the boundary of a compact
//! surface, by minimizing a mean-field energy over zero-mean fields on
//! intrinsic triangle meshes.
//!
//! The crate is organized along the pipeline:
//!
//! * [`mesh`] — intrinsic triangulations of the three model surfaces
//!   (hemisphere, flat cylinder, hyperbolic pair of pants);
//! * [`ops`] — cotangent stiffness, lumped areas and boundary weights;
//! * [`meanfield`] — the energy, its domain, the normalization constant and
//!   the feasibility logic;
//! * [`minimize`] — domain-guarded limited-memory quasi-Newton descent;
//! * [`analysis`] — residuals, inequality deficits, sharpness sweeps and
//!   perturbation experiments;
//! * [`io`] / [`report`] — CSV/OFF/JSON artifacts.
//!
//! The numerical core is generic over the floating type via [`scalar::Scalar`];
//! the aliases below fix `f64` for ordinary use.

// NaN-aware guards are written as negated comparisons on purpose, and the
// quadrature loops index several aligned nodal arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod fields;
pub mod io;
pub mod meanfield;
pub mod mesh;
pub mod minimize;
pub mod ops;
pub mod parallel;
pub mod report;
pub mod scalar;

pub use scalar::Scalar;

/// `f64` aliases for the main types.
pub type Mesh64 = mesh::IntrinsicMesh<f64>;
pub type Operators64 = ops::OperatorSet<f64>;
pub type Spec64 = meanfield::ProblemSpec<f64>;
pub type State64 = meanfield::MeanFieldState<f64>;
pub type SolverConfig64 = minimize::SolverConfig<f64>;
pub type SolveResult64 = minimize::SolveResult<f64>;
