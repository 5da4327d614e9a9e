//! Solver library and verification harness for the Dirichlet problem
//!
//! ```text
//! -div(Du/|Du|) + |Du| = f   in Omega,     u = 0 on the boundary,
//! ```
//!
//! with nonnegative data, on balls B_R(0) (any dimension N >= 2, reduced to
//! a radial two-point problem) and on masked uniform 2D grids.
//!
//! The crate has three layers:
//!
//! * closed-form radial solutions and their calibration fields for
//!   power-law data ([`exact`]), which act as the oracle for everything
//!   else;
//! * exact discrete counterparts of the continuum total-variation
//!   machinery — coarea, pairing slicing, Green's formula ([`pairing`]) —
//!   holding to machine precision by construction;
//! * an epsilon-regularized solver with continuation ([`solver`]) and
//!   experiment procedures confronting it with the oracle and with the
//!   comparison/regularity statements ([`verify`]).

pub mod datum;
pub mod dd;
pub mod error;
pub mod exact;
pub mod field;
pub mod mesh;
pub mod norms;
pub mod pairing;
pub mod solver;
pub mod verify;

pub use datum::{evaluate_datum, DatumSpec};
pub use error::{Error, Result};
pub use exact::{build_exact, threshold_radius, ExactCase, ExactRadialSolution, PointValue};
pub use field::{Mesh, ScalarField, VectorData, VectorField};
pub use mesh::{unit_sphere_area, CartesianGrid, RadialMesh};
pub use norms::{lp_norm, tail, truncate};
pub use solver::{
    extract_vector_field, nonlinear_residual, picard_step, solve, SolutionReport, SolverConfig,
};
