//! Variational grid generation with a prescribed Jacobian determinant and a
//! prescribed curl.
//!
//! A transformation `T = T* + u` of a uniform 2D grid is driven by a control
//! field `f` through the Poisson problem `Δu = f` with `u = 0` on the
//! boundary. The least-squares mismatch between `(J(T), curl(T))` and the
//! monitor pair `(f0, g0)` is minimized by gradient descent on `f`, using a
//! discretely exact adjoint gradient.
//!
//! Module map:
//!
//! * [`field`]: grid geometry, node-indexed scalar/vector fields, quadrature.
//! * [`diffops`]: central-difference partials, Jacobian determinant, curl, and
//!   the transpose-exact divergence used by the adjoint.
//! * [`poisson`]: fast direct Dirichlet solver for the 5-point Laplacian.
//! * [`objective`]: the objective, residuals, adjoint fields and gradient.
//! * [`optimizer`]: the descent loop and a finite-difference gradient probe.
//! * [`synth`]: synthetic target maps and boundary-matching base maps.
//! * [`metrics`]: distance and cell-angle comparison statistics.
//! * [`gradcheck`]: adjoint gradient vs. finite differences on random problems.
//! * [`io`]: field CSV, history CSV and legacy VTK output.

pub mod diffops;
pub mod error;
pub mod field;
pub mod gradcheck;
pub mod io;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod poisson;
pub mod synth;

pub use error::{Error, Result};
pub use field::{GridSpec, ScalarField, Transformation, VectorField};
pub use metrics::ComparisonReport;
pub use objective::{ControlField, MonitorPair, ObjectiveReport};
pub use optimizer::{DescentOptions, RunResult, StopReason};
pub use poisson::PoissonSolver;
