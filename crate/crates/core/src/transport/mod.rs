//! Forward transport solvers: the frozen-coefficient linear solve, the
//! nonlinear mean-field fixed point, the exact collimated ray solve, the
//! albedo trace, and the small-amplitude expansion terms.

mod expansion;
mod field;
pub(crate) mod kernel;
mod linear;
mod nonlinear;
mod riccati;
mod trace;

pub use expansion::{expansion_terms, ExpansionOutput};
pub use field::RadianceField;
pub use kernel::Discretization;
pub use linear::{apply_ballistic, apply_scattering, solve_linear, LinearOutput};
pub use nonlinear::{solve_nonlinear, NonlinearDiagnostics, NonlinearOutput, SolveSettings};
pub use riccati::{solve_riccati_ray, RayProfile};
pub use trace::{albedo, trace_at, trace_field, BoundaryTrace};
