//! Projection onto the SOS cone, nonnegativity on intervals, and linearly
//! constrained SOS feasibility.

pub mod interval;
pub mod projection;
pub mod sosopt;

pub use interval::{interval_certify, IntervalBlock, IntervalCertificate, IntervalObjective, IntervalSpec, MAX_INTERVAL_DEGREE};
pub use projection::{project_sos, project_sos_with, random_sos_samples, Projection, VariationalReport, VARIATIONAL_SAMPLES, VARIATIONAL_TOL};
pub use sosopt::{sosopt_feasible, LinearCoeffMap, SosOptProblem, SosOptResult, FEASIBILITY_TOL};
