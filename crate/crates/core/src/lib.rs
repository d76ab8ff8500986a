//! Dynamic ADMM for time-varying convex problems of the form
//! `min f_k(x) + g_k(z)  s.t.  Ax + Bz = c`, tracked with one ADMM pass per
//! time step, plus an offline oracle and the analysis metrics used to audit
//! the tracking error.

pub mod error;
pub mod experiment;
pub mod lasso;
pub mod metrics;
pub mod numerics;
pub mod oracle;
pub mod problem;
pub mod sharing;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use numerics::{Matrix, Vector};
pub use problem::{FunctionSpec, ProblemInstance};
pub use solver::{AdmmState, SolverConfig, Tracker};
