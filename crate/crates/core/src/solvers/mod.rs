//! Steady Stokes solves, the linear backend and IMEX time stepping.

pub mod imex;
pub mod linear;
pub mod stokes;

pub use imex::{
    diagnostics_csv, run_unsteady, Diagnostics, FlowState, ImexConfig, ImexStepper, Scheme, SemiDiscretization,
};
pub use linear::{dense_solve, factorize, linear_solve, Factorization};
pub use stokes::{
    assemble_operators, solve_stokes, stokes_system, SolveStats, StokesOperators, StokesSolution, StokesVariant,
    VectorField,
};
