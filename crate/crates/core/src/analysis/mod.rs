//! Error norms, stability constants, force functionals and convergence tables.

pub mod convergence;
pub mod diagnostics;
pub mod drag;
pub mod errors;
pub mod infsup;

pub use convergence::{convergence_rows, errors_csv, fit_h_rate, fit_k_decay, render_table, ConvergenceRow};
pub use diagnostics::{div_max, kinetic_energy, l2_norm_sq, normal_jump_max};
pub use drag::{drag_lift, surface_force, surface_sides, ForceSurface, CYLINDER_SURFACE};
pub use errors::{compute_errors, jump_seminorm_sq, pressure_error, velocity_errors, ErrorReport, ExactFlow, ERROR_OVERQUAD};
pub use infsup::{estimate_infsup, InfSupReport};
