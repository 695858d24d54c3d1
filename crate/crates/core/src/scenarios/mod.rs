//! Drivers for the numerical studies, shared by the command line and the test suites.

pub mod steady;
pub mod unsteady;

pub use steady::{
    divergence_check, gradient_response, infsup_study, kovasznay_study, manufactured_study, steady_case,
    DivergenceCheck, GradientResponse, RefinementStudy, SteadyCase,
};
pub use unsteady::{
    cylinder_run, default_channel_mesh, lattice_run, CylinderReport, LatticeReport, UnsteadySettings,
    CHANNEL_H_TARGET,
};
