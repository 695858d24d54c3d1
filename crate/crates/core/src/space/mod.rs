//! Discrete spaces, DOF maps and finite element functions.

pub mod dofmap;
pub mod function;
pub mod projection;
pub mod snapshot;
pub mod tables;

pub use dofmap::{build_dofmap, DofMap, SpaceKind};
pub use function::{
    dirichlet_values, evaluate, interpolate_bdm, interpolate_facet, Evaluation, FeFunction, Query,
};
pub use projection::{project, project_facet, project_scalar};
pub use snapshot::{load_snapshot, save_snapshot};
pub use tables::{element_tables, ElementTables};
