//! Assembly of the bilinear, trilinear and load forms.

mod convection;
mod forms;
mod rhs;
pub mod sparse;
mod system;

use std::sync::Arc;

pub use convection::{
    apply_convection, convection_local, max_top_mode_jump, BoundaryData, ConvectionOptions, NORMAL_JUMP_TOL,
};
pub use forms::{
    assemble_divergence, assemble_mass, assemble_norm_gram, assemble_viscosity, facet_jump_modes,
    mean_pressure_vector,
};
pub use rhs::{assemble_rhs, assemble_rhs_plain, element_loads, RhsFunctional, RhsVariant};
pub use sparse::{CsrMatrix, TripletBuilder};
pub use system::{Dirichlet, SparseSystem};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::space::{build_dofmap, dirichlet_values, DofMap, SpaceKind};

/// Default penalty parameter multiplying `k^2 / h`.
pub const DEFAULT_LAMBDA: f64 = 4.0;

/// Velocity, facet and pressure spaces on one mesh.
///
/// Composite velocity vectors store the element (BDM) part first and the facet
/// part after it: `[u_W (nw) | u_F (nf)]`.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    pub k: usize,
    pub w: Arc<DofMap>,
    pub facet: Arc<DofMap>,
    pub pressure: Arc<DofMap>,
    neighbors: Vec<[Option<(usize, usize)>; 3]>,
}

impl Discretization {
    /// `kind` selects the relaxed or the fully conforming element velocity space.
    pub fn new(mesh: Arc<Mesh>, k: usize, kind: SpaceKind) -> Result<Self> {
        if !kind.is_bdm() {
            return Err(Error::Config(format!("{} is not a velocity space", kind.name())));
        }
        let w = Arc::new(build_dofmap(&mesh, kind, k)?);
        let facet = Arc::new(build_dofmap(&mesh, SpaceKind::Facet, k)?);
        let pressure = Arc::new(build_dofmap(&mesh, SpaceKind::Pressure, k - 1)?);
        let neighbors = neighbor_table(&mesh);
        Ok(Discretization {
            mesh,
            k,
            w,
            facet,
            pressure,
            neighbors,
        })
    }

    pub fn nw(&self) -> usize {
        self.w.ndofs
    }

    pub fn nf(&self) -> usize {
        self.facet.ndofs
    }

    /// Size of the composite velocity vector.
    pub fn nv(&self) -> usize {
        self.nw() + self.nf()
    }

    pub fn np(&self) -> usize {
        self.pressure.ndofs
    }

    /// Local velocity size: BDM functions followed by the `3k` facet modes.
    pub fn local_velocity_size(&self) -> usize {
        self.w.local_size + self.facet.local_size
    }

    /// Composite global indices and signs of the local velocity functions of element `e`.
    pub fn velocity_dofs(&self, e: usize) -> (Vec<usize>, Vec<f64>) {
        let nw = self.nw();
        let mut idx: Vec<usize> = self.w.cell_dofs(e).to_vec();
        let mut sgn: Vec<f64> = self.w.cell_signs(e).to_vec();
        idx.extend(self.facet.cell_dofs(e).iter().map(|&g| g + nw));
        sgn.extend_from_slice(self.facet.cell_signs(e));
        (idx, sgn)
    }

    /// Element neighbor across local facet `i` (following periodic links) and its local facet.
    pub fn neighbor(&self, e: usize, i: usize) -> Option<(usize, usize)> {
        self.neighbors[e][i]
    }

    /// Composite Dirichlet data: sorted `(index, value)` for boundary data `g`.
    pub fn dirichlet(&self, g: &dyn Fn([f64; 2]) -> [f64; 2]) -> Dirichlet {
        let nw = self.nw();
        let mut values = dirichlet_values(&self.mesh, &self.w, g);
        values.extend(
            dirichlet_values(&self.mesh, &self.facet, g)
                .into_iter()
                .map(|(i, v)| (i + nw, v)),
        );
        Dirichlet::new(self.nv(), values)
    }

    /// Homogeneous data on the same constrained set.
    pub fn dirichlet_zero(&self) -> Dirichlet {
        self.dirichlet(&|_| [0.0, 0.0])
    }

    /// Per-element signed local BDM coefficients of the element part of `u` (composite or W-sized).
    pub fn local_w(&self, u: &[f64]) -> Vec<Vec<f64>> {
        (0..self.mesh.num_elements()).map(|e| self.w.local_coeffs(e, &u[..self.nw()])).collect()
    }
}

fn neighbor_table(mesh: &Mesh) -> Vec<[Option<(usize, usize)>; 3]> {
    let mut out = vec![[None; 3]; mesh.num_elements()];
    for f in mesh.dof_facets() {
        let sides = mesh.linked_sides(f);
        if sides.len() == 2 {
            let (a, b) = (sides[0].side, sides[1].side);
            out[a.element][a.local] = Some((b.element, b.local));
            out[b.element][b.local] = Some((a.element, a.local));
        }
    }
    out
}

/// Local facet geometry of an element: length, outward normal, unit tangent in
/// the local direction.
#[derive(Debug, Clone, Copy)]
pub struct LocalFacet {
    pub length: f64,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
}

pub fn local_facet(mesh: &Mesh, e: usize, i: usize) -> LocalFacet {
    let el = mesh.elements[e];
    let p = mesh.vertices[el[(i + 1) % 3]];
    let q = mesh.vertices[el[(i + 2) % 3]];
    let d = [q[0] - p[0], q[1] - p[1]];
    let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let tangent = [d[0] / length, d[1] / length];
    LocalFacet {
        length,
        normal: [tangent[1], -tangent[0]],
        tangent,
    }
}
