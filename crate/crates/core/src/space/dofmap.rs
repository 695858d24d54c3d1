use serde::{Deserialize, Serialize};

use crate::basis::polynomials::triangle_dim;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// The discrete spaces of the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// BDM with the top normal facet mode duplicated per side.
    WRelaxed,
    /// Fully normal-continuous BDM.
    WConf,
    /// Tangential facet unknowns of degree `k - 1`.
    Facet,
    /// Discontinuous scalar polynomials of the given order.
    Pressure,
    /// Discontinuous vector polynomials of the given order.
    Dg,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::WRelaxed => "w_relaxed",
            SpaceKind::WConf => "w_conf",
            SpaceKind::Facet => "facet",
            SpaceKind::Pressure => "pressure",
            SpaceKind::Dg => "dg",
        }
    }

    pub fn is_bdm(self) -> bool {
        matches!(self, SpaceKind::WRelaxed | SpaceKind::WConf)
    }
}

/// Local-to-global map of one discrete space.
///
/// Each element owns a fixed number of local DOFs; local DOF `j` of element `e`
/// is `sign * global`, so a global basis function restricted to an element is a
/// signed sum of local ones. For BDM spaces the local DOFs follow the reference
/// element ordering and facet moments carry the sign `s^{d+1}` of the element's
/// orientation relative to the global facet direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofMap {
    pub kind: SpaceKind,
    /// Velocity order for BDM and facet spaces, polynomial order otherwise.
    pub k: usize,
    pub ndofs: usize,
    pub local_size: usize,
    cell_dofs: Vec<usize>,
    cell_signs: Vec<f64>,
    /// Sorted global DOFs constrained by Dirichlet data.
    pub dirichlet_dofs: Vec<usize>,
    /// Per geometric facet: global indices of the normal moments `0..=k` for BDM
    /// spaces (top mode of side 0), or of the `k` tangential modes for facet spaces.
    pub facet_dofs: Vec<Vec<usize>>,
    /// Per geometric facet for `WRelaxed`: the top-mode index of each linked side.
    pub facet_top: Vec<Vec<usize>>,
    /// Per element: first global index of its interior block (BDM spaces).
    pub element_start: Vec<usize>,
}

pub fn build_dofmap(mesh: &Mesh, kind: SpaceKind, k: usize) -> Result<DofMap> {
    match kind {
        SpaceKind::WRelaxed | SpaceKind::WConf => build_bdm(mesh, kind, k),
        SpaceKind::Facet => build_facet(mesh, k),
        SpaceKind::Pressure | SpaceKind::Dg => {
            let per = triangle_dim(k) * if kind == SpaceKind::Dg { 2 } else { 1 };
            let ne = mesh.num_elements();
            Ok(DofMap {
                kind,
                k,
                ndofs: per * ne,
                local_size: per,
                cell_dofs: (0..per * ne).collect(),
                cell_signs: vec![1.0; per * ne],
                dirichlet_dofs: Vec::new(),
                facet_dofs: vec![Vec::new(); mesh.num_facets()],
                facet_top: vec![Vec::new(); mesh.num_facets()],
                element_start: (0..ne).map(|e| e * per).collect(),
            })
        }
    }
}

fn check_velocity_order(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::UnsupportedOrder {
            k,
            reason: "velocity spaces need k >= 1",
        })
    } else {
        Ok(())
    }
}

#[inline]
fn moment_sign(side_sign: i8, degree: usize) -> f64 {
    if side_sign > 0 || (degree + 1).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn build_bdm(mesh: &Mesh, kind: SpaceKind, k: usize) -> Result<DofMap> {
    check_velocity_order(k)?;
    let relaxed = kind == SpaceKind::WRelaxed;
    let nf = mesh.num_facets();
    let ne = mesh.num_elements();
    let mut next = 0usize;
    let mut facet_dofs = vec![Vec::new(); nf];
    let mut facet_top = vec![Vec::new(); nf];
    let mut dirichlet = Vec::new();
    for f in mesh.dof_facets() {
        let sides = mesh.linked_sides(f);
        let mut ids: Vec<usize> = (next..next + k).collect();
        next += k;
        let tops: Vec<usize> = if relaxed && sides.len() == 2 {
            next += 2;
            vec![next - 2, next - 1]
        } else {
            next += 1;
            vec![next - 1; sides.len()]
        };
        ids.push(tops[0]);
        if mesh.facets[f].tag.is_dirichlet() {
            dirichlet.extend_from_slice(&ids);
        }
        if let Some(s) = mesh.partner(f) {
            facet_dofs[s] = ids.clone();
            facet_top[s] = tops.clone();
        }
        facet_dofs[f] = ids;
        facet_top[f] = tops;
    }
    let interior = (k + 1) * (k + 2) - 3 * (k + 1);
    let element_start: Vec<usize> = (0..ne).map(|e| next + e * interior).collect();
    let ndofs = next + ne * interior;
    let local_size = (k + 1) * (k + 2);
    let mut cell_dofs = vec![0usize; ne * local_size];
    let mut cell_signs = vec![1.0; ne * local_size];
    // top-mode index of each (element, local facet)
    let mut top_of = vec![usize::MAX; ne * 3];
    for f in mesh.dof_facets() {
        for (i, ls) in mesh.linked_sides(f).iter().enumerate() {
            top_of[ls.side.element * 3 + ls.side.local] = facet_top[f][i];
        }
    }
    for e in 0..ne {
        let base = e * local_size;
        for i in 0..3 {
            let f = mesh.element_facets[e][i];
            let side = mesh.facets[f]
                .sides
                .iter()
                .find(|s| s.element == e && s.local == i)
                .expect("incidence");
            for d in 0..=k {
                let j = base + i * (k + 1) + d;
                cell_dofs[j] = if d < k { facet_dofs[f][d] } else { top_of[e * 3 + i] };
                cell_signs[j] = moment_sign(side.sign, d);
            }
        }
        for m in 0..interior {
            cell_dofs[base + 3 * (k + 1) + m] = element_start[e] + m;
        }
    }
    dirichlet.sort_unstable();
    dirichlet.dedup();
    Ok(DofMap {
        kind,
        k,
        ndofs,
        local_size,
        cell_dofs,
        cell_signs,
        dirichlet_dofs: dirichlet,
        facet_dofs,
        facet_top,
        element_start,
    })
}

fn build_facet(mesh: &Mesh, k: usize) -> Result<DofMap> {
    check_velocity_order(k)?;
    let nf = mesh.num_facets();
    let ne = mesh.num_elements();
    let mut facet_dofs = vec![Vec::new(); nf];
    let mut next = 0;
    let mut dirichlet = Vec::new();
    for f in mesh.dof_facets() {
        let ids: Vec<usize> = (next..next + k).collect();
        next += k;
        if mesh.facets[f].tag.is_dirichlet() {
            dirichlet.extend_from_slice(&ids);
        }
        if let Some(s) = mesh.partner(f) {
            facet_dofs[s] = ids.clone();
        }
        facet_dofs[f] = ids;
    }
    let local_size = 3 * k;
    let mut cell_dofs = vec![0usize; ne * local_size];
    let mut cell_signs = vec![1.0; ne * local_size];
    for e in 0..ne {
        for i in 0..3 {
            let f = mesh.element_facets[e][i];
            let side = mesh.facets[f]
                .sides
                .iter()
                .find(|s| s.element == e && s.local == i)
                .expect("incidence");
            for d in 0..k {
                let j = e * local_size + i * k + d;
                cell_dofs[j] = facet_dofs[f][d];
                cell_signs[j] = moment_sign(side.sign, d);
            }
        }
    }
    dirichlet.sort_unstable();
    Ok(DofMap {
        kind: SpaceKind::Facet,
        k,
        ndofs: next,
        local_size,
        cell_dofs,
        cell_signs,
        dirichlet_dofs: dirichlet,
        facet_dofs,
        facet_top: vec![Vec::new(); nf],
        element_start: Vec::new(),
    })
}

impl DofMap {
    #[inline]
    pub fn cell_dofs(&self, e: usize) -> &[usize] {
        &self.cell_dofs[e * self.local_size..(e + 1) * self.local_size]
    }

    #[inline]
    pub fn cell_signs(&self, e: usize) -> &[f64] {
        &self.cell_signs[e * self.local_size..(e + 1) * self.local_size]
    }

    pub fn num_elements(&self) -> usize {
        self.cell_dofs.len() / self.local_size.max(1)
    }

    /// Signed local coefficients of element `e`.
    pub fn local_coeffs(&self, e: usize, global: &[f64]) -> Vec<f64> {
        self.cell_dofs(e)
            .iter()
            .zip(self.cell_signs(e))
            .map(|(&g, &s)| s * global[g])
            .collect()
    }

    /// Adds a local vector into a global one.
    pub fn scatter_add(&self, e: usize, local: &[f64], global: &mut [f64]) {
        for ((&g, &s), &v) in self.cell_dofs(e).iter().zip(self.cell_signs(e)).zip(local) {
            global[g] += s * v;
        }
    }

    pub fn is_dirichlet_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.ndofs];
        for &d in &self.dirichlet_dofs {
            m[d] = true;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_unit_square;

    #[test]
    fn hand_counted_sizes() {
        let m = generate_unit_square(1, false);
        assert_eq!(build_dofmap(&m, SpaceKind::WRelaxed, 2).unwrap().ndofs, 22);
        assert_eq!(build_dofmap(&m, SpaceKind::WConf, 2).unwrap().ndofs, 21);
        assert_eq!(build_dofmap(&m, SpaceKind::Pressure, 1).unwrap().ndofs, 6);
        assert_eq!(build_dofmap(&m, SpaceKind::Facet, 2).unwrap().ndofs, 10);
        assert!(matches!(
            build_dofmap(&m, SpaceKind::WRelaxed, 0),
            Err(Error::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn counts_follow_entity_counts() {
        for periodic in [false, true] {
            let m = generate_unit_square(3, periodic);
            let nf = m.dof_facets().count();
            let interior = m.dof_facets().filter(|&f| m.linked_sides(f).len() == 2).count();
            for k in 1..5 {
                let conf = build_dofmap(&m, SpaceKind::WConf, k).unwrap();
                let rel = build_dofmap(&m, SpaceKind::WRelaxed, k).unwrap();
                let per_el = k * k - 1;
                assert_eq!(conf.ndofs, nf * (k + 1) + m.num_elements() * per_el);
                assert_eq!(rel.ndofs, conf.ndofs + interior);
                // every global dof is used by some element
                let mut used = vec![false; rel.ndofs];
                for e in 0..m.num_elements() {
                    for &g in rel.cell_dofs(e) {
                        used[g] = true;
                    }
                }
                assert!(used.iter().all(|&u| u));
            }
        }
    }

    #[test]
    fn periodic_square_has_no_dirichlet_dofs() {
        let m = generate_unit_square(2, true);
        let w = build_dofmap(&m, SpaceKind::WRelaxed, 3).unwrap();
        assert!(w.dirichlet_dofs.is_empty());
        let m = generate_unit_square(2, false);
        let w = build_dofmap(&m, SpaceKind::WRelaxed, 3).unwrap();
        assert_eq!(w.dirichlet_dofs.len(), 8 * 4);
    }
}
