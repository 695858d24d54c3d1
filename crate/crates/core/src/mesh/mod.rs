//! Triangle meshes with facet connectivity, boundary tags and periodic pairing.

mod affine;
mod generate;
mod io;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use affine::{affine_map, AffineMap};
pub use generate::{
    generate_channel_cylinder, generate_rectangle, generate_unit_square,
    kovasznay_mesh, CYLINDER_CENTER, CYLINDER_RADIUS,
};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};

use crate::error::{Error, Result};

/// Boundary condition class of a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Inflow,
    Outflow,
    Wall,
    PeriodicMaster,
    PeriodicSlave,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Interior => "interior",
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::Wall => "wall",
            BoundaryTag::PeriodicMaster => "periodic_master",
            BoundaryTag::PeriodicSlave => "periodic_slave",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "interior" => BoundaryTag::Interior,
            "dirichlet" => BoundaryTag::Dirichlet,
            "inflow" => BoundaryTag::Inflow,
            "outflow" => BoundaryTag::Outflow,
            "wall" => BoundaryTag::Wall,
            "periodic_master" => BoundaryTag::PeriodicMaster,
            "periodic_slave" => BoundaryTag::PeriodicSlave,
            _ => return None,
        })
    }

    /// Velocity is prescribed on this facet.
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BoundaryTag::Dirichlet | BoundaryTag::Inflow | BoundaryTag::Wall)
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One element adjacent to a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetSide {
    pub element: usize,
    /// Local facet index inside the element.
    pub local: usize,
    /// `+1` if the element traverses the facet in its global direction, `-1` otherwise.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Oriented endpoints; the global tangent points from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    /// One side for exterior facets, two for interior ones.
    pub sides: Vec<FacetSide>,
    pub tag: BoundaryTag,
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        self.sides.len() == 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub elements: Vec<[usize; 3]>,
    pub facets: Vec<Facet>,
    /// `element_facets[e][i]` is the facet opposite local vertex `i`.
    pub element_facets: Vec<[usize; 3]>,
    /// `(master, slave)` facet pairs.
    pub periodic_pairs: Vec<(usize, usize)>,
    /// Element diameters.
    pub h_local: Vec<f64>,
    partner: Vec<Option<usize>>,
}

/// Both element sides of a facet after periodic identification.
#[derive(Debug, Clone, Copy)]
pub struct LinkedSide {
    /// Geometric facet the element actually touches.
    pub facet: usize,
    pub side: FacetSide,
}

/// Canonical facet list: first appearance over elements and their local facets.
pub(crate) fn enumerate_facets(elements: &[[usize; 3]]) -> (Vec<[usize; 2]>, HashMap<[usize; 2], usize>) {
    let mut list = Vec::new();
    let mut index = HashMap::new();
    for el in elements {
        for i in 0..3 {
            let a = el[(i + 1) % 3];
            let b = el[(i + 2) % 3];
            let key = [a.min(b), a.max(b)];
            index.entry(key).or_insert_with(|| {
                list.push(key);
                list.len() - 1
            });
        }
    }
    (list, index)
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl Mesh {
    /// Builds the topology and validates all invariants.
    ///
    /// `boundary` tags exterior facets by their endpoints; untagged exterior facets
    /// become Dirichlet. `periodic` pairs canonical facet indices `(master, slave)`.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary: &[(usize, usize, BoundaryTag)],
        periodic: &[(usize, usize)],
    ) -> Result<Mesh> {
        let nv = vertices.len();
        for (e, el) in elements.iter().enumerate() {
            if el.iter().any(|&v| v >= nv) {
                return Err(Error::Topology(format!("element {e} references a missing vertex")));
            }
            if el[0] == el[1] || el[1] == el[2] || el[0] == el[2] {
                return Err(Error::Topology(format!("element {e} is degenerate")));
            }
            let area = signed_area(vertices[el[0]], vertices[el[1]], vertices[el[2]]);
            if !(area > 0.0) {
                return Err(Error::Topology(format!(
                    "element {e} is not counterclockwise (signed area {area:e})"
                )));
            }
        }
        let (list, index) = enumerate_facets(&elements);
        let mut facets: Vec<Facet> = list
            .iter()
            .map(|&v| Facet {
                vertices: v,
                sides: Vec::with_capacity(2),
                tag: BoundaryTag::Interior,
            })
            .collect();
        let mut element_facets = vec![[0usize; 3]; elements.len()];
        for (e, el) in elements.iter().enumerate() {
            for i in 0..3 {
                let a = el[(i + 1) % 3];
                let b = el[(i + 2) % 3];
                let f = index[&[a.min(b), a.max(b)]];
                element_facets[e][i] = f;
                if facets[f].sides.len() == 2 {
                    return Err(Error::Topology(format!("facet {a}-{b} has more than two elements")));
                }
                facets[f].sides.push(FacetSide {
                    element: e,
                    local: i,
                    sign: 0,
                });
            }
        }
        for f in &facets {
            if f.sides.len() == 2 && f.sides[0].element == f.sides[1].element {
                return Err(Error::Topology("element adjacent to itself".into()));
            }
        }
        // boundary tags
        for &(a, b, tag) in boundary {
            let f = *index
                .get(&[a.min(b), a.max(b)])
                .ok_or_else(|| Error::Topology(format!("boundary facet {a}-{b} is not a mesh facet")))?;
            if facets[f].is_interior() {
                return Err(Error::Topology(format!("boundary facet {a}-{b} is interior")));
            }
            if matches!(tag, BoundaryTag::Interior | BoundaryTag::PeriodicMaster | BoundaryTag::PeriodicSlave) {
                return Err(Error::Topology(format!("tag {tag} is not a boundary condition")));
            }
            facets[f].tag = tag;
        }
        for f in facets.iter_mut() {
            if !f.is_interior() && f.tag == BoundaryTag::Interior {
                f.tag = BoundaryTag::Dirichlet;
            }
        }
        // periodic identification
        let mut partner = vec![None; facets.len()];
        for &(m, s) in periodic {
            if m >= facets.len() || s >= facets.len() || m == s {
                return Err(Error::Topology(format!("invalid periodic pair {m} {s}")));
            }
            if facets[m].is_interior() || facets[s].is_interior() {
                return Err(Error::Topology(format!("periodic pair {m} {s} is not on the boundary")));
            }
            if partner[m].is_some() || partner[s].is_some() {
                return Err(Error::Topology(format!("facet in periodic pair {m} {s} paired twice")));
            }
            let [a, b] = facets[m].vertices;
            let [c, d] = facets[s].vertices;
            let (pa, pb, pc, pd) = (vertices[a], vertices[b], vertices[c], vertices[d]);
            let lm = dist(pa, pb);
            let ls = dist(pc, pd);
            if (lm - ls).abs() > 1e-12 * lm.max(ls) {
                return Err(Error::Topology(format!("periodic facets {m} and {s} differ in length")));
            }
            let tol = 1e-10 * lm.max(1.0);
            let same = |p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]| {
                ((q[0] - p[0]) - (s[0] - r[0])).abs() < tol && ((q[1] - p[1]) - (s[1] - r[1])).abs() < tol
            };
            // the slave takes the translated direction of the master
            if same(pa, pc, pb, pd) {
                facets[s].vertices = [c, d];
            } else if same(pa, pd, pb, pc) {
                facets[s].vertices = [d, c];
            } else {
                return Err(Error::Topology(format!(
                    "periodic facets {m} and {s} are not related by a translation"
                )));
            }
            facets[m].tag = BoundaryTag::PeriodicMaster;
            facets[s].tag = BoundaryTag::PeriodicSlave;
            partner[m] = Some(s);
            partner[s] = Some(m);
        }
        for f in facets.iter_mut() {
            for side in f.sides.iter_mut() {
                let el = elements[side.element];
                let start = el[(side.local + 1) % 3];
                side.sign = if start == f.vertices[0] { 1 } else { -1 };
            }
        }
        let h_local = elements
            .iter()
            .map(|el| {
                let p = [vertices[el[0]], vertices[el[1]], vertices[el[2]]];
                dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
            })
            .collect();
        Ok(Mesh {
            vertices,
            elements,
            facets,
            element_facets,
            periodic_pairs: periodic.to_vec(),
            h_local,
            partner,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_vertices(&self, e: usize) -> [[f64; 2]; 3] {
        let el = self.elements[e];
        [self.vertices[el[0]], self.vertices[el[1]], self.vertices[el[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.element_vertices(e);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.element_area(e)).sum()
    }

    pub fn facet_length(&self, f: usize) -> f64 {
        let [a, b] = self.facets[f].vertices;
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn facet_midpoint(&self, f: usize) -> [f64; 2] {
        let [a, b] = self.facets[f].vertices;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Unit tangent in the global facet direction.
    pub fn facet_tangent(&self, f: usize) -> [f64; 2] {
        let [a, b] = self.facets[f].vertices;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let l = dist(p, q);
        [(q[0] - p[0]) / l, (q[1] - p[1]) / l]
    }

    /// Unit normal of the global facet direction (tangent rotated clockwise).
    pub fn facet_normal(&self, f: usize) -> [f64; 2] {
        let t = self.facet_tangent(f);
        [t[1], -t[0]]
    }

    /// Outward unit normal of element `e` on its local facet `i`.
    pub fn outward_normal(&self, e: usize, i: usize) -> [f64; 2] {
        let el = self.elements[e];
        let p = self.vertices[el[(i + 1) % 3]];
        let q = self.vertices[el[(i + 2) % 3]];
        let l = dist(p, q);
        [(q[1] - p[1]) / l, -(q[0] - p[0]) / l]
    }

    /// Periodic partner of a facet.
    pub fn partner(&self, f: usize) -> Option<usize> {
        self.partner[f]
    }

    /// Representative of a facet under periodic identification (the master).
    pub fn representative(&self, f: usize) -> usize {
        match (self.facets[f].tag, self.partner[f]) {
            (BoundaryTag::PeriodicSlave, Some(m)) => m,
            _ => f,
        }
    }

    /// Element sides of a facet, following periodic identification.
    ///
    /// For a periodic pair the master side comes first.
    pub fn linked_sides(&self, f: usize) -> Vec<LinkedSide> {
        let r = self.representative(f);
        let mut out: Vec<LinkedSide> = self.facets[r]
            .sides
            .iter()
            .map(|&side| LinkedSide { facet: r, side })
            .collect();
        if let Some(s) = self.partner[r] {
            out.extend(self.facets[s].sides.iter().map(|&side| LinkedSide { facet: s, side }));
        }
        out
    }

    /// Facets that carry their own unknowns (every facet except periodic slaves).
    pub fn dof_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_facets()).filter(move |&f| self.representative(f) == f)
    }

    /// True if some facet carries a natural (outflow) condition.
    pub fn has_outflow(&self) -> bool {
        self.facets.iter().any(|f| f.tag == BoundaryTag::Outflow)
    }

    /// Stable content hash of the mesh in its canonical text form.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(write_mesh_string(self).as_bytes()))
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        self.h_local.iter().cloned().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_is_symmetric() {
        for m in [generate_unit_square(3, false), generate_unit_square(3, true)] {
            for (f, facet) in m.facets.iter().enumerate() {
                for s in &facet.sides {
                    assert_eq!(m.element_facets[s.element][s.local], f);
                }
            }
            for e in 0..m.num_elements() {
                for i in 0..3 {
                    let f = m.element_facets[e][i];
                    assert!(m.facets[f].sides.iter().any(|s| s.element == e && s.local == i));
                }
            }
        }
    }

    #[test]
    fn normals_are_antiparallel_and_signs_consistent() {
        let m = generate_unit_square(4, true);
        for f in m.dof_facets() {
            let sides = m.linked_sides(f);
            assert_eq!(sides.len(), 2);
            let n0 = m.outward_normal(sides[0].side.element, sides[0].side.local);
            let n1 = m.outward_normal(sides[1].side.element, sides[1].side.local);
            assert!((n0[0] + n1[0]).abs() < 1e-14 && (n0[1] + n1[1]).abs() < 1e-14);
            let g = m.facet_normal(f);
            for s in &sides {
                let n = m.outward_normal(s.side.element, s.side.local);
                let dot = n[0] * g[0] + n[1] * g[1];
                assert!((dot - s.side.sign as f64).abs() < 1e-14);
            }
            assert_eq!(sides[0].side.sign, -sides[1].side.sign);
        }
    }

    #[test]
    fn clockwise_element_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Mesh::from_parts(v, vec![[0, 2, 1]], &[], &[]),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn euler_formula() {
        for n in 1..6 {
            let m = generate_unit_square(n, false);
            // V - E + F = 1 for a disk (F counts triangles)
            let chi = m.num_vertices() as i64 - m.num_facets() as i64 + m.num_elements() as i64;
            assert_eq!(chi, 1);
        }
        assert_eq!(generate_unit_square(4, false).num_facets(), 56);
    }
}
