use serde::{Deserialize, Serialize};

use crate::assembly::{local_facet, Discretization};
use crate::basis::bdm::ref_facet_point;
use crate::basis::polynomials::{dubiner_with_gradient, triangle_dim};
use crate::error::{Error, Result};
use crate::mesh::{affine_map, BoundaryTag, Mesh, CYLINDER_CENTER, CYLINDER_RADIUS};
use crate::space::element_tables;

/// Boundary part on which forces are integrated: facets carrying `tag` whose
/// midpoints lie within `radius` of `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSurface {
    pub tag: BoundaryTag,
    pub center: [f64; 2],
    pub radius: f64,
}

/// The cylinder of the channel benchmark.
pub const CYLINDER_SURFACE: ForceSurface = ForceSurface {
    tag: BoundaryTag::Wall,
    center: CYLINDER_CENTER,
    radius: CYLINDER_RADIUS + 0.01,
};

/// `2 / (U_mean^2 D)` with mean inflow velocity 1 and cylinder diameter 0.1.
pub const CYLINDER_FORCE_SCALE: f64 = 20.0;

/// `(element, local facet)` pairs on the surface.
pub fn surface_sides(mesh: &Mesh, s: &ForceSurface) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (f, facet) in mesh.facets.iter().enumerate() {
        if facet.tag != s.tag || facet.sides.len() != 1 {
            continue;
        }
        let m = mesh.facet_midpoint(f);
        if (m[0] - s.center[0]).hypot(m[1] - s.center[1]) <= s.radius {
            out.push((facet.sides[0].element, facet.sides[0].local));
        }
    }
    if out.is_empty() {
        return Err(Error::MissingTag(format!(
            "no {} facets within {} of ({}, {})",
            s.tag, s.radius, s.center[0], s.center[1]
        )));
    }
    Ok(out)
}

/// `int (nu du/dn - p n) ds` over the given element sides, `n` the outward normal of
/// the element (pointing out of the fluid).
pub fn surface_force(disc: &Discretization, u_w: &[f64], p: &[f64], nu: f64, sides: &[(usize, usize)]) -> Result<[f64; 2]> {
    let t = element_tables(disc.k, 0)?;
    let nw = t.nw;
    let pk = disc.pressure.k;
    let np = triangle_dim(pk);
    let mut phi = vec![0.0; np];
    let mut dphi = vec![[0.0; 2]; np];
    let mut force = [0.0; 2];
    for &(e, i) in sides {
        let map = affine_map(&disc.mesh, e);
        let lf = local_facet(&disc.mesh, e, i);
        let c = disc.w.local_coeffs(e, &u_w[..disc.nw()]);
        let pc = disc.pressure.local_coeffs(e, p);
        let n = lf.normal;
        for q in 0..t.nfq() {
            let mut g = [[0.0; 2]; 2];
            for j in 0..nw {
                let gb = t.fw_grad[t.fidx(i, q, j)];
                for a in 0..2 {
                    for b in 0..2 {
                        g[a][b] += c[j] * gb[a][b];
                    }
                }
            }
            let g = map.piola_grad(g);
            dubiner_with_gradient(pk, ref_facet_point(i, t.facet_t[q]), &mut phi, &mut dphi);
            let ph: f64 = (0..np).map(|a| pc[a] * phi[a]).sum();
            let w = t.facet_w[q] * lf.length;
            for a in 0..2 {
                force[a] += w * (nu * (g[a][0] * n[0] + g[a][1] * n[1]) - ph * n[a]);
            }
        }
    }
    Ok(force)
}

/// Drag and lift coefficients of the force exerted by the fluid on the cylinder.
pub fn drag_lift(disc: &Discretization, u_w: &[f64], p: &[f64], nu: f64) -> Result<(f64, f64)> {
    let sides = surface_sides(&disc.mesh, &CYLINDER_SURFACE)?;
    let f = surface_force(disc, u_w, p, nu, &sides)?;
    // the force on the body is minus the integral with the fluid's outward normal
    Ok((-CYLINDER_FORCE_SCALE * f[0], -CYLINDER_FORCE_SCALE * f[1]))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_channel_cylinder;
    use crate::space::{project_scalar, SpaceKind};

    #[test]
    fn pressure_force_is_the_enclosed_area() {
        // with u = 0 and p = x, the force integral is -int p n over the polygonal
        // cylinder, which equals its area in the x direction
        let mesh = Arc::new(generate_channel_cylinder(0.08).unwrap());
        let disc = Discretization::new(mesh.clone(), 2, SpaceKind::WRelaxed).unwrap();
        let sides = surface_sides(&mesh, &CYLINDER_SURFACE).unwrap();
        let mut area = 0.0;
        for &(e, i) in &sides {
            let el = mesh.elements[e];
            let (a, b) = (mesh.vertices[el[(i + 1) % 3]], mesh.vertices[el[(i + 2) % 3]]);
            let (c, r) = (CYLINDER_CENTER, [a[0] - CYLINDER_CENTER[0], a[1] - CYLINDER_CENTER[1]]);
            let s = [b[0] - c[0], b[1] - c[1]];
            area += 0.5 * (r[0] * s[1] - r[1] * s[0]).abs();
        }
        let p = project_scalar(&mesh, &disc.pressure, &|x| x[0]).unwrap();
        let f = surface_force(&disc, &vec![0.0; disc.nw()], &p.coeffs, 1.0, &sides).unwrap();
        assert!((f[0] - area).abs() < 1e-13, "{} vs {area}", f[0]);
        assert!(f[1].abs() < 1e-13);
        let (cd, cl) = drag_lift(&disc, &vec![0.0; disc.nw()], &p.coeffs, 1.0).unwrap();
        assert!((cd + CYLINDER_FORCE_SCALE * area).abs() < 1e-12 && cl.abs() < 1e-12);
    }

    #[test]
    fn meshes_without_the_surface_are_rejected() {
        let mesh = crate::mesh::generate_unit_square(2, false);
        assert!(matches!(surface_sides(&mesh, &CYLINDER_SURFACE), Err(Error::MissingTag(_))));
    }
}
