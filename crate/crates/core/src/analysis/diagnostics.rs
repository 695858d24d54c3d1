use crate::error::Result;
use crate::mesh::{affine_map, Mesh};
use crate::space::{element_tables, DofMap};

/// `||u||^2_{L2}` of the element velocity part, by quadrature.
pub fn l2_norm_sq(mesh: &Mesh, map: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let t = element_tables(map.k, 0)?;
    let nw = t.nw;
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let am = affine_map(mesh, e);
        let c = map.local_coeffs(e, &coeffs[..map.ndofs]);
        for q in 0..t.nvq() {
            let mut v = [0.0; 2];
            for j in 0..nw {
                let b = t.w_val[q * nw + j];
                v[0] += c[j] * b[0];
                v[1] += c[j] * b[1];
            }
            let v = am.piola(v);
            total += t.vol_weights[q] * am.det * (v[0] * v[0] + v[1] * v[1]);
        }
    }
    Ok(total)
}

/// Kinetic energy `1/2 ||u||^2_{L2}`.
pub fn kinetic_energy(mesh: &Mesh, map: &DofMap, coeffs: &[f64]) -> Result<f64> {
    Ok(0.5 * l2_norm_sq(mesh, map, coeffs)?)
}

/// Largest `|div u|` over all element quadrature points.
pub fn div_max(mesh: &Mesh, map: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let t = element_tables(map.k, 0)?;
    let nw = t.nw;
    let mut worst = 0.0f64;
    for e in 0..mesh.num_elements() {
        let det = affine_map(mesh, e).det;
        let c = map.local_coeffs(e, &coeffs[..map.ndofs]);
        for q in 0..t.nvq() {
            let d: f64 = (0..nw).map(|j| c[j] * t.w_div[q * nw + j]).sum();
            worst = worst.max((d / det).abs());
        }
    }
    Ok(worst)
}

/// Largest `|[[u . n]]|` over all facet quadrature points of interior and periodic facets.
pub fn normal_jump_max(mesh: &Mesh, map: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let t = element_tables(map.k, 0)?;
    let (nw, nfq) = (t.nw, t.nfq());
    let trace = |e: usize, i: usize| -> Vec<f64> {
        let am = affine_map(mesh, e);
        let c = map.local_coeffs(e, &coeffs[..map.ndofs]);
        let n = mesh.outward_normal(e, i);
        (0..nfq)
            .map(|q| {
                let mut v = [0.0; 2];
                for j in 0..nw {
                    let b = t.fw_val[t.fidx(i, q, j)];
                    v[0] += c[j] * b[0];
                    v[1] += c[j] * b[1];
                }
                let v = am.piola(v);
                v[0] * n[0] + v[1] * n[1]
            })
            .collect()
    };
    let mut worst = 0.0f64;
    for f in mesh.dof_facets() {
        let sides = mesh.linked_sides(f);
        if sides.len() != 2 {
            continue;
        }
        let a = trace(sides[0].side.element, sides[0].side.local);
        let b = trace(sides[1].side.element, sides[1].side.local);
        for q in 0..nfq {
            worst = worst.max((a[q] + b[nfq - 1 - q]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_unit_square;
    use crate::space::{build_dofmap, interpolate_bdm, SpaceKind};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn lattice_initial_norm() {
        let m = generate_unit_square(8, true);
        let dm = Arc::new(build_dofmap(&m, SpaceKind::WRelaxed, 6).unwrap());
        let u = interpolate_bdm(&m, &dm, &|x| {
            [(2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin(), (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos()]
        })
        .unwrap();
        let e = kinetic_energy(&m, &dm, &u.coeffs).unwrap();
        assert!((e - 0.25).abs() < 1e-6, "{e}");
        let e2 = kinetic_energy(&m, &dm, &u.coeffs.iter().map(|c| 2.0 * c).collect::<Vec<_>>()).unwrap();
        assert!((e2 - 4.0 * e).abs() < 1e-12);
        assert!(div_max(&m, &dm, &u.coeffs).unwrap() < 1e-8);
        assert!(normal_jump_max(&m, &dm, &u.coeffs).unwrap() < 1e-4);
    }
}
