use std::sync::Arc;

use super::dofmap::{DofMap, SpaceKind};
use super::function::{scalar_scale, FeFunction, DATA_EXTRA_DEGREE};
use crate::basis::polynomials::{dubiner_with_gradient, legendre, triangle_dim};
use crate::basis::quadrature::{gauss_rule, triangle_rule};
use crate::error::{Error, Result};
use crate::mesh::{affine_map, Mesh};

/// Coefficients of the L2 projection of `f` onto `l_0..l_order` on `[0,1]`.
pub fn project_facet(f: impl Fn(f64) -> f64, order: usize) -> Vec<f64> {
    let g = gauss_rule::<f64>(order + 1 + DATA_EXTRA_DEGREE);
    let mut out = vec![0.0; order + 1];
    for (t, w) in g.points.iter().zip(&g.weights) {
        let v = f(t[0]);
        for (o, l) in out.iter_mut().zip(legendre(order, t[0])) {
            *o += w * v * l;
        }
    }
    out
}

/// L2 projection of `f` (with `comps` components) onto the element basis of
/// a pressure or vector DG space on element `e`.
pub fn project_element(mesh: &Mesh, e: usize, kind: SpaceKind, order: usize, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let map = affine_map(mesh, e);
    let np = triangle_dim(order);
    let comps = if kind == SpaceKind::Dg { 2 } else { 1 };
    // basis functions are c * phi_hat with c = scalar_scale; int_T g c phi = det c int_ref
    let scale = map.det * scalar_scale(kind, &map);
    let norm = map.det * scalar_scale(kind, &map).powi(2);
    let rule = triangle_rule::<f64>(2 * order + DATA_EXTRA_DEGREE);
    let mut phi = vec![0.0; np];
    let mut dphi = vec![[0.0; 2]; np];
    let mut out = vec![0.0; comps * np];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        dubiner_with_gradient(order, *p, &mut phi, &mut dphi);
        let v = f(map.map(*p));
        for c in 0..comps {
            for a in 0..np {
                out[c * np + a] += w * scale * v[c] * phi[a];
            }
        }
    }
    for o in out.iter_mut() {
        *o /= norm;
    }
    out
}

/// Elementwise L2 projection onto a pressure (scalar, first component of `f`) or DG space.
pub fn project(mesh: &Mesh, dofmap: &Arc<DofMap>, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<FeFunction> {
    if !matches!(dofmap.kind, SpaceKind::Pressure | SpaceKind::Dg) {
        return Err(Error::MapMismatch {
            expected: "pressure or dg space".into(),
            found: dofmap.kind.name().into(),
        });
    }
    let mut coeffs = vec![0.0; dofmap.ndofs];
    for e in 0..mesh.num_elements() {
        let local = project_element(mesh, e, dofmap.kind, dofmap.k, f);
        dofmap.scatter_add(e, &local, &mut coeffs);
    }
    FeFunction::new(dofmap.clone(), coeffs)
}

/// Projection of a scalar function onto a pressure space.
pub fn project_scalar(mesh: &Mesh, dofmap: &Arc<DofMap>, f: &dyn Fn([f64; 2]) -> f64) -> Result<FeFunction> {
    project(mesh, dofmap, &|x| [f(x), 0.0])
}
