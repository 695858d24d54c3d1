use serde::{Deserialize, Serialize};

use crate::assembly::{facet_jump_modes, local_facet, Discretization};
use crate::error::Result;
use crate::mesh::{affine_map, Mesh};
use crate::basis::polynomials::{dubiner_with_gradient, triangle_dim};
use crate::space::{element_tables, DofMap};

/// Exact velocity, velocity gradient (`g[a][b] = d u_a / d x_b`) and pressure.
pub trait ExactFlow: Sync {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2];
    fn gradient(&self, x: [f64; 2]) -> [[f64; 2]; 2];
    fn pressure(&self, x: [f64; 2]) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub k: usize,
    pub h: f64,
    pub ndof: usize,
    pub l2_u: f64,
    /// Broken `H1` seminorm of the velocity error.
    pub h1_u: f64,
    /// Discrete energy norm including the projected tangential jumps.
    pub triple_u: f64,
    pub l2_p: f64,
}

/// Default number of extra quadrature degrees for error integrals.
pub const ERROR_OVERQUAD: usize = 6;

/// `L2` and broken `H1` errors of a BDM field against `exact`.
pub fn velocity_errors(mesh: &Mesh, map: &DofMap, coeffs: &[f64], exact: &dyn ExactFlow, overquad: usize) -> Result<(f64, f64)> {
    let t = element_tables(map.k, overquad)?;
    let nw = t.nw;
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..mesh.num_elements() {
        let am = affine_map(mesh, e);
        let c = map.local_coeffs(e, &coeffs[..map.ndofs]);
        for q in 0..t.nvq() {
            let mut v = [0.0; 2];
            let mut g = [[0.0; 2]; 2];
            for j in 0..nw {
                let b = t.w_val[q * nw + j];
                let gb = t.w_grad[q * nw + j];
                for a in 0..2 {
                    v[a] += c[j] * b[a];
                    for d in 0..2 {
                        g[a][d] += c[j] * gb[a][d];
                    }
                }
            }
            let (v, g) = (am.piola(v), am.piola_grad(g));
            let x = am.map(t.vol_points[q]);
            let (ue, ge) = (exact.velocity(x), exact.gradient(x));
            let w = t.vol_weights[q] * am.det;
            l2 += w * ((v[0] - ue[0]).powi(2) + (v[1] - ue[1]).powi(2));
            for a in 0..2 {
                for d in 0..2 {
                    h1 += w * (g[a][d] - ge[a][d]).powi(2);
                }
            }
        }
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

/// `L2` pressure error; on meshes without outflow both pressures are compared
/// with their means removed.
pub fn pressure_error(mesh: &Mesh, map: &DofMap, coeffs: &[f64], exact: &dyn ExactFlow, overquad: usize) -> Result<f64> {
    let order = map.k;
    let np = triangle_dim(order);
    let rule = crate::basis::triangle_rule::<f64>(2 * order + 2 + overquad);
    let mut phi = vec![0.0; np];
    let mut dphi = vec![[0.0; 2]; np];
    let mut samples = Vec::new();
    let (mut mean_h, mut mean_e, mut area) = (0.0, 0.0, 0.0);
    for e in 0..mesh.num_elements() {
        let am = affine_map(mesh, e);
        let c = map.local_coeffs(e, coeffs);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            dubiner_with_gradient(order, *p, &mut phi, &mut dphi);
            let ph: f64 = (0..np).map(|a| c[a] * phi[a]).sum();
            let pe = exact.pressure(am.map(*p));
            let w = w * am.det;
            mean_h += w * ph;
            mean_e += w * pe;
            area += w;
            samples.push((w, ph, pe));
        }
    }
    let (sh, se) = if mesh.has_outflow() { (0.0, 0.0) } else { (mean_h / area, mean_e / area) };
    Ok(samples
        .iter()
        .map(|(w, ph, pe)| w * ((ph - sh) - (pe - se)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `sum_T k^2/h ||Pi (u_T^t - u_F)||^2_{dT}` of a discrete composite velocity.
pub fn jump_seminorm_sq(disc: &Discretization, u_w: &[f64], u_f: &[f64]) -> Result<f64> {
    let k = disc.k;
    let mut s = 0.0;
    for e in 0..disc.mesh.num_elements() {
        let wl = disc.w.local_coeffs(e, u_w);
        let fl = disc.facet.local_coeffs(e, u_f);
        let h = disc.mesh.h_local[e];
        for i in 0..3 {
            let beta = facet_jump_modes(disc, e, i, &wl, &fl)?;
            let len = local_facet(&disc.mesh, e, i).length;
            s += (k * k) as f64 / h * len * beta.iter().map(|b| b * b).sum::<f64>();
        }
    }
    Ok(s)
}

/// All four error norms of a discrete solution.
pub fn compute_errors(
    disc: &Discretization,
    exact: &dyn ExactFlow,
    u_w: &[f64],
    u_f: &[f64],
    p: &[f64],
    overquad: usize,
) -> Result<ErrorReport> {
    let (l2_u, h1_u) = velocity_errors(&disc.mesh, &disc.w, u_w, exact, overquad)?;
    // the exact solution has no tangential jump, so the discrete one is the error's
    let triple_u = (h1_u * h1_u + jump_seminorm_sq(disc, u_w, u_f)?).sqrt();
    let l2_p = pressure_error(&disc.mesh, &disc.pressure, p, exact, overquad)?;
    Ok(ErrorReport {
        k: disc.k,
        h: disc.mesh.h_max(),
        ndof: disc.nv() + disc.np(),
        l2_u,
        h1_u,
        triple_u,
        l2_p,
    })
}
