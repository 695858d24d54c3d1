use rayon::prelude::*;

use super::sparse::{CsrMatrix, TripletBuilder};
use super::{local_facet, Discretization};
use crate::error::Result;
use crate::mesh::affine_map;
use crate::space::{element_tables, ElementTables};

/// Dense symmetric element matrix of the hybrid viscous form on the local velocity
/// space `[BDM | facet modes]`. With `consistency == false` and `nu == 1`,
/// `penalty == 1` this is the Gram matrix of the discrete energy norm.
fn viscosity_local(disc: &Discretization, t: &ElementTables, e: usize, nu: f64, penalty: f64, consistency: bool) -> Vec<f64> {
    let mesh = &disc.mesh;
    let k = disc.k;
    let nw = t.nw;
    let nl = nw + 3 * k;
    let map = affine_map(mesh, e);
    let mut m = vec![0.0; nl * nl];
    let nvq = t.nvq();
    let mut gp = vec![[[0.0; 2]; 2]; nw];
    for q in 0..nvq {
        let wq = t.vol_weights[q] * map.det * nu;
        for j in 0..nw {
            gp[j] = map.piola_grad(t.w_grad[q * nw + j]);
        }
        for i in 0..nw {
            let gi = gp[i];
            for j in i..nw {
                let gj = gp[j];
                m[i * nl + j] += wq * (gi[0][0] * gj[0][0] + gi[0][1] * gj[0][1] + gi[1][0] * gj[1][0] + gi[1][1] * gj[1][1]);
            }
        }
    }
    let h = mesh.h_local[e];
    let pen = penalty * (k * k) as f64 / h;
    let nfq = t.nfq();
    let mut beta = vec![0.0; k * nl];
    let mut gamma = vec![0.0; k * nl];
    for i in 0..3 {
        let lf = local_facet(mesh, e, i);
        beta.iter_mut().for_each(|v| *v = 0.0);
        gamma.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..nfq {
            let wq = t.facet_w[q];
            let leg = &t.leg[q * (k + 1)..q * (k + 1) + k];
            for j in 0..nw {
                let v = map.piola(t.fw_val[t.fidx(i, q, j)]);
                let tv = v[0] * lf.tangent[0] + v[1] * lf.tangent[1];
                let g = map.piola_grad(t.fw_grad[t.fidx(i, q, j)]);
                let dn = lf.tangent[0] * (g[0][0] * lf.normal[0] + g[0][1] * lf.normal[1])
                    + lf.tangent[1] * (g[1][0] * lf.normal[0] + g[1][1] * lf.normal[1]);
                for d in 0..k {
                    beta[d * nl + j] += wq * tv * leg[d];
                    gamma[d * nl + j] += wq * dn * leg[d];
                }
            }
        }
        for d in 0..k {
            beta[d * nl + nw + i * k + d] = -1.0;
        }
        let scale = nu * lf.length;
        let support: Vec<usize> = (0..nw).chain(nw + i * k..nw + (i + 1) * k).collect();
        for (a, &r) in support.iter().enumerate() {
            for &c in &support[a..] {
                let mut s = 0.0;
                for d in 0..k {
                    let (br, bc) = (beta[d * nl + r], beta[d * nl + c]);
                    s += pen * br * bc;
                    if consistency {
                        s -= gamma[d * nl + r] * bc + br * gamma[d * nl + c];
                    }
                }
                m[r * nl + c] += scale * s;
            }
        }
    }
    mirror_upper(&mut m, nl);
    m
}

fn mirror_upper(m: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
}

fn scatter_velocity_matrix(disc: &Discretization, locals: Vec<Vec<f64>>) -> CsrMatrix {
    let nv = disc.nv();
    let mut t = TripletBuilder::new(nv, nv);
    for (e, m) in locals.into_iter().enumerate() {
        let (idx, sgn) = disc.velocity_dofs(e);
        let n = idx.len();
        for i in 0..n {
            for j in 0..n {
                let v = m[i * n + j];
                if v != 0.0 {
                    t.push(idx[i], idx[j], sgn[i] * sgn[j] * v);
                }
            }
        }
    }
    t.build()
}

/// Viscous form `A` on the composite velocity space (size `nv x nv`).
pub fn assemble_viscosity(disc: &Discretization, nu: f64, lambda: f64) -> Result<CsrMatrix> {
    let t = element_tables(disc.k, 0)?;
    let locals: Vec<Vec<f64>> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| viscosity_local(disc, &t, e, nu, lambda, true))
        .collect();
    Ok(scatter_velocity_matrix(disc, locals))
}

/// Gram matrix of the discrete energy norm: broken gradient plus `k^2/h`-weighted
/// projected tangential jumps.
pub fn assemble_norm_gram(disc: &Discretization) -> Result<CsrMatrix> {
    let t = element_tables(disc.k, 0)?;
    let locals: Vec<Vec<f64>> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| viscosity_local(disc, &t, e, 1.0, 1.0, false))
        .collect();
    Ok(scatter_velocity_matrix(disc, locals))
}

/// `L2` mass of the element velocity part; facet unknowns carry no mass.
pub fn assemble_mass(disc: &Discretization) -> Result<CsrMatrix> {
    let t = element_tables(disc.k, 0)?;
    let nw = t.nw;
    let nl = disc.local_velocity_size();
    let locals: Vec<Vec<f64>> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let map = affine_map(&disc.mesh, e);
            let g = map.metric();
            let mut m = vec![0.0; nl * nl];
            for i in 0..nw {
                for j in i..nw {
                    let ij = i * nw + j;
                    m[i * nl + j] = (g[0][0] * t.mass_ref[0][ij]
                        + g[0][1] * t.mass_ref[1][ij]
                        + g[1][0] * t.mass_ref[2][ij]
                        + g[1][1] * t.mass_ref[3][ij])
                        / map.det;
                }
            }
            mirror_upper(&mut m, nl);
            m
        })
        .collect();
    Ok(scatter_velocity_matrix(disc, locals))
}

/// Divergence form `B(u, q) = -sum_T int_T q div u`, rows pressure, columns composite velocity.
pub fn assemble_divergence(disc: &Discretization) -> Result<CsrMatrix> {
    let t = element_tables(disc.k, 0)?;
    let (np, nw) = (t.np, t.nw);
    let mut b = TripletBuilder::new(disc.np(), disc.nv());
    for e in 0..disc.mesh.num_elements() {
        let pd = disc.pressure.cell_dofs(e);
        let wd = disc.w.cell_dofs(e);
        let ws = disc.w.cell_signs(e);
        for a in 0..np {
            for j in 0..nw {
                let v = t.b_ref[a * nw + j];
                if v != 0.0 {
                    b.push(pd[a], wd[j], ws[j] * v);
                }
            }
        }
    }
    Ok(b.build())
}

/// `int_Omega p` as a linear functional on pressure coefficients.
pub fn mean_pressure_vector(disc: &Discretization) -> Vec<f64> {
    let mut m = vec![0.0; disc.np()];
    for e in 0..disc.mesh.num_elements() {
        let det = affine_map(&disc.mesh, e).det;
        // the constant Dubiner function is sqrt(2) on a reference triangle of area 1/2
        m[disc.pressure.cell_dofs(e)[0]] = det * std::f64::consts::FRAC_1_SQRT_2;
    }
    m
}

/// Legendre modes `0..k` of the projected tangential jump `u_T . tau - u_F` on local
/// facet `i` of element `e`, in the element's local facet parameter.
pub fn facet_jump_modes(disc: &Discretization, e: usize, i: usize, w_local: &[f64], f_local: &[f64]) -> Result<Vec<f64>> {
    let t = element_tables(disc.k, 0)?;
    let k = disc.k;
    let map = affine_map(&disc.mesh, e);
    let lf = local_facet(&disc.mesh, e, i);
    let mut beta = vec![0.0; k];
    for q in 0..t.nfq() {
        let mut v = [0.0; 2];
        for j in 0..t.nw {
            let b = t.fw_val[t.fidx(i, q, j)];
            v[0] += w_local[j] * b[0];
            v[1] += w_local[j] * b[1];
        }
        let v = map.piola(v);
        let tv = v[0] * lf.tangent[0] + v[1] * lf.tangent[1];
        for d in 0..k {
            beta[d] += t.facet_w[q] * tv * t.leg[q * (k + 1) + d];
        }
    }
    for d in 0..k {
        beta[d] -= f_local[i * k + d];
    }
    Ok(beta)
}
