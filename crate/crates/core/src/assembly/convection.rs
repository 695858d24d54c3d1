use rayon::prelude::*;

use super::{local_facet, Discretization};
use crate::basis::bdm::ref_facet_point;
use crate::error::{Error, Result};
use crate::mesh::affine_map;
use crate::space::{element_tables, SpaceKind};

/// Boundary velocity used as the upwind value on inflow parts of Dirichlet facets.
pub type BoundaryData<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvectionOptions {
    /// Reject advective fields whose top normal modes differ across a facet.
    pub strict: bool,
}

impl Default for ConvectionOptions {
    fn default() -> Self {
        ConvectionOptions { strict: true }
    }
}

/// Tolerance on the top normal-mode jump accepted as normal continuity.
pub const NORMAL_JUMP_TOL: f64 = 1e-10;

/// Elementwise upwind convection: `out[e][j] = C(w; u, psi_j)` for the local BDM
/// functions `psi_j` of element `e`, where
/// `C(w; u, z) = sum_T -int_T (u (x) w) : grad z + int_dT (w . n) u_up . z`.
///
/// `w_local` and `u_local` hold signed local BDM coefficients per element. The
/// advective normal flux is taken from the element's own side; the upwind value is
/// the own trace where `w . n >= 0`, the neighbor trace otherwise, and on the
/// boundary the data `g` for Dirichlet facets (the own trace on outflow facets).
pub fn convection_local(
    disc: &Discretization,
    w_local: &[Vec<f64>],
    u_local: &[Vec<f64>],
    g: Option<BoundaryData>,
) -> Result<Vec<Vec<f64>>> {
    let k = disc.k;
    let t = element_tables(k, k)?;
    let mesh = &disc.mesh;
    let ne = mesh.num_elements();
    let (nw, nfq) = (t.nw, t.nfq());
    // facet traces of u, per element and local facet
    let traces: Vec<Vec<[f64; 2]>> = (0..ne)
        .into_par_iter()
        .map(|e| {
            let map = affine_map(mesh, e);
            let mut out = vec![[0.0; 2]; 3 * nfq];
            for i in 0..3 {
                for q in 0..nfq {
                    let mut v = [0.0; 2];
                    for j in 0..nw {
                        let b = t.fw_val[t.fidx(i, q, j)];
                        v[0] += u_local[e][j] * b[0];
                        v[1] += u_local[e][j] * b[1];
                    }
                    out[i * nfq + q] = map.piola(v);
                }
            }
            out
        })
        .collect();
    let out = (0..ne)
        .into_par_iter()
        .map(|e| {
            let map = affine_map(mesh, e);
            let (wl, ul) = (&w_local[e], &u_local[e]);
            let mut r = vec![0.0; nw];
            for q in 0..t.nvq() {
                let vals = &t.w_val[q * nw..(q + 1) * nw];
                let mut u = [0.0; 2];
                let mut w = [0.0; 2];
                for j in 0..nw {
                    for a in 0..2 {
                        u[a] += ul[j] * vals[j][a];
                        w[a] += wl[j] * vals[j][a];
                    }
                }
                let (u, w) = (map.piola(u), map.piola(w));
                let wq = t.vol_weights[q] * map.det;
                for (j, rj) in r.iter_mut().enumerate() {
                    let gz = map.piola_grad(t.w_grad[q * nw + j]);
                    let mut s = 0.0;
                    for a in 0..2 {
                        s += u[a] * (w[0] * gz[a][0] + w[1] * gz[a][1]);
                    }
                    *rj -= wq * s;
                }
            }
            for i in 0..3 {
                let lf = local_facet(mesh, e, i);
                let f = mesh.element_facets[e][i];
                let tag = mesh.facets[f].tag;
                let nb = disc.neighbor(e, i);
                for q in 0..nfq {
                    let mut wv = [0.0; 2];
                    for j in 0..nw {
                        let b = t.fw_val[t.fidx(i, q, j)];
                        wv[0] += wl[j] * b[0];
                        wv[1] += wl[j] * b[1];
                    }
                    let wv = map.piola(wv);
                    let wn = wv[0] * lf.normal[0] + wv[1] * lf.normal[1];
                    let up = if wn >= 0.0 {
                        traces[e][i * nfq + q]
                    } else if let Some((en, inb)) = nb {
                        // adjacent elements traverse a shared facet in opposite directions
                        traces[en][inb * nfq + (nfq - 1 - q)]
                    } else if tag.is_dirichlet() {
                        g.map_or([0.0; 2], |g| g(map.map(ref_facet_point(i, t.facet_t[q]))))
                    } else {
                        traces[e][i * nfq + q]
                    };
                    let c = t.facet_w[q] * lf.length * wn;
                    for (j, rj) in r.iter_mut().enumerate() {
                        let z = map.piola(t.fw_val[t.fidx(i, q, j)]);
                        *rj += c * (up[0] * z[0] + up[1] * z[1]);
                    }
                }
            }
            r
        })
        .collect();
    Ok(out)
}

/// Largest difference between the two top normal modes over all facets of a relaxed field.
pub fn max_top_mode_jump(disc: &Discretization, w: &[f64]) -> (usize, f64) {
    let mut worst = (0, 0.0f64);
    if disc.w.kind != SpaceKind::WRelaxed {
        return worst;
    }
    for f in disc.mesh.dof_facets() {
        let tops = &disc.w.facet_top[f];
        if tops.len() == 2 {
            let j = (w[tops[0]] - w[tops[1]]).abs();
            if j > worst.1 {
                worst = (f, j);
            }
        }
    }
    worst
}

/// Convection vector `C(w; u, v)` for every element velocity basis function `v` of
/// `disc.w` (length `nw`). In strict mode `w` must be normal-continuous.
pub fn apply_convection(
    disc: &Discretization,
    w: &[f64],
    u: &[f64],
    g: Option<BoundaryData>,
    opts: ConvectionOptions,
) -> Result<Vec<f64>> {
    if opts.strict {
        let (facet, jump) = max_top_mode_jump(disc, w);
        if jump > NORMAL_JUMP_TOL {
            return Err(Error::NotNormalContinuous { facet, jump });
        }
    }
    let local = convection_local(disc, &disc.local_w(w), &disc.local_w(u), g)?;
    let mut out = vec![0.0; disc.nw()];
    for (e, l) in local.iter().enumerate() {
        disc.w.scatter_add(e, l, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_unit_square;
    use crate::space::interpolate_bdm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn periodic(n: usize, k: usize) -> Discretization {
        Discretization::new(Arc::new(generate_unit_square(n, true)), k, SpaceKind::WRelaxed).unwrap()
    }

    fn cellular(p: [f64; 2]) -> [f64; 2] {
        use std::f64::consts::PI;
        let (x, y) = (2.0 * PI * p[0], 2.0 * PI * p[1]);
        [x.sin() * y.cos(), -x.cos() * y.sin()]
    }

    fn random(disc: &Discretization, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..disc.nw()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_advection_gives_zero() {
        let disc = periodic(3, 2);
        let u = random(&disc, 1);
        let c = apply_convection(&disc, &vec![0.0; disc.nw()], &u, None, ConvectionOptions::default()).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn upwinding_is_dissipative_for_solenoidal_advection() {
        for k in 1..=4 {
            let disc = periodic(4, k);
            let w = interpolate_bdm(&disc.mesh, &disc.w, &cellular).unwrap().coeffs;
            for seed in 0..5 {
                let u = random(&disc, seed);
                let c = apply_convection(&disc, &w, &u, None, ConvectionOptions::default()).unwrap();
                let cuu: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
                assert!(cuu >= -1e-12, "k={k} C(w;u,u)={cuu:e}");
            }
        }
    }

    #[test]
    fn constant_fields_are_not_transported() {
        let disc = periodic(3, 3);
        let w = interpolate_bdm(&disc.mesh, &disc.w, &|_| [1.0, 0.5]).unwrap().coeffs;
        let u = interpolate_bdm(&disc.mesh, &disc.w, &|_| [-0.2, 2.0]).unwrap().coeffs;
        let c = apply_convection(&disc, &w, &u, None, ConvectionOptions::default()).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn single_element_outflow_flux() {
        // u = w = (1, 0) on the reference triangle: the volume term vanishes and
        // C(w; u, v) = int_dT (w . n) u . v with the own trace on outflow and the
        // (zero) boundary data on inflow
        let mesh = crate::mesh::Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[],
            &[],
        )
        .unwrap();
        let disc = Discretization::new(Arc::new(mesh), 1, SpaceKind::WRelaxed).unwrap();
        let one = interpolate_bdm(&disc.mesh, &disc.w, &|_| [1.0, 0.0]).unwrap().coeffs;
        let c = apply_convection(&disc, &one, &one, Some(&|_| [0.0, 0.0]), ConvectionOptions::default()).unwrap();
        let cuu: f64 = c.iter().zip(&one).map(|(a, b)| a * b).sum();
        // outflow across the hypotenuse: int (w . n) |u|^2 = |edge| n_x = 1
        assert!((cuu - 1.0).abs() < 1e-13, "{cuu}");
    }

    #[test]
    fn strict_mode_rejects_top_mode_jumps() {
        let disc = periodic(2, 2);
        let mut w = vec![0.0; disc.nw()];
        let f = disc.mesh.dof_facets().find(|&f| disc.w.facet_top[f].len() == 2).unwrap();
        w[disc.w.facet_top[f][0]] = 1.0;
        let u = random(&disc, 3);
        let err = apply_convection(&disc, &w, &u, None, ConvectionOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotNormalContinuous { .. }));
        assert!(apply_convection(&disc, &w, &u, None, ConvectionOptions { strict: false }).is_ok());
    }
}
