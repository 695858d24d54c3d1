//! The order-`k` BDM element on the reference triangle.
//!
//! Local degrees of freedom, in this order:
//! * `3 (k+1)` facet-normal moments `int_F (v.n) l_d ds`, `d = 0..=k`, grouped by local facet;
//! * `2 dim P^{k-2}` interior moments `int_T v_c phi_j` against the Dubiner basis of `P^{k-2}`;
//! * `k - 1` complement moments `int_T v . curl(b psi_m)` where `b` is the cubic bubble and
//!   `psi_m` runs over the Dubiner functions of exact degree `k - 2`.
//!
//! Local facet `i` runs from vertex `(i+1) % 3` to vertex `(i+2) % 3`; its Legendre
//! parameter increases in that direction and `n` is the outward normal.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use super::polynomials::{dubiner_basis, dubiner_with_gradient, legendre, triangle_dim};
use super::quadrature::{gauss_rule, triangle_rule};
use crate::error::{Error, Result};

/// Reference triangle vertices.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Conditioning limit above which an element is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Endpoints of local facet `i` on the reference triangle.
#[inline]
pub fn ref_facet_endpoints(i: usize) -> ([f64; 2], [f64; 2]) {
    (REF_VERTICES[(i + 1) % 3], REF_VERTICES[(i + 2) % 3])
}

/// Point at parameter `t` along local facet `i`.
#[inline]
pub fn ref_facet_point(i: usize, t: f64) -> [f64; 2] {
    let (a, b) = ref_facet_endpoints(i);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Outward normal of local facet `i` scaled by the facet length.
#[inline]
pub fn ref_facet_scaled_normal(i: usize) -> [f64; 2] {
    let (a, b) = ref_facet_endpoints(i);
    [b[1] - a[1], -(b[0] - a[0])]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BdmDof {
    FacetNormal { facet: usize, degree: usize },
    Interior { component: usize, index: usize },
    Complement { index: usize },
}

#[derive(Debug, Clone)]
pub struct BdmElement {
    pub k: usize,
    /// Dual basis function `j` is `sum_m coeffs[m * n + j] * e_{m / P} phi_{m % P}`,
    /// where `P = dim P^k` and `phi` is the Dubiner basis.
    pub coeffs: Vec<f64>,
    pub dofs: Vec<BdmDof>,
    /// Spectral condition number of the DOF-vs-modal matrix.
    pub condition: f64,
}

impl BdmElement {
    pub fn ndofs(&self) -> usize {
        self.dofs.len()
    }

    #[inline]
    pub fn facet_dof(&self, facet: usize, degree: usize) -> usize {
        facet * (self.k + 1) + degree
    }

    /// First interior (non-facet) local DOF.
    #[inline]
    pub fn interior_start(&self) -> usize {
        3 * (self.k + 1)
    }

    /// First complement DOF.
    #[inline]
    pub fn complement_start(&self) -> usize {
        self.interior_start() + 2 * interior_dim(self.k)
    }

    /// Values and reference gradients (`g[a][b] = d v_a / d x_b`) of all dual basis functions.
    pub fn eval(&self, p: [f64; 2], vals: &mut [[f64; 2]], grads: &mut [[[f64; 2]; 2]]) {
        let np = triangle_dim(self.k);
        let n = self.ndofs();
        let mut phi = vec![0.0; np];
        let mut dphi = vec![[0.0; 2]; np];
        dubiner_with_gradient(self.k, p, &mut phi, &mut dphi);
        for j in 0..n {
            let mut v = [0.0; 2];
            let mut g = [[0.0; 2]; 2];
            for c in 0..2 {
                for a in 0..np {
                    let w = self.coeffs[(c * np + a) * n + j];
                    v[c] += w * phi[a];
                    g[c][0] += w * dphi[a][0];
                    g[c][1] += w * dphi[a][1];
                }
            }
            vals[j] = v;
            grads[j] = g;
        }
    }

    /// Applies every DOF functional to a reference vector field.
    pub fn apply_dofs(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        dof_functionals(self.k, 0, &f)
    }

    /// As [`apply_dofs`](Self::apply_dofs) with `extra` additional quadrature degrees,
    /// for non-polynomial fields.
    pub fn apply_dofs_with(&self, extra: usize, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        dof_functionals(self.k, extra, &f)
    }
}

/// Dimension of `P^{k-2}` (zero for `k < 2`).
#[inline]
pub fn interior_dim(k: usize) -> usize {
    if k >= 2 {
        triangle_dim(k - 2)
    } else {
        0
    }
}

/// The DOF functionals evaluated on a reference field, by quadrature exact for `[P^k]^2`.
fn dof_functionals(k: usize, extra: usize, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let n = (k + 1) * (k + 2);
    let mut out = vec![0.0; n];
    let g = gauss_rule::<f64>(k + 2 + extra.div_ceil(2));
    for i in 0..3 {
        let nrm = ref_facet_scaled_normal(i);
        for (p, w) in g.points.iter().zip(&g.weights) {
            let t = p[0];
            let v = f(ref_facet_point(i, t));
            let vn = v[0] * nrm[0] + v[1] * nrm[1];
            let l = legendre(k, t);
            for d in 0..=k {
                out[i * (k + 1) + d] += w * vn * l[d];
            }
        }
    }
    if k < 2 {
        return out;
    }
    let pi = triangle_dim(k - 2);
    let top_start = if k >= 3 { triangle_dim(k - 3) } else { 0 };
    let rule = triangle_rule::<f64>(2 * k + 2 + extra);
    let mut psi = vec![0.0; pi];
    let mut dpsi = vec![[0.0; 2]; pi];
    let base = 3 * (k + 1);
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let v = f(*p);
        dubiner_with_gradient(k - 2, *p, &mut psi, &mut dpsi);
        for c in 0..2 {
            for j in 0..pi {
                out[base + c * pi + j] += w * v[c] * psi[j];
            }
        }
        let (x, y) = (p[0], p[1]);
        let b = x * y * (1.0 - x - y);
        let bx = y * (1.0 - x - y) - x * y;
        let by = x * (1.0 - x - y) - x * y;
        for m in 0..(k - 1) {
            let j = top_start + m;
            let sx = bx * psi[j] + b * dpsi[j][0];
            let sy = by * psi[j] + b * dpsi[j][1];
            // curl s = (ds/dy, -ds/dx)
            out[base + 2 * pi + m] += w * (v[0] * sy - v[1] * sx);
        }
    }
    out
}

/// Builds the order-`k` element by inverting the DOF-vs-modal matrix.
pub fn build_bdm_element(k: usize) -> Result<BdmElement> {
    if k == 0 {
        return Err(Error::UnsupportedOrder {
            k,
            reason: "BDM elements need k >= 1",
        });
    }
    let np = triangle_dim(k);
    let n = 2 * np;
    let basis = dubiner_basis(k);
    // vandermonde[i][m] = dof_i(modal_m)
    let mut vander = Mat::<f64>::zeros(n, n);
    for m in 0..n {
        let (c, a) = (m / np, m % np);
        let col = dof_functionals(k, 0, &|p| {
            let mut v = vec![0.0; np];
            let mut g = vec![[0.0; 2]; np];
            basis.eval(p, &mut v, &mut g);
            let mut out = [0.0; 2];
            out[c] = v[a];
            out
        });
        for (i, x) in col.into_iter().enumerate() {
            vander[(i, m)] = x;
        }
    }
    let sv = vander.singular_values().map_err(|_| Error::SingularElement {
        k,
        condition: f64::INFINITY,
    })?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularElement { k, condition });
    }
    let inv = vander.partial_piv_lu().inverse();
    let mut coeffs = vec![0.0; n * n];
    for m in 0..n {
        for j in 0..n {
            coeffs[m * n + j] = inv[(m, j)];
        }
    }
    let mut dofs = Vec::with_capacity(n);
    for facet in 0..3 {
        for degree in 0..=k {
            dofs.push(BdmDof::FacetNormal { facet, degree });
        }
    }
    let pi = interior_dim(k);
    for component in 0..2 {
        for index in 0..pi {
            dofs.push(BdmDof::Interior { component, index });
        }
    }
    for index in 0..k.saturating_sub(1) {
        dofs.push(BdmDof::Complement { index });
    }
    debug_assert_eq!(dofs.len(), n);
    Ok(BdmElement {
        k,
        coeffs,
        dofs,
        condition,
    })
}

/// Shared, lazily built element of order `k`.
pub fn bdm_element(k: usize) -> Result<Arc<BdmElement>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BdmElement>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().expect("element cache poisoned").get(&k) {
        return Ok(e.clone());
    }
    let e = Arc::new(build_bdm_element(k)?);
    cache
        .lock()
        .expect("element cache poisoned")
        .entry(k)
        .or_insert_with(|| e.clone());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dof_counts() {
        let e = build_bdm_element(1).unwrap();
        assert_eq!(e.ndofs(), 6);
        assert!(e.dofs.iter().all(|d| matches!(d, BdmDof::FacetNormal { .. })));
        let e = build_bdm_element(2).unwrap();
        assert_eq!(e.ndofs(), 12);
        let facet = e.dofs.iter().filter(|d| matches!(d, BdmDof::FacetNormal { .. })).count();
        let interior = e.dofs.iter().filter(|d| matches!(d, BdmDof::Interior { .. })).count();
        assert_eq!((facet, interior), (9, 2));
        assert!(build_bdm_element(0).is_err());
    }

    fn eval_at(e: &BdmElement, j: usize, p: [f64; 2]) -> [f64; 2] {
        let n = e.ndofs();
        let mut v = vec![[0.0; 2]; n];
        let mut g = vec![[[0.0; 2]; 2]; n];
        e.eval(p, &mut v, &mut g);
        v[j]
    }

    #[test]
    fn dual_basis_property() {
        for k in 1..=8 {
            let e = build_bdm_element(k).unwrap();
            let n = e.ndofs();
            for j in 0..n {
                let d = e.apply_dofs(|p| eval_at(&e, j, p));
                for (i, x) in d.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((x - want).abs() < 1e-10, "k={k} i={i} j={j} got {x}");
                }
            }
        }
    }

    #[test]
    fn conditioning_stays_moderate() {
        for k in 1..=14 {
            let e = build_bdm_element(k).unwrap();
            assert!(e.condition < 1e6, "k={k} cond={}", e.condition);
        }
    }

    #[test]
    fn random_polynomials_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..=10 {
            let e = build_bdm_element(k).unwrap();
            let np = triangle_dim(k);
            let coef: Vec<f64> = (0..2 * np).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let basis = dubiner_basis(k);
            let field = |p: [f64; 2]| {
                let mut v = vec![0.0; np];
                let mut g = vec![[0.0; 2]; np];
                basis.eval(p, &mut v, &mut g);
                let mut out = [0.0; 2];
                for a in 0..np {
                    out[0] += coef[a] * v[a];
                    out[1] += coef[np + a] * v[a];
                }
                out
            };
            let dofs = e.apply_dofs(field);
            let n = e.ndofs();
            let mut vals = vec![[0.0; 2]; n];
            let mut grads = vec![[[0.0; 2]; 2]; n];
            for _ in 0..20 {
                let x: f64 = rng.gen_range(0.0..1.0);
                let y: f64 = rng.gen_range(0.0..(1.0 - x));
                e.eval([x, y], &mut vals, &mut grads);
                let want = field([x, y]);
                let mut got = [0.0; 2];
                for j in 0..n {
                    got[0] += dofs[j] * vals[j][0];
                    got[1] += dofs[j] * vals[j][1];
                }
                let scale = 1.0 + want[0].abs() + want[1].abs();
                assert!((got[0] - want[0]).abs() < 1e-9 * scale);
                assert!((got[1] - want[1]).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn top_normal_moment_vanishes_for_lower_degree_traces() {
        // v = (x^{k-1}, 0) has normal traces of degree k-1 on every facet
        for k in 1..=8 {
            let e = build_bdm_element(k).unwrap();
            let d = e.apply_dofs(|p| [p[0].powi(k as i32 - 1), p[1].powi(k as i32 - 1)]);
            for i in 0..3 {
                assert!(d[e.facet_dof(i, k)].abs() < 1e-12, "k={k} facet {i}");
            }
        }
    }

    #[test]
    fn facet_moment_matches_legendre_mode() {
        // the normal trace of the dual function for (i, d) is l_d / |F| on facet i
        let k = 4;
        let e = build_bdm_element(k).unwrap();
        for i in 0..3 {
            let nrm = ref_facet_scaled_normal(i);
            for d in 0..=k {
                let j = e.facet_dof(i, d);
                for t in [0.1, 0.45, 0.8] {
                    let v = eval_at(&e, j, ref_facet_point(i, t));
                    let vn = v[0] * nrm[0] + v[1] * nrm[1];
                    assert!((vn - legendre(k, t)[d]).abs() < 1e-10);
                }
            }
        }
    }
}
