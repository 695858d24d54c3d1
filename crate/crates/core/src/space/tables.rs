//! Reference tabulations shared by every element of a given order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::basis::bdm::{bdm_element, ref_facet_point, BdmElement};
use crate::basis::polynomials::{dubiner_with_gradient, legendre, triangle_dim};
use crate::basis::quadrature::{gauss_rule, triangle_rule};
use crate::error::Result;

/// BDM, pressure and Legendre values at the element and facet quadrature points.
///
/// Flat layouts: `w_val[q * nw + j]`, `fw_val[(i * nfq + q) * nw + j]`,
/// `p_val[q * np + a]`, `leg[q * (k + 1) + d]`.
#[derive(Debug)]
pub struct ElementTables {
    pub k: usize,
    pub bdm: Arc<BdmElement>,
    pub nw: usize,
    /// Number of pressure functions (order `k - 1`).
    pub np: usize,
    pub vol_points: Vec<[f64; 2]>,
    pub vol_weights: Vec<f64>,
    pub w_val: Vec<[f64; 2]>,
    pub w_grad: Vec<[[f64; 2]; 2]>,
    pub w_div: Vec<f64>,
    pub p_val: Vec<f64>,
    pub p_grad: Vec<[f64; 2]>,
    pub facet_t: Vec<f64>,
    pub facet_w: Vec<f64>,
    pub fw_val: Vec<[f64; 2]>,
    pub fw_grad: Vec<[[f64; 2]; 2]>,
    pub leg: Vec<f64>,
    /// Geometry-independent divergence block `-int phi_a div v_j` on the reference element.
    pub b_ref: Vec<f64>,
    /// `mass_ref[2a + b][i * nw + j] = int v_i,a v_j,b` on the reference element.
    pub mass_ref: [Vec<f64>; 4],
}

impl ElementTables {
    pub fn nvq(&self) -> usize {
        self.vol_weights.len()
    }

    pub fn nfq(&self) -> usize {
        self.facet_w.len()
    }

    #[inline]
    pub fn fidx(&self, i: usize, q: usize, j: usize) -> usize {
        (i * self.nfq() + q) * self.nw + j
    }
}

fn build(k: usize, extra: usize) -> Result<ElementTables> {
    let bdm = bdm_element(k)?;
    let nw = bdm.ndofs();
    let pk = k - 1;
    let np = triangle_dim(pk);
    let rule = triangle_rule::<f64>(2 * k + 2 + extra);
    let g = gauss_rule::<f64>(k + 1 + extra.div_ceil(2));
    let nvq = rule.len();
    let mut w_val = vec![[0.0; 2]; nvq * nw];
    let mut w_grad = vec![[[0.0; 2]; 2]; nvq * nw];
    let mut p_val = vec![0.0; nvq * np];
    let mut p_grad = vec![[0.0; 2]; nvq * np];
    for (q, &p) in rule.points.iter().enumerate() {
        bdm.eval(p, &mut w_val[q * nw..(q + 1) * nw], &mut w_grad[q * nw..(q + 1) * nw]);
        dubiner_with_gradient(pk, p, &mut p_val[q * np..(q + 1) * np], &mut p_grad[q * np..(q + 1) * np]);
    }
    let w_div: Vec<f64> = w_grad.iter().map(|g| g[0][0] + g[1][1]).collect();
    let nfq = g.len();
    let facet_t: Vec<f64> = g.points.iter().map(|p| p[0]).collect();
    let mut fw_val = vec![[0.0; 2]; 3 * nfq * nw];
    let mut fw_grad = vec![[[0.0; 2]; 2]; 3 * nfq * nw];
    for i in 0..3 {
        for (q, &t) in facet_t.iter().enumerate() {
            let s = (i * nfq + q) * nw;
            bdm.eval(ref_facet_point(i, t), &mut fw_val[s..s + nw], &mut fw_grad[s..s + nw]);
        }
    }
    let mut leg = vec![0.0; nfq * (k + 1)];
    for (q, &t) in facet_t.iter().enumerate() {
        leg[q * (k + 1)..(q + 1) * (k + 1)].copy_from_slice(&legendre(k, t));
    }
    let mut b_ref = vec![0.0; np * nw];
    for q in 0..nvq {
        let w = rule.weights[q];
        for a in 0..np {
            let pa = p_val[q * np + a];
            for j in 0..nw {
                b_ref[a * nw + j] -= w * pa * w_div[q * nw + j];
            }
        }
    }
    let mut mass_ref: [Vec<f64>; 4] = Default::default();
    for (ab, m) in mass_ref.iter_mut().enumerate() {
        let (a, b) = (ab / 2, ab % 2);
        *m = vec![0.0; nw * nw];
        for q in 0..nvq {
            let w = rule.weights[q];
            let vals = &w_val[q * nw..(q + 1) * nw];
            for i in 0..nw {
                let vi = w * vals[i][a];
                for j in 0..nw {
                    m[i * nw + j] += vi * vals[j][b];
                }
            }
        }
    }
    Ok(ElementTables {
        k,
        bdm,
        nw,
        np,
        vol_points: rule.points,
        vol_weights: rule.weights,
        w_val,
        w_grad,
        w_div,
        p_val,
        p_grad,
        facet_t,
        facet_w: g.weights,
        fw_val,
        fw_grad,
        leg,
        b_ref,
        mass_ref,
    })
}

/// Cached tables for velocity order `k`; `extra` raises the quadrature degree
/// above the default `2k + 2` (element) and `2k + 1` (facet).
pub fn element_tables(k: usize, extra: usize) -> Result<Arc<ElementTables>> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<ElementTables>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&(k, extra)) {
        return Ok(t.clone());
    }
    let t = Arc::new(build(k, extra)?);
    Ok(cache
        .lock()
        .expect("table cache poisoned")
        .entry((k, extra))
        .or_insert(t)
        .clone())
}
