use std::sync::Arc;

use super::dofmap::{DofMap, SpaceKind};
use crate::basis::bdm::{bdm_element, ref_facet_point};
use crate::basis::polynomials::{dubiner_with_gradient, legendre, triangle_dim};
use crate::basis::quadrature::gauss_rule;
use crate::error::{Error, Result};
use crate::mesh::{affine_map, AffineMap, Mesh};

/// Coefficient vector bound to a dof map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    pub dofmap: Arc<DofMap>,
    pub coeffs: Vec<f64>,
}

/// What to evaluate. Trace queries take facet parameters in `points[q][0]`,
/// measured along the element's local facet direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Value,
    Gradient,
    Divergence,
    NormalTrace { facet: usize },
    TangentialTrace { facet: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Scalars(Vec<f64>),
    Vectors(Vec<[f64; 2]>),
    Tensors(Vec<[[f64; 2]; 2]>),
}

impl FeFunction {
    pub fn zeros(dofmap: Arc<DofMap>) -> Self {
        let n = dofmap.ndofs;
        FeFunction {
            dofmap,
            coeffs: vec![0.0; n],
        }
    }

    pub fn new(dofmap: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofmap.ndofs {
            return Err(Error::MapMismatch {
                expected: format!("{} coefficients", dofmap.ndofs),
                found: format!("{}", coeffs.len()),
            });
        }
        Ok(FeFunction { dofmap, coeffs })
    }

    pub fn kind(&self) -> SpaceKind {
        self.dofmap.kind
    }
}

/// Physical values and gradients of a BDM function on one element at reference points.
/// Physical values and gradients at a set of points.
type ValuesAndGradients = (Vec<[f64; 2]>, Vec<[[f64; 2]; 2]>);

pub(crate) fn bdm_values(map: &AffineMap, k: usize, local: &[f64], points: &[[f64; 2]]) -> Result<ValuesAndGradients> {
    let el = bdm_element(k)?;
    let n = el.ndofs();
    let mut vals = vec![[0.0; 2]; n];
    let mut grads = vec![[[0.0; 2]; 2]; n];
    let mut out_v = Vec::with_capacity(points.len());
    let mut out_g = Vec::with_capacity(points.len());
    for &p in points {
        el.eval(p, &mut vals, &mut grads);
        let mut v = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for j in 0..n {
            let c = local[j];
            for a in 0..2 {
                v[a] += c * vals[j][a];
                for b in 0..2 {
                    g[a][b] += c * grads[j][a][b];
                }
            }
        }
        out_v.push(map.piola(v));
        out_g.push(map.piola_grad(g));
    }
    Ok((out_v, out_g))
}

/// Evaluates `f` on element `element` of `mesh`.
pub fn evaluate(f: &FeFunction, mesh: &Mesh, element: usize, points: &[[f64; 2]], what: Query) -> Result<Evaluation> {
    let map = affine_map(mesh, element);
    let dm = &f.dofmap;
    let local = dm.local_coeffs(element, &f.coeffs);
    match dm.kind {
        SpaceKind::WRelaxed | SpaceKind::WConf => match what {
            Query::Value | Query::Gradient | Query::Divergence => {
                let (v, g) = bdm_values(&map, dm.k, &local, points)?;
                Ok(match what {
                    Query::Value => Evaluation::Vectors(v),
                    Query::Gradient => Evaluation::Tensors(g),
                    _ => Evaluation::Scalars(g.iter().map(|g| g[0][0] + g[1][1]).collect()),
                })
            }
            Query::NormalTrace { facet } | Query::TangentialTrace { facet } => {
                let pts: Vec<[f64; 2]> = points.iter().map(|p| ref_facet_point(facet, p[0])).collect();
                let (v, _) = bdm_values(&map, dm.k, &local, &pts)?;
                let n = mesh.outward_normal(element, facet);
                let dir = if matches!(what, Query::NormalTrace { .. }) { n } else { [-n[1], n[0]] };
                Ok(Evaluation::Scalars(v.iter().map(|v| v[0] * dir[0] + v[1] * dir[1]).collect()))
            }
        },
        SpaceKind::Facet => match what {
            Query::TangentialTrace { facet } => {
                let k = dm.k;
                let c = &local[facet * k..(facet + 1) * k];
                Ok(Evaluation::Scalars(
                    points
                        .iter()
                        .map(|p| {
                            let l = legendre(k - 1, p[0]);
                            (0..k).map(|d| c[d] * l[d]).sum()
                        })
                        .collect(),
                ))
            }
            Query::NormalTrace { .. } => Ok(Evaluation::Scalars(vec![0.0; points.len()])),
            _ => Err(Error::MapMismatch {
                expected: "trace query".into(),
                found: "facet space".into(),
            }),
        },
        SpaceKind::Pressure | SpaceKind::Dg => {
            let m = dm.k;
            let np = triangle_dim(m);
            let comps = if dm.kind == SpaceKind::Dg { 2 } else { 1 };
            let scale = scalar_scale(dm.kind, &map);
            let mut phi = vec![0.0; np];
            let mut dphi = vec![[0.0; 2]; np];
            let mut vals = Vec::new();
            let mut grads = Vec::new();
            for &p in points {
                dubiner_with_gradient(m, p, &mut phi, &mut dphi);
                let mut v = [0.0; 2];
                let mut g = [[0.0; 2]; 2];
                for c in 0..comps {
                    for a in 0..np {
                        let x = local[c * np + a] * scale;
                        v[c] += x * phi[a];
                        let pg = map.scalar_grad(dphi[a]);
                        g[c][0] += x * pg[0];
                        g[c][1] += x * pg[1];
                    }
                }
                vals.push(v);
                grads.push(g);
            }
            Ok(match (what, comps) {
                (Query::Value, 1) => Evaluation::Scalars(vals.iter().map(|v| v[0]).collect()),
                (Query::Value, _) => Evaluation::Vectors(vals),
                (Query::Gradient, 1) => Evaluation::Vectors(grads.iter().map(|g| g[0]).collect()),
                (Query::Gradient, _) => Evaluation::Tensors(grads),
                (Query::Divergence, 2) => Evaluation::Scalars(grads.iter().map(|g| g[0][0] + g[1][1]).collect()),
                _ => {
                    return Err(Error::MapMismatch {
                        expected: "element query".into(),
                        found: dm.kind.name().into(),
                    })
                }
            })
        }
    }
}

/// Pressure functions are reference Dubiner functions composed with the map;
/// vector DG functions are additionally scaled to be orthonormal on the element.
pub(crate) fn scalar_scale(kind: SpaceKind, map: &AffineMap) -> f64 {
    if kind == SpaceKind::Dg {
        1.0 / map.det.sqrt()
    } else {
        1.0
    }
}

/// Number of extra quadrature degrees used when sampling non-polynomial data.
pub const DATA_EXTRA_DEGREE: usize = 8;

/// Moments `int_F (u . n_F) l_d(t) ds`, `d = 0..=k`, in the global facet direction.
pub fn facet_normal_moments(mesh: &Mesh, f: usize, k: usize, u: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let [a, b] = mesh.facets[f].vertices;
    let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
    let len = mesh.facet_length(f);
    let n = mesh.facet_normal(f);
    let g = gauss_rule::<f64>(k + 1 + DATA_EXTRA_DEGREE);
    let mut out = vec![0.0; k + 1];
    for (t, w) in g.points.iter().zip(&g.weights) {
        let t = t[0];
        let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
        let v = u(x);
        let vn = v[0] * n[0] + v[1] * n[1];
        let l = legendre(k, t);
        for d in 0..=k {
            out[d] += w * len * vn * l[d];
        }
    }
    out
}

/// Legendre coefficients (in the global facet parameter) of `u . tau_F`, degrees `0..k`.
pub fn facet_tangential_modes(mesh: &Mesh, f: usize, k: usize, u: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let [a, b] = mesh.facets[f].vertices;
    let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
    let tau = mesh.facet_tangent(f);
    super::projection::project_facet(
        |t| {
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            let v = u(x);
            v[0] * tau[0] + v[1] * tau[1]
        },
        k - 1,
    )
}

/// Canonical BDM interpolant: facet-normal, interior and complement moments of `u`.
pub fn interpolate_bdm(mesh: &Mesh, dofmap: &Arc<DofMap>, u: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<FeFunction> {
    if !dofmap.kind.is_bdm() {
        return Err(Error::MapMismatch {
            expected: "BDM space".into(),
            found: dofmap.kind.name().into(),
        });
    }
    let k = dofmap.k;
    let el = bdm_element(k)?;
    let mut coeffs = vec![0.0; dofmap.ndofs];
    for f in mesh.dof_facets() {
        let m = facet_normal_moments(mesh, f, k, u);
        for d in 0..k {
            coeffs[dofmap.facet_dofs[f][d]] = m[d];
        }
        for &t in &dofmap.facet_top[f] {
            coeffs[t] = m[k];
        }
    }
    let start = el.interior_start();
    for e in 0..mesh.num_elements() {
        let map = affine_map(mesh, e);
        let local = el.apply_dofs_with(DATA_EXTRA_DEGREE, |xh| pullback(&map, u(map.map(xh))));
        let dofs = dofmap.cell_dofs(e);
        for j in start..el.ndofs() {
            coeffs[dofs[j]] = local[j];
        }
    }
    FeFunction::new(dofmap.clone(), coeffs)
}

/// Inverse Piola transform: `det J * J^{-1} v`.
#[inline]
pub fn pullback(map: &AffineMap, v: [f64; 2]) -> [f64; 2] {
    let it = &map.inv_t;
    [
        map.det * (it[0][0] * v[0] + it[1][0] * v[1]),
        map.det * (it[0][1] * v[0] + it[1][1] * v[1]),
    ]
}

/// Facet-space interpolant: Legendre modes of the tangential trace of `u`.
pub fn interpolate_facet(mesh: &Mesh, dofmap: &Arc<DofMap>, u: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<FeFunction> {
    if dofmap.kind != SpaceKind::Facet {
        return Err(Error::MapMismatch {
            expected: "facet space".into(),
            found: dofmap.kind.name().into(),
        });
    }
    let mut coeffs = vec![0.0; dofmap.ndofs];
    for f in mesh.dof_facets() {
        let m = facet_tangential_modes(mesh, f, dofmap.k, u);
        for (d, &g) in dofmap.facet_dofs[f].iter().enumerate() {
            coeffs[g] = m[d];
        }
    }
    FeFunction::new(dofmap.clone(), coeffs)
}

/// Prescribed values of the Dirichlet DOFs of a BDM or facet space for boundary data `g`.
pub fn dirichlet_values(mesh: &Mesh, dofmap: &DofMap, g: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for f in mesh.dof_facets() {
        if !mesh.facets[f].tag.is_dirichlet() {
            continue;
        }
        let vals = if dofmap.kind.is_bdm() {
            facet_normal_moments(mesh, f, dofmap.k, g)
        } else {
            facet_tangential_modes(mesh, f, dofmap.k, g)
        };
        for (&dof, v) in dofmap.facet_dofs[f].iter().zip(vals) {
            out.push((dof, v));
        }
    }
    out.sort_by_key(|p| p.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_unit_square, Mesh};
    use crate::space::dofmap::build_dofmap;

    fn values(e: Evaluation) -> Vec<[f64; 2]> {
        match e {
            Evaluation::Vectors(v) => v,
            _ => panic!("expected vectors"),
        }
    }

    fn scalars(e: Evaluation) -> Vec<f64> {
        match e {
            Evaluation::Scalars(v) => v,
            _ => panic!("expected scalars"),
        }
    }

    fn distorted() -> Mesh {
        let mut m = generate_unit_square(3, false);
        let mut v = m.vertices.clone();
        for p in v.iter_mut() {
            let (x, y) = (p[0], p[1]);
            p[0] = x + 0.1 * (3.0 * x).sin() * y * (1.0 - y);
            p[1] = y + 0.07 * (2.0 * y).sin() * x * (1.0 - x);
        }
        m = Mesh::from_parts(v, m.elements.clone(), &[], &[]).unwrap();
        m
    }

    const PTS: [[f64; 2]; 3] = [[0.2, 0.3], [0.6, 0.1], [0.1, 0.8]];

    #[test]
    fn constants_are_reproduced() {
        let m = distorted();
        let dm = Arc::new(build_dofmap(&m, SpaceKind::WRelaxed, 2).unwrap());
        let f = interpolate_bdm(&m, &dm, &|_| [1.0, 0.0]).unwrap();
        for e in 0..m.num_elements() {
            for v in values(evaluate(&f, &m, e, &PTS, Query::Value).unwrap()) {
                assert!((v[0] - 1.0).abs() < 1e-13 && v[1].abs() < 1e-13);
            }
            for d in scalars(evaluate(&f, &m, e, &PTS, Query::Divergence).unwrap()) {
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solenoidal_polynomials_are_reproduced() {
        // curl of the stream function x^2 y^3 - x y
        let u = |x: [f64; 2]| [3.0 * x[0] * x[0] * x[1] * x[1] - x[0], -2.0 * x[0] * x[1].powi(3) + x[1]];
        let m = distorted();
        for kind in [SpaceKind::WRelaxed, SpaceKind::WConf] {
            let dm = Arc::new(build_dofmap(&m, kind, 4).unwrap());
            let f = interpolate_bdm(&m, &dm, &u).unwrap();
            for e in 0..m.num_elements() {
                let map = affine_map(&m, e);
                let vals = values(evaluate(&f, &m, e, &PTS, Query::Value).unwrap());
                for (p, v) in PTS.iter().zip(vals) {
                    let w = u(map.map(*p));
                    assert!((v[0] - w[0]).abs() < 1e-12 && (v[1] - w[1]).abs() < 1e-12);
                }
                for d in scalars(evaluate(&f, &m, e, &PTS, Query::Divergence).unwrap()) {
                    assert!(d.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = distorted();
        let dm = Arc::new(build_dofmap(&m, SpaceKind::WRelaxed, 3).unwrap());
        let f = interpolate_bdm(&m, &dm, &|x| [(2.0 * x[0]).sin() * x[1], (x[0] * x[1]).cos()]).unwrap();
        let e = 4;
        let map = affine_map(&m, e);
        let p = [0.3, 0.3];
        let g = match evaluate(&f, &m, e, &[p], Query::Gradient).unwrap() {
            Evaluation::Tensors(t) => t[0],
            _ => unreachable!(),
        };
        let h = 1e-6;
        for b in 0..2 {
            // physical displacement h e_b in reference coordinates
            let x = map.map(p);
            let mut xp = x;
            let mut xm = x;
            xp[b] += h;
            xm[b] -= h;
            let vp = values(evaluate(&f, &m, e, &[map.inverse(xp)], Query::Value).unwrap())[0];
            let vm = values(evaluate(&f, &m, e, &[map.inverse(xm)], Query::Value).unwrap())[0];
            for a in 0..2 {
                assert!(((vp[a] - vm[a]) / (2.0 * h) - g[a][b]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn relaxed_and_conforming_interpolants_agree() {
        let m = distorted();
        let u = |x: [f64; 2]| [x[1].exp(), x[0] * x[0]];
        let r = Arc::new(build_dofmap(&m, SpaceKind::WRelaxed, 3).unwrap());
        let c = Arc::new(build_dofmap(&m, SpaceKind::WConf, 3).unwrap());
        let fr = interpolate_bdm(&m, &r, &u).unwrap();
        let fc = interpolate_bdm(&m, &c, &u).unwrap();
        for e in 0..m.num_elements() {
            let a = r.local_coeffs(e, &fr.coeffs);
            let b = c.local_coeffs(e, &fc.coeffs);
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x, y);
            }
        }
    }
}
