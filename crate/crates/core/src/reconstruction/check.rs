//! Randomized verification of the reconstruction properties by direct quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::build_reconstruction;
use crate::analysis::{jump_seminorm_sq, velocity_errors, ExactFlow};
use crate::assembly::Discretization;
use crate::basis::polynomials::{dubiner_with_gradient, legendre, triangle_dim};
use crate::basis::{gauss_rule, triangle_rule};
use crate::error::Result;
use crate::mesh::affine_map;
use crate::space::{evaluate, Evaluation, FeFunction, Query};

/// Worst-case measurements over all samples for one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionCheck {
    pub k: usize,
    pub samples: usize,
    /// Largest normal jump of the output at facet quadrature points.
    pub normal_jump: f64,
    /// Largest change of a facet normal moment of order `< k`, relative to the input's moments.
    pub facet_moment: f64,
    /// Largest change of an interior moment against `[P^{k-2}]^2`, relative to the input's moments.
    pub interior_moment: f64,
    /// Largest `|||R v|||_1 / |||v|||_1`.
    pub stability: f64,
}

struct Zero;

impl ExactFlow for Zero {
    fn velocity(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn gradient(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn pressure(&self, _: [f64; 2]) -> f64 {
        0.0
    }
}

fn scalars(e: Evaluation) -> Vec<f64> {
    match e {
        Evaluation::Scalars(v) => v,
        _ => unreachable!("scalar query"),
    }
}

fn vectors(e: Evaluation) -> Vec<[f64; 2]> {
    match e {
        Evaluation::Vectors(v) => v,
        _ => unreachable!("vector query"),
    }
}

fn triple_norm(disc: &Discretization, u_w: &[f64], u_f: &[f64]) -> Result<f64> {
    let (_, h1) = velocity_errors(&disc.mesh, &disc.w, u_w, &Zero, 0)?;
    Ok((h1 * h1 + jump_seminorm_sq(disc, u_w, u_f)?).sqrt())
}

/// Applies the reconstruction to `samples` random relaxed fields (with random facet
/// parts for the stability ratio) and measures each property independently of the
/// DOF layout.
pub fn check_reconstruction(disc: &Discretization, samples: usize, seed: u64) -> Result<ReconstructionCheck> {
    let mesh = &disc.mesh;
    let k = disc.k;
    let op = build_reconstruction(mesh, &disc.w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64) << 32);
    let g = gauss_rule::<f64>(k + 2);
    let fpts: Vec<[f64; 2]> = g.points.iter().map(|p| [p[0], 0.0]).collect();
    let vrule = triangle_rule::<f64>(2 * k + 2);
    let ni = if k >= 2 { triangle_dim(k - 2) } else { 0 };
    let mut phi = vec![0.0; ni];
    let mut dphi = vec![[0.0; 2]; ni];
    let mut report = ReconstructionCheck {
        k,
        samples,
        normal_jump: 0.0,
        facet_moment: 0.0,
        interior_moment: 0.0,
        stability: 0.0,
    };
    for _ in 0..samples {
        let v: Vec<f64> = (0..disc.nw()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vf: Vec<f64> = (0..disc.nf()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rv = op.apply_vec(&v);
        let input = FeFunction::new(disc.w.clone(), v.clone())?;
        let output = FeFunction::new(op.target.clone(), rv.clone())?;
        for f in mesh.dof_facets() {
            let sides = mesh.linked_sides(f);
            if sides.len() != 2 {
                continue;
            }
            let mut traces = Vec::new();
            for ls in &sides {
                let pts: Vec<[f64; 2]> = fpts
                    .iter()
                    .map(|p| if ls.side.sign > 0 { *p } else { [1.0 - p[0], 0.0] })
                    .collect();
                let q = Query::NormalTrace { facet: ls.side.local };
                traces.push(scalars(evaluate(&output, mesh, ls.side.element, &pts, q)?));
            }
            for (a, b) in traces[0].iter().zip(&traces[1]) {
                report.normal_jump = report.normal_jump.max((a + b).abs());
            }
        }
        let (mut fdiff, mut fscale, mut idiff, mut iscale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for e in 0..mesh.num_elements() {
            for i in 0..3 {
                let q = Query::NormalTrace { facet: i };
                let a = scalars(evaluate(&input, mesh, e, &fpts, q)?);
                let b = scalars(evaluate(&output, mesh, e, &fpts, q)?);
                for d in 0..=k {
                    let (mut ma, mut mb) = (0.0, 0.0);
                    for (j, p) in g.points.iter().enumerate() {
                        let l = legendre(k, p[0])[d] * g.weights[j];
                        ma += l * a[j];
                        mb += l * b[j];
                    }
                    fscale = fscale.max(ma.abs());
                    if d < k {
                        fdiff = fdiff.max((ma - mb).abs());
                    }
                }
            }
            if ni == 0 {
                continue;
            }
            let am = affine_map(mesh, e);
            let a = vectors(evaluate(&input, mesh, e, &vrule.points, Query::Value)?);
            let b = vectors(evaluate(&output, mesh, e, &vrule.points, Query::Value)?);
            let mut ma = vec![[0.0; 2]; ni];
            let mut mb = vec![[0.0; 2]; ni];
            for (j, p) in vrule.points.iter().enumerate() {
                dubiner_with_gradient(k - 2, *p, &mut phi, &mut dphi);
                let w = vrule.weights[j] * am.det;
                for m in 0..ni {
                    for c in 0..2 {
                        ma[m][c] += w * phi[m] * a[j][c];
                        mb[m][c] += w * phi[m] * b[j][c];
                    }
                }
            }
            for m in 0..ni {
                for c in 0..2 {
                    iscale = iscale.max(ma[m][c].abs());
                    idiff = idiff.max((ma[m][c] - mb[m][c]).abs());
                }
            }
        }
        report.facet_moment = report.facet_moment.max(fdiff / fscale.max(f64::MIN_POSITIVE));
        if ni > 0 {
            report.interior_moment = report.interior_moment.max(idiff / iscale.max(f64::MIN_POSITIVE));
        }
        let before = triple_norm(disc, &v, &vf)?;
        let after = triple_norm(disc, &op.embed(&rv), &vf)?;
        report.stability = report.stability.max(after / before);
    }
    Ok(report)
}
