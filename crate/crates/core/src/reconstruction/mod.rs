//! Reconstruction from the relaxed velocity space into the normal-continuous one.
//!
//! Lower facet moments and the `[P^{k-2}]^2` interior moments are copied, the top
//! normal mode of each facet becomes the mean of its two one-sided values, and the
//! remaining interior DOFs minimize the local `L2` distance to the input.

pub mod check;

pub use check::{check_reconstruction, ReconstructionCheck};

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::assembly::{CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};
use crate::mesh::{affine_map, Mesh};
use crate::space::{build_dofmap, element_tables, DofMap, FeFunction, SpaceKind};

#[derive(Debug, Clone)]
pub struct ReconstructionOp {
    pub source: Arc<DofMap>,
    pub target: Arc<DofMap>,
    /// `target x source` reconstruction matrix.
    pub matrix: CsrMatrix,
    /// `source x target` inclusion of conforming fields into the relaxed space.
    pub embedding: CsrMatrix,
    matrix_t: CsrMatrix,
}

pub fn build_reconstruction(mesh: &Mesh, source: &Arc<DofMap>) -> Result<ReconstructionOp> {
    if source.kind != SpaceKind::WRelaxed {
        return Err(Error::MapMismatch {
            expected: SpaceKind::WRelaxed.name().into(),
            found: source.kind.name().into(),
        });
    }
    let k = source.k;
    let target = Arc::new(build_dofmap(mesh, SpaceKind::WConf, k)?);
    let (nr, nc) = (source.ndofs, target.ndofs);
    let mut r = TripletBuilder::new(nc, nr);
    let mut emb = TripletBuilder::new(nr, nc);
    for f in mesh.dof_facets() {
        let (sf, tf) = (&source.facet_dofs[f], &target.facet_dofs[f]);
        for d in 0..k {
            r.push(tf[d], sf[d], 1.0);
            emb.push(sf[d], tf[d], 1.0);
        }
        let tops = &source.facet_top[f];
        let w = 1.0 / tops.len() as f64;
        let mut seen = Vec::new();
        for &s in tops {
            if !seen.contains(&s) {
                r.push(tf[k], s, if tops.iter().all(|&x| x == s) { 1.0 } else { w });
                emb.push(s, tf[k], 1.0);
                seen.push(s);
            }
        }
    }
    let tables = element_tables(k, 0)?;
    let nw = tables.nw;
    let bdm = &tables.bdm;
    let (istart, cstart) = (bdm.interior_start(), bdm.complement_start());
    let ncomp = nw - cstart;
    for e in 0..mesh.num_elements() {
        let (sd, td) = (source.cell_dofs(e), target.cell_dofs(e));
        for j in istart..nw {
            r.push(td[j], sd[j], 1.0);
            emb.push(sd[j], td[j], 1.0);
        }
        if ncomp == 0 {
            continue;
        }
        let map = affine_map(mesh, e);
        let g = map.metric();
        // Piola L2 inner product of two local basis functions
        let gram = |i: usize, j: usize| {
            let ij = i * nw + j;
            (g[0][0] * tables.mass_ref[0][ij]
                + g[0][1] * tables.mass_ref[1][ij]
                + g[1][0] * tables.mass_ref[2][ij]
                + g[1][1] * tables.mass_ref[3][ij])
                / map.det
        };
        let gcc = Mat::<f64>::from_fn(ncomp, ncomp, |a, b| gram(cstart + a, cstart + b));
        let lu = gcc.partial_piv_lu();
        let signs = source.cell_signs(e);
        for i in 0..3 {
            let f = mesh.element_facets[e][i];
            let tops = &source.facet_top[mesh.representative(f)];
            if tops.len() != 2 {
                continue;
            }
            let jt = bdm.facet_dof(i, k);
            let own = sd[jt];
            let other = if tops[0] == own { tops[1] } else { tops[0] };
            // local top change: sign * (mean - own) = sign * (other - own) / 2
            let rhs = Mat::<f64>::from_fn(ncomp, 1, |a, _| gram(cstart + a, jt));
            let x = lu.solve(&rhs);
            for a in 0..ncomp {
                let c = -x[(a, 0)] * signs[jt] * 0.5;
                // complement coefficients carry sign +1
                r.push(td[cstart + a], other, c);
                r.push(td[cstart + a], own, -c);
            }
        }
    }
    let matrix = r.build();
    let matrix_t = matrix.transpose();
    Ok(ReconstructionOp {
        source: source.clone(),
        target,
        matrix,
        embedding: emb.build(),
        matrix_t,
    })
}

impl ReconstructionOp {
    /// Reconstructed coefficients in the conforming space.
    pub fn apply_vec(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(&u[..self.source.ndofs])
    }

    /// Adjoint: maps a functional on the conforming space to one on the relaxed space.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        self.matrix_t.mul_vec(v)
    }

    /// Conforming coefficients viewed in the relaxed space.
    pub fn embed(&self, v: &[f64]) -> Vec<f64> {
        self.embedding.mul_vec(v)
    }

    /// Reconstruction followed by the embedding, as a map on the relaxed space.
    pub fn project_relaxed(&self, u: &[f64]) -> Vec<f64> {
        self.embed(&self.apply_vec(u))
    }

    pub fn apply(&self, u: &FeFunction) -> Result<FeFunction> {
        if u.dofmap.kind != SpaceKind::WRelaxed || u.dofmap.ndofs != self.source.ndofs {
            return Err(Error::MapMismatch {
                expected: format!("{} with {} dofs", SpaceKind::WRelaxed.name(), self.source.ndofs),
                found: format!("{} with {} dofs", u.dofmap.kind.name(), u.dofmap.ndofs),
            });
        }
        FeFunction::new(self.target.clone(), self.apply_vec(&u.coeffs))
    }

    /// Composite reconstruction `(u_W, u_F) -> (R u_W, u_F)`; the element part is returned
    /// in the conforming space, the facet part unchanged.
    pub fn reconstruct_composite(&self, u_w: &FeFunction, u_f: &FeFunction) -> Result<(FeFunction, FeFunction)> {
        Ok((self.apply(u_w)?, u_f.clone()))
    }
}
