use rayon::prelude::*;

use super::Discretization;
use crate::error::{Error, Result};
use crate::mesh::affine_map;
use crate::reconstruction::ReconstructionOp;
use crate::space::function::DATA_EXTRA_DEGREE;
use crate::space::{element_tables, DofMap, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsVariant {
    /// `<f, v>`
    Plain,
    /// `<f, R v>`
    Reconstructed,
}

/// Load vector on the composite velocity space (facet entries are zero).
#[derive(Debug, Clone, PartialEq)]
pub struct RhsFunctional {
    pub values: Vec<f64>,
    pub variant: RhsVariant,
}

/// `int_T f . psi_j` for the local BDM functions of every element.
pub fn element_loads(disc: &Discretization, f: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync)) -> Result<Vec<Vec<f64>>> {
    let t = element_tables(disc.k, DATA_EXTRA_DEGREE)?;
    let nw = t.nw;
    Ok((0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let map = affine_map(&disc.mesh, e);
            let j = map.jac;
            let mut r = vec![0.0; nw];
            for q in 0..t.nvq() {
                let fx = f(map.map(t.vol_points[q]));
                // det * f . (J v / det)
                let w = t.vol_weights[q];
                let fj = [fx[0] * j[0][0] + fx[1] * j[1][0], fx[0] * j[0][1] + fx[1] * j[1][1]];
                for (i, ri) in r.iter_mut().enumerate() {
                    let v = t.w_val[q * nw + i];
                    *ri += w * (fj[0] * v[0] + fj[1] * v[1]);
                }
            }
            r
        })
        .collect())
}

fn scatter(map: &DofMap, locals: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; map.ndofs];
    for (e, l) in locals.iter().enumerate() {
        map.scatter_add(e, l, &mut out);
    }
    out
}

/// Plain load `<f, v_T>` on the element velocity space of `disc` (length `nw`).
pub fn assemble_rhs_plain(disc: &Discretization, f: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync)) -> Result<Vec<f64>> {
    Ok(scatter(&disc.w, &element_loads(disc, f)?))
}

/// Composite load vector. The reconstructed variant tests with `R v_T`, realized as
/// the adjoint of the reconstruction applied to the load on the conforming space.
pub fn assemble_rhs(
    disc: &Discretization,
    f: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    variant: RhsVariant,
    recon: Option<&ReconstructionOp>,
) -> Result<RhsFunctional> {
    let locals = element_loads(disc, f)?;
    let w_part = match (variant, disc.w.kind) {
        (RhsVariant::Plain, _) | (RhsVariant::Reconstructed, SpaceKind::WConf) => scatter(&disc.w, &locals),
        (RhsVariant::Reconstructed, _) => {
            let r = recon.ok_or_else(|| Error::Config("reconstructed load needs a reconstruction operator".into()))?;
            r.apply_transpose(&scatter(&r.target, &locals))
        }
    };
    let mut values = w_part;
    values.resize(disc.nv(), 0.0);
    Ok(RhsFunctional { values, variant })
}
