use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_divergence, assemble_norm_gram, assemble_viscosity, CsrMatrix, Discretization};
use crate::error::{Error, Result};
use crate::mesh::affine_map;

/// Largest number of free velocity unknowns accepted by the dense eigensolves.
pub const INFSUP_DIMENSION_LIMIT: usize = 6000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfSupReport {
    pub k: usize,
    pub h: f64,
    /// Smallest nonzero `sup_u B(u,p) / (|||u||| ||p||)`.
    pub c_lbb: f64,
    /// Smallest eigenvalue of `A` against `nu` times the energy-norm Gram matrix.
    pub c_co: f64,
}

fn dense(m: &CsrMatrix, rows: &[usize], cols: &[Option<usize>], ncols: usize) -> Mat<f64> {
    let mut d = Mat::<f64>::zeros(rows.len(), ncols);
    for (r, &row) in rows.iter().enumerate() {
        for (c, v) in m.row(row) {
            if let Some(cc) = cols[c] {
                d[(r, cc)] = v;
            }
        }
    }
    d
}

/// Dense estimates of the inf-sup and coercivity constants on the velocity space
/// with homogeneous boundary constraints.
pub fn estimate_infsup(disc: &Discretization, nu: f64, lambda: f64) -> Result<InfSupReport> {
    let nv = disc.nv();
    let constrained = disc.dirichlet_zero().indices;
    let mut is_c = vec![false; nv];
    for &c in &constrained {
        is_c[c] = true;
    }
    let free: Vec<usize> = (0..nv).filter(|&i| !is_c[i]).collect();
    let nfree = free.len();
    if nfree > INFSUP_DIMENSION_LIMIT {
        return Err(Error::DimensionLimit {
            n: nfree,
            limit: INFSUP_DIMENSION_LIMIT,
        });
    }
    let mut col = vec![None; nv];
    for (i, &f) in free.iter().enumerate() {
        col[f] = Some(i);
    }
    let n = dense(&assemble_norm_gram(disc)?, &free, &col, nfree);
    let llt = n
        .llt(Side::Lower)
        .map_err(|e| Error::SingularSystem(format!("energy-norm Gram matrix is not positive definite: {e:?}")))?;
    let l = llt.L();

    // S = B N^{-1} B^T scaled by the diagonal pressure mass
    let b = assemble_divergence(disc)?;
    let np = disc.np();
    let prow: Vec<usize> = (0..np).collect();
    let bd = dense(&b, &prow, &col, nfree);
    let mut x = bd.transpose().to_owned();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut pmass = vec![0.0; np];
    for e in 0..disc.mesh.num_elements() {
        let det = affine_map(&disc.mesh, e).det;
        for &d in disc.pressure.cell_dofs(e) {
            pmass[d] = det;
        }
    }
    let s = x.transpose() * &x;
    let s = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]) / (pmass[i] * pmass[j]).sqrt());
    let ev = s
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::BackendFailure(format!("eigensolver: {e:?}")))?;
    // without an outflow boundary the constant pressure is in the kernel of B^T
    let skip = usize::from(!disc.mesh.has_outflow());
    let c_lbb = ev.get(skip).copied().unwrap_or(0.0).max(0.0).sqrt();

    let a = dense(&assemble_viscosity(disc, nu, lambda)?, &free, &col, nfree);
    let mut y = a.clone();
    l.solve_lower_triangular_in_place(y.as_mut());
    let mut z = y.transpose().to_owned();
    l.solve_lower_triangular_in_place(z.as_mut());
    let c = Mat::<f64>::from_fn(nfree, nfree, |i, j| 0.5 * (z[(i, j)] + z[(j, i)]) / nu);
    let ev = c
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::BackendFailure(format!("eigensolver: {e:?}")))?;
    Ok(InfSupReport {
        k: disc.k,
        h: disc.mesh.h_max(),
        c_lbb,
        c_co: ev[0],
    })
}
