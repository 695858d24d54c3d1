use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::linear::{factorize, Factorization};
use crate::assembly::{
    assemble_divergence, assemble_mass, assemble_rhs, assemble_viscosity, mean_pressure_vector, CsrMatrix,
    Discretization, RhsVariant, SparseSystem,
};
use crate::error::{Error, Result};
use crate::reconstruction::{build_reconstruction, ReconstructionOp};
use crate::space::{FeFunction, SpaceKind};

/// Vector field callback usable from parallel assembly.
pub type VectorField<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Steady discretization: plain load or load tested with reconstructed functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StokesVariant {
    B,
    PR,
}

impl StokesVariant {
    pub fn rhs_variant(self) -> RhsVariant {
        match self {
            StokesVariant::B => RhsVariant::Plain,
            StokesVariant::PR => RhsVariant::Reconstructed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StokesVariant::B => "B",
            StokesVariant::PR => "PR",
        }
    }
}

impl std::str::FromStr for StokesVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "B" => Ok(StokesVariant::B),
            "PR" => Ok(StokesVariant::PR),
            _ => Err(Error::Config(format!("unknown variant `{s}` (expected B or PR)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub unknowns: usize,
    pub nnz: usize,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    /// Element velocity in the space of the discretization.
    pub velocity: FeFunction,
    pub facet: FeFunction,
    pub pressure: FeFunction,
    /// `max |B u|` over pressure test functions.
    pub divergence_residual: f64,
    pub stats: SolveStats,
}

impl StokesSolution {
    /// Composite velocity vector `[u_W | u_F]`.
    pub fn composite(&self) -> Vec<f64> {
        let mut v = self.velocity.coeffs.clone();
        v.extend_from_slice(&self.facet.coeffs);
        v
    }
}

/// The assembled operators of one discretization.
#[derive(Debug, Clone)]
pub struct StokesOperators {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub mass: CsrMatrix,
    pub mean: Option<Vec<f64>>,
    pub recon: Option<ReconstructionOp>,
}

pub fn assemble_operators(disc: &Discretization, nu: f64, lambda: f64) -> Result<StokesOperators> {
    if !(nu > 0.0) || !(lambda > 0.0) {
        return Err(Error::Config(format!("need nu > 0 and lambda > 0 (got {nu}, {lambda})")));
    }
    let recon = if disc.w.kind == SpaceKind::WRelaxed {
        Some(build_reconstruction(&disc.mesh, &disc.w)?)
    } else {
        None
    };
    Ok(StokesOperators {
        a: assemble_viscosity(disc, nu, lambda)?,
        b: assemble_divergence(disc)?,
        mass: assemble_mass(disc)?,
        mean: (!disc.mesh.has_outflow()).then(|| mean_pressure_vector(disc)),
        recon,
    })
}

/// Splits a reduced solution into functions and reports the discrete divergence.
pub(crate) fn unpack(
    disc: &Discretization,
    system: &SparseSystem,
    x: &[f64],
    lift: &[f64],
    stats: SolveStats,
) -> Result<StokesSolution> {
    let (u, p) = system.expand(x, lift);
    let bu = system.b.mul_vec(&u);
    let divergence_residual = bu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(StokesSolution {
        velocity: FeFunction::new(disc.w.clone(), u[..disc.nw()].to_vec())?,
        facet: FeFunction::new(disc.facet.clone(), u[disc.nw()..].to_vec())?,
        pressure: FeFunction::new(disc.pressure.clone(), p)?,
        divergence_residual,
        stats,
    })
}

/// Steady Stokes solve with forcing `f` and velocity boundary data `g`.
pub fn solve_stokes(
    disc: &Discretization,
    nu: f64,
    lambda: f64,
    f: VectorField,
    g: VectorField,
    variant: StokesVariant,
) -> Result<StokesSolution> {
    let t0 = Instant::now();
    let ops = assemble_operators(disc, nu, lambda)?;
    let rhs = assemble_rhs(disc, f, variant.rhs_variant(), ops.recon.as_ref())?;
    let dir = disc.dirichlet(g);
    let system = SparseSystem::new(ops.a, ops.b, ops.mean, &dir.indices);
    let lift = dir.lift();
    let r = system.reduced_rhs(&rhs.values, &vec![0.0; disc.np()], &lift);
    let assembly_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let fact: Factorization = factorize(&system.matrix)?;
    let x = fact.solve(&r)?;
    let stats = SolveStats {
        unknowns: system.size(),
        nnz: system.matrix.nnz(),
        assembly_seconds,
        solve_seconds: t1.elapsed().as_secs_f64(),
    };
    unpack(disc, &system, &x, &lift, stats)
}

/// Saddle-point matrix of a steady solve, for debugging dumps.
pub fn stokes_system(disc: &Discretization, nu: f64, lambda: f64) -> Result<SparseSystem> {
    let ops = assemble_operators(disc, nu, lambda)?;
    let dir = disc.dirichlet_zero();
    Ok(SparseSystem::new(ops.a, ops.b, ops.mean, &dir.indices))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::analysis::{pressure_error, velocity_errors, ExactFlow};
    use crate::mesh::{generate_unit_square, kovasznay_mesh};
    use crate::solvers::linear::dense_solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Rigid rotation with a linear pressure: `-Delta u = 0`, `f = grad p`.
    struct Rotation;

    impl ExactFlow for Rotation {
        fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
            [x[1], -x[0]]
        }
        fn gradient(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
            [[0.0, 1.0], [-1.0, 0.0]]
        }
        fn pressure(&self, x: [f64; 2]) -> f64 {
            x[0] - 0.5
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let disc = Discretization::new(Arc::new(generate_unit_square(3, false)), 2, SpaceKind::WRelaxed).unwrap();
        for variant in [StokesVariant::B, StokesVariant::PR] {
            let s = solve_stokes(&disc, 1.0, 4.0, &|_| [0.0; 2], &|_| [0.0; 2], variant).unwrap();
            assert!(s.composite().iter().chain(&s.pressure.coeffs).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_flows_are_reproduced() {
        let mesh = Arc::new(kovasznay_mesh(20));
        let ex = Rotation;
        for kind in [SpaceKind::WRelaxed, SpaceKind::WConf] {
            // the linear pressure needs k >= 2
            for k in 2..=4 {
                let disc = Discretization::new(mesh.clone(), k, kind).unwrap();
                for variant in [StokesVariant::B, StokesVariant::PR] {
                    let s = solve_stokes(&disc, 0.5, 4.0, &|_| [1.0, 0.0], &|x| ex.velocity(x), variant).unwrap();
                    let (l2, h1) = velocity_errors(&mesh, &disc.w, &s.velocity.coeffs, &ex, 2).unwrap();
                    let lp = pressure_error(&mesh, &disc.pressure, &s.pressure.coeffs, &ex, 2).unwrap();
                    assert!(l2 < 1e-9 && h1 < 1e-9 && lp < 1e-9, "{kind:?} k={k} {variant:?}: {l2:e} {h1:e} {lp:e}");
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_solves_agree() {
        let disc = Discretization::new(Arc::new(generate_unit_square(2, false)), 2, SpaceKind::WRelaxed).unwrap();
        let sys = stokes_system(&disc, 1.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b: Vec<f64> = (0..sys.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = factorize(&sys.matrix).unwrap().solve(&b).unwrap();
        let y = dense_solve(&sys.matrix, &b).unwrap();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in x.iter().zip(&y) {
            assert!((x - y).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn variant_names_parse() {
        assert_eq!("pr".parse::<StokesVariant>().unwrap(), StokesVariant::PR);
        assert_eq!(" B ".parse::<StokesVariant>().unwrap(), StokesVariant::B);
        assert!(matches!("C".parse::<StokesVariant>(), Err(Error::Config(_))));
    }
}
