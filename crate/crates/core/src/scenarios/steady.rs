use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    compute_errors, div_max, estimate_infsup, fit_h_rate, normal_jump_max, velocity_errors, ErrorReport, ExactFlow,
    InfSupReport, ERROR_OVERQUAD,
};
use crate::assembly::Discretization;
use crate::error::Result;
use crate::mesh::{generate_unit_square, Mesh};
use crate::problems::{GradientForcing, Kovasznay, Manufactured};
use crate::reconstruction::build_reconstruction;
use crate::solvers::{solve_stokes, SolveStats, StokesVariant, VectorField};
use crate::space::SpaceKind;

/// Errors of one steady solve, before and after reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyCase {
    /// `B`, `PR`, or `conf` for the normal-continuous pair.
    pub label: String,
    pub report: ErrorReport,
    /// Broken `H1` error of the reconstructed velocity (relaxed spaces only).
    pub post_h1: Option<f64>,
    pub stats: SolveStats,
}

/// Solves one steady problem and measures its errors.
#[allow(clippy::too_many_arguments)]
pub fn steady_case(
    mesh: &Arc<Mesh>,
    k: usize,
    kind: SpaceKind,
    variant: StokesVariant,
    nu: f64,
    lambda: f64,
    f: VectorField,
    g: VectorField,
    exact: &dyn ExactFlow,
) -> Result<SteadyCase> {
    let disc = Discretization::new(mesh.clone(), k, kind)?;
    let s = solve_stokes(&disc, nu, lambda, f, g, variant)?;
    let report = compute_errors(
        &disc,
        exact,
        &s.velocity.coeffs,
        &s.facet.coeffs,
        &s.pressure.coeffs,
        ERROR_OVERQUAD,
    )?;
    let post_h1 = if kind == SpaceKind::WRelaxed {
        let op = build_reconstruction(mesh, &disc.w)?;
        let r = op.apply(&s.velocity)?;
        Some(velocity_errors(mesh, &op.target, &r.coeffs, exact, ERROR_OVERQUAD)?.1)
    } else {
        None
    };
    let label = match kind {
        SpaceKind::WConf => "conf".to_string(),
        _ => variant.name().to_string(),
    };
    Ok(SteadyCase {
        label,
        report,
        post_h1,
        stats: s.stats,
    })
}

/// Kovasznay flow as a steady Stokes problem with `f = -(u . grad) u`, for every
/// order and variant; `conforming` adds the normal-continuous pair.
pub fn kovasznay_study(
    mesh: &Arc<Mesh>,
    ks: &[usize],
    variants: &[StokesVariant],
    nu: f64,
    lambda: f64,
    conforming: bool,
) -> Result<Vec<SteadyCase>> {
    let kov = Kovasznay::new(nu);
    let f = |x: [f64; 2]| kov.forcing(x);
    let g = |x: [f64; 2]| kov.velocity(x);
    let mut out = Vec::new();
    for &k in ks {
        for &v in variants {
            out.push(steady_case(mesh, k, SpaceKind::WRelaxed, v, nu, lambda, &f, &g, &kov)?);
        }
        if conforming {
            out.push(steady_case(mesh, k, SpaceKind::WConf, StokesVariant::B, nu, lambda, &f, &g, &kov)?);
        }
    }
    Ok(out)
}

/// h-refinement study of the manufactured solution on uniform unit-square meshes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub k: usize,
    pub cases: Vec<SteadyCase>,
    /// Least-squares rate of the broken `H1` velocity error.
    pub h1_rate: Option<f64>,
    /// Least-squares rate of the `L2` pressure error.
    pub pressure_rate: Option<f64>,
}

pub fn manufactured_study(k: usize, ns: &[usize], variant: StokesVariant, lambda: f64) -> Result<RefinementStudy> {
    let man = Manufactured { nu: 1.0 };
    let f = |x: [f64; 2]| man.forcing(x);
    let zero = |_: [f64; 2]| [0.0; 2];
    let mut cases = Vec::new();
    for &n in ns {
        let mesh = Arc::new(generate_unit_square(n, false));
        cases.push(steady_case(&mesh, k, SpaceKind::WRelaxed, variant, man.nu, lambda, &f, &zero, &man)?);
    }
    let h: Vec<f64> = cases.iter().map(|c| c.report.h).collect();
    let e1: Vec<f64> = cases.iter().map(|c| c.report.h1_u).collect();
    let ep: Vec<f64> = cases.iter().map(|c| c.report.l2_p).collect();
    Ok(RefinementStudy {
        k,
        h1_rate: fit_h_rate(&h, &e1),
        pressure_rate: fit_h_rate(&h, &ep),
        cases,
    })
}

/// Velocity norms produced by a pure gradient force with homogeneous Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientResponse {
    pub k: usize,
    pub nu: f64,
    pub norm_b: f64,
    pub norm_pr: f64,
}

pub fn gradient_response(mesh: &Arc<Mesh>, k: usize, nu: f64, lambda: f64) -> Result<GradientResponse> {
    let f = |x: [f64; 2]| GradientForcing.forcing(x);
    let zero = |_: [f64; 2]| [0.0; 2];
    let norm = |v| -> Result<f64> {
        let c = steady_case(mesh, k, SpaceKind::WRelaxed, v, nu, lambda, &f, &zero, &GradientForcing)?;
        Ok(c.report.l2_u)
    };
    Ok(GradientResponse {
        k,
        nu,
        norm_b: norm(StokesVariant::B)?,
        norm_pr: norm(StokesVariant::PR)?,
    })
}

/// Divergence and normal continuity of a reconstructed steady solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCheck {
    pub k: usize,
    /// Largest `|div u|` at element quadrature points.
    pub div_max: f64,
    pub normal_jump_max: f64,
}

/// Pressure-robust solve of the manufactured problem followed by reconstruction.
pub fn divergence_check(mesh: &Arc<Mesh>, k: usize, lambda: f64) -> Result<DivergenceCheck> {
    let man = Manufactured { nu: 1.0 };
    let disc = Discretization::new(mesh.clone(), k, SpaceKind::WRelaxed)?;
    let s = solve_stokes(&disc, man.nu, lambda, &|x| man.forcing(x), &|_| [0.0; 2], StokesVariant::PR)?;
    let op = build_reconstruction(mesh, &disc.w)?;
    let r = op.apply(&s.velocity)?;
    Ok(DivergenceCheck {
        k,
        div_max: div_max(mesh, &op.target, &r.coeffs)?,
        normal_jump_max: normal_jump_max(mesh, &op.target, &r.coeffs)?,
    })
}

/// Inf-sup and coercivity estimates for each order on a fixed mesh.
pub fn infsup_study(mesh: &Arc<Mesh>, ks: &[usize], nu: f64, lambda: f64) -> Result<Vec<InfSupReport>> {
    ks.iter()
        .map(|&k| estimate_infsup(&Discretization::new(mesh.clone(), k, SpaceKind::WRelaxed)?, nu, lambda))
        .collect()
}
