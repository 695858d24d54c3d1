use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::drag_lift;
use crate::assembly::Discretization;
use crate::error::Result;
use crate::mesh::{generate_channel_cylinder, generate_unit_square, Mesh};
use crate::problems::{channel_inflow, Lattice};
use crate::solvers::{
    run_unsteady, solve_stokes, Diagnostics, ImexConfig, ImexStepper, Scheme, SemiDiscretization, StokesVariant,
};
use crate::space::{interpolate_bdm, interpolate_facet, SpaceKind};

/// Settings shared by the time-dependent scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnsteadySettings {
    pub k: usize,
    pub nu: f64,
    pub lambda: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub semidisc: SemiDiscretization,
    pub post_reconstruct: bool,
    /// Record diagnostics every this many steps.
    pub stride: usize,
}

impl UnsteadySettings {
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn imex(&self) -> ImexConfig {
        ImexConfig {
            dt: self.dt,
            nu: self.nu,
            lambda: self.lambda,
            scheme: self.scheme,
            semidisc: self.semidisc,
            post_reconstruct: self.post_reconstruct,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub diagnostics: Vec<Diagnostics>,
    /// Largest relative growth of the `L2` norm over a single step.
    pub max_step_growth: f64,
    /// Largest `| ||u_h|| / ||u|| - 1 |` against the exact decay.
    pub max_decay_deviation: f64,
    pub final_norm: f64,
}

/// Planar lattice flow on the periodic unit square with `n x n` cells.
pub fn lattice_run(n: usize, s: &UnsteadySettings) -> Result<LatticeReport> {
    let mesh = Arc::new(generate_unit_square(n, true));
    let disc = Discretization::new(mesh.clone(), s.k, SpaceKind::WRelaxed)?;
    let w = interpolate_bdm(&mesh, &disc.w, &Lattice::initial)?;
    let f = interpolate_facet(&mesh, &disc.facet, &Lattice::initial)?;
    let mut u0 = w.coeffs;
    u0.extend_from_slice(&f.coeffs);
    let exact = Lattice { nu: s.nu };
    let mut stepper = ImexStepper::new(&disc, s.imex(), None, None)?;
    let mut state = stepper.state(0.0, u0, vec![0.0; disc.np()])?;
    let stride = s.stride.max(1);
    let steps = s.steps();
    let mut diagnostics = vec![Diagnostics::from_state(&state, None)];
    let (mut growth, mut deviation) = (f64::NEG_INFINITY, 0.0f64);
    for step in 1..=steps {
        let next = stepper.step(&state)?;
        let (a, b) = (state.l2_norm(), next.l2_norm());
        growth = growth.max((b - a) / a);
        deviation = deviation.max((b / exact.exact_norm(next.t) - 1.0).abs());
        state = next;
        if step % stride == 0 || step == steps {
            diagnostics.push(Diagnostics::from_state(&state, None));
        }
    }
    Ok(LatticeReport {
        diagnostics,
        max_step_growth: growth,
        max_decay_deviation: deviation,
        final_norm: state.l2_norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderReport {
    pub elements: usize,
    pub unknowns: usize,
    /// Diagnostics with drag and lift coefficients.
    pub diagnostics: Vec<Diagnostics>,
}

impl CylinderReport {
    /// `(t, c_D)` pairs of the recorded trace.
    pub fn drag_trace(&self) -> Vec<(f64, f64)> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.drag_lift.map(|(cd, _)| (d.t, cd)))
            .collect()
    }
}

/// Flow around the cylinder, started from the steady Stokes flow with the same inflow.
pub fn cylinder_run(mesh: Arc<Mesh>, s: &UnsteadySettings) -> Result<CylinderReport> {
    let disc = Discretization::new(mesh.clone(), s.k, SpaceKind::WRelaxed)?;
    let zero = |_: [f64; 2]| [0.0; 2];
    let stokes = solve_stokes(&disc, s.nu, s.lambda, &zero, &channel_inflow, StokesVariant::PR)?;
    let mut stepper = ImexStepper::new(&disc, s.imex(), Some(&channel_inflow), None)?;
    let state = stepper.state(0.0, stokes.composite(), stokes.pressure.coeffs.clone())?;
    let nw = disc.nw();
    let (_, diagnostics) = run_unsteady(&mut stepper, state, s.steps(), s.stride, |st| {
        drag_lift(&disc, &st.velocity[..nw], &st.pressure, s.nu).map(Some)
    })?;
    Ok(CylinderReport {
        elements: mesh.num_elements(),
        unknowns: stokes.stats.unknowns,
        diagnostics,
    })
}

/// Channel mesh size giving roughly 600 elements.
pub const CHANNEL_H_TARGET: f64 = 0.06;

pub fn default_channel_mesh() -> Result<Arc<Mesh>> {
    Ok(Arc::new(generate_channel_cylinder(CHANNEL_H_TARGET)?))
}
