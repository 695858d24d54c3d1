//! Implicit-explicit time stepping: implicit Stokes operator, explicit convection.

use serde::{Deserialize, Serialize};

use super::linear::{factorize, Factorization};
use super::stokes::{assemble_operators, StokesOperators};
use crate::analysis::{div_max, normal_jump_max};
use crate::assembly::{convection_local, BoundaryData, Dirichlet, Discretization, SparseSystem};
use crate::error::{Error, Result};
use crate::space::DofMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// First-order backward/forward Euler splitting.
    Imex1,
    /// Second-order backward differences with extrapolated convection.
    Sbdf2,
}

/// Which arguments of the convection form are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemiDiscretization {
    /// `C(u; u, v)`
    A,
    /// `C(u; u, R v)`
    B,
    /// `C(R u; u, v)`
    C,
    /// `C(R u; R u, R v)`
    D,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "imex1" => Ok(Scheme::Imex1),
            "sbdf2" => Ok(Scheme::Sbdf2),
            _ => Err(Error::Config(format!("unknown scheme `{s}` (expected imex1 or sbdf2)"))),
        }
    }
}

impl std::str::FromStr for SemiDiscretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(SemiDiscretization::A),
            "b" => Ok(SemiDiscretization::B),
            "c" => Ok(SemiDiscretization::C),
            "d" => Ok(SemiDiscretization::D),
            _ => Err(Error::Config(format!("unknown semi-discretization `{s}` (expected a, b, c or d)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImexConfig {
    pub dt: f64,
    pub nu: f64,
    pub lambda: f64,
    pub scheme: Scheme,
    pub semidisc: SemiDiscretization,
    /// Replace every new velocity by its reconstruction.
    pub post_reconstruct: bool,
    /// Multiplies the convection term; 0 gives the unsteady Stokes problem.
    pub convection_scale: f64,
    /// Energy growth factor over the reference energy that counts as a blow-up.
    pub blowup_factor: f64,
}

impl Default for ImexConfig {
    fn default() -> Self {
        ImexConfig {
            dt: 1e-3,
            nu: 1e-3,
            lambda: crate::assembly::DEFAULT_LAMBDA,
            scheme: Scheme::Imex1,
            semidisc: SemiDiscretization::D,
            post_reconstruct: true,
            convection_scale: 1.0,
            blowup_factor: 1e3,
        }
    }
}

/// Velocity and pressure at one time level with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    /// Composite velocity `[u_W | u_F]`.
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// `1/2 ||u_T||^2`.
    pub energy: f64,
    pub div_max: f64,
    pub normal_jump_max: f64,
}

impl FlowState {
    pub fn l2_norm(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }
}

/// Time stepper holding the assembled operators and the factorized implicit matrices.
pub struct ImexStepper<'a> {
    pub disc: &'a Discretization,
    pub config: ImexConfig,
    ops: StokesOperators,
    dirichlet: Dirichlet,
    boundary: Option<BoundaryData<'a>>,
    load: Vec<f64>,
    first_order: (SparseSystem, Factorization),
    second_order: Option<(SparseSystem, Factorization)>,
    previous: Option<(Vec<f64>, Vec<f64>)>,
    reference_energy: Option<f64>,
}

fn implicit_system(ops: &StokesOperators, alpha: f64, dirichlet: &Dirichlet) -> Result<(SparseSystem, Factorization)> {
    let a = ops.a.add_scaled(alpha, &ops.mass);
    let system = SparseSystem::new(a, ops.b.clone(), ops.mean.clone(), &dirichlet.indices);
    let f = factorize(&system.matrix)?;
    Ok((system, f))
}

impl<'a> ImexStepper<'a> {
    /// `boundary` supplies velocity Dirichlet data (and the upwind inflow value);
    /// `load` is an optional constant forcing vector on the composite velocity space.
    pub fn new(
        disc: &'a Discretization,
        config: ImexConfig,
        boundary: Option<BoundaryData<'a>>,
        load: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(config.dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive (got {})", config.dt)));
        }
        let ops = assemble_operators(disc, config.nu, config.lambda)?;
        let dirichlet = match boundary {
            Some(g) => disc.dirichlet(g),
            None => disc.dirichlet_zero(),
        };
        let first_order = implicit_system(&ops, 1.0 / config.dt, &dirichlet)?;
        let second_order = match config.scheme {
            Scheme::Imex1 => None,
            Scheme::Sbdf2 => Some(implicit_system(&ops, 1.5 / config.dt, &dirichlet)?),
        };
        Ok(ImexStepper {
            disc,
            config,
            ops,
            dirichlet,
            boundary,
            load: load.unwrap_or_else(|| vec![0.0; disc.nv()]),
            first_order,
            second_order,
            previous: None,
            reference_energy: None,
        })
    }

    pub fn dirichlet(&self) -> &Dirichlet {
        &self.dirichlet
    }

    /// Reconstructed element velocity viewed in the relaxed space (identity for conforming spaces).
    pub fn reconstruct(&self, u_w: &[f64]) -> Vec<f64> {
        match &self.ops.recon {
            Some(r) => r.project_relaxed(u_w),
            None => u_w.to_vec(),
        }
    }

    /// State with diagnostics for a composite velocity.
    pub fn state(&self, t: f64, velocity: Vec<f64>, pressure: Vec<f64>) -> Result<FlowState> {
        let nw = self.disc.nw();
        let energy = 0.5 * self.ops.mass.bilinear(&velocity, &velocity);
        let mesh = &self.disc.mesh;
        Ok(FlowState {
            t,
            energy,
            div_max: div_max(mesh, &self.disc.w, &velocity[..nw])?,
            normal_jump_max: normal_jump_max(mesh, &self.disc.w, &velocity[..nw])?,
            velocity,
            pressure,
        })
    }

    /// Convection vector on the element velocity space for the configured variant.
    pub fn convection(&self, velocity: &[f64]) -> Result<Vec<f64>> {
        let disc = self.disc;
        let nw = disc.nw();
        let u = &velocity[..nw];
        let scatter = |map: &DofMap, locals: Vec<Vec<f64>>| {
            let mut out = vec![0.0; map.ndofs];
            for (e, l) in locals.iter().enumerate() {
                map.scatter_add(e, l, &mut out);
            }
            out
        };
        let local = |map: &DofMap, v: &[f64]| -> Vec<Vec<f64>> {
            (0..disc.mesh.num_elements()).map(|e| map.local_coeffs(e, v)).collect()
        };
        let g = self.boundary;
        let Some(r) = &self.ops.recon else {
            let ul = local(&disc.w, u);
            return Ok(scatter(&disc.w, convection_local(disc, &ul, &ul, g)?));
        };
        let ul = local(&disc.w, u);
        Ok(match self.config.semidisc {
            SemiDiscretization::A => scatter(&disc.w, convection_local(disc, &ul, &ul, g)?),
            SemiDiscretization::B => r.apply_transpose(&scatter(&r.target, convection_local(disc, &ul, &ul, g)?)),
            SemiDiscretization::C => {
                let wl = local(&r.target, &r.apply_vec(u));
                scatter(&disc.w, convection_local(disc, &wl, &ul, g)?)
            }
            SemiDiscretization::D => {
                let wl = local(&r.target, &r.apply_vec(u));
                r.apply_transpose(&scatter(&r.target, convection_local(disc, &wl, &wl, g)?))
            }
        })
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &FlowState) -> Result<FlowState> {
        let cfg = self.config;
        let nw = self.disc.nw();
        let dt = cfg.dt;
        if self.reference_energy.is_none() && state.energy > 0.0 {
            self.reference_energy = Some(state.energy);
        }
        let mut c = self.convection(&state.velocity)?;
        c.iter_mut().for_each(|v| *v *= cfg.convection_scale);
        let mu = self.ops.mass.mul_vec(&state.velocity);
        let mut rhs = self.load.clone();
        let use_second = cfg.scheme == Scheme::Sbdf2 && self.previous.is_some();
        if use_second {
            let (u_prev, c_prev) = self.previous.as_ref().expect("previous step");
            let mu_prev = self.ops.mass.mul_vec(u_prev);
            for i in 0..self.disc.nv() {
                rhs[i] += (4.0 * mu[i] - mu_prev[i]) / (2.0 * dt);
            }
            for i in 0..nw {
                rhs[i] -= 2.0 * c[i] - c_prev[i];
            }
        } else {
            for i in 0..self.disc.nv() {
                rhs[i] += mu[i] / dt;
            }
            for i in 0..nw {
                rhs[i] -= c[i];
            }
        }
        let (system, fact) = if use_second {
            let s = self.second_order.as_ref().expect("second-order system");
            (&s.0, &s.1)
        } else {
            (&self.first_order.0, &self.first_order.1)
        };
        let lift = self.dirichlet.lift();
        let r = system.reduced_rhs(&rhs, &vec![0.0; self.disc.np()], &lift);
        let x = fact.solve(&r)?;
        let (mut u, p) = system.expand(&x, &lift);
        if cfg.post_reconstruct {
            let ru = self.reconstruct(&u[..nw]);
            u[..nw].copy_from_slice(&ru);
        }
        if cfg.scheme == Scheme::Sbdf2 {
            self.previous = Some((state.velocity.clone(), c));
        }
        let next = self.state(state.t + dt, u, p)?;
        if let Some(e0) = self.reference_energy {
            let limit = cfg.blowup_factor * e0;
            if !(next.energy <= limit) {
                return Err(Error::Blowup {
                    t: next.t,
                    energy: next.energy,
                    limit,
                });
            }
        }
        Ok(next)
    }
}

/// Per-step diagnostics record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    /// `L2` norm of the velocity.
    pub norm: f64,
    pub div_max: f64,
    pub normal_jump_max: f64,
    pub drag_lift: Option<(f64, f64)>,
}

impl Diagnostics {
    pub fn from_state(s: &FlowState, drag_lift: Option<(f64, f64)>) -> Self {
        Diagnostics {
            t: s.t,
            norm: s.l2_norm(),
            div_max: s.div_max,
            normal_jump_max: s.normal_jump_max,
            drag_lift,
        }
    }
}

/// Runs `steps` steps from `initial`, recording diagnostics every `stride` steps
/// (and at the final step). `observe` may attach force coefficients.
pub fn run_unsteady(
    stepper: &mut ImexStepper,
    initial: FlowState,
    steps: usize,
    stride: usize,
    mut observe: impl FnMut(&FlowState) -> Result<Option<(f64, f64)>>,
) -> Result<(FlowState, Vec<Diagnostics>)> {
    let stride = stride.max(1);
    let mut out = vec![Diagnostics::from_state(&initial, observe(&initial)?)];
    let mut state = initial;
    for n in 1..=steps {
        state = stepper.step(&state)?;
        if n % stride == 0 || n == steps {
            out.push(Diagnostics::from_state(&state, observe(&state)?));
        }
    }
    Ok((state, out))
}

/// Diagnostics CSV with header `t,energy,div_max,normal_jump_max[,cd,cl]`; the energy
/// column holds the `L2` norm.
pub fn diagnostics_csv(rows: &[Diagnostics]) -> String {
    let forces = rows.iter().any(|r| r.drag_lift.is_some());
    let mut s = String::from("t,energy,div_max,normal_jump_max");
    if forces {
        s.push_str(",cd,cl");
    }
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{:.6e},{:.12e},{:.3e},{:.3e}", r.t, r.norm, r.div_max, r.normal_jump_max));
        if forces {
            let (cd, cl) = r.drag_lift.unwrap_or((f64::NAN, f64::NAN));
            s.push_str(&format!(",{cd:.8e},{cl:.8e}"));
        }
        s.push('\n');
    }
    s
}
