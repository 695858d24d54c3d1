//! Closed-form flows and data used by the scenarios and tests.

use std::f64::consts::PI;

use crate::analysis::ExactFlow;

/// Kovasznay's steady Navier-Stokes solution on `[-1/2, 1] x [-1/2, 3/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kovasznay {
    pub nu: f64,
    pub lambda: f64,
    /// Constant making the pressure mean-free on the domain.
    pub pressure_shift: f64,
}

impl Kovasznay {
    pub fn new(nu: f64) -> Self {
        let lambda = kovasznay_lambda(nu);
        // mean of -e^{2 lambda x}/2 over x in [-1/2, 1]
        let mean = -((2.0 * lambda).exp() - (-lambda).exp()) / (4.0 * lambda * 1.5);
        Kovasznay {
            nu,
            lambda,
            pressure_shift: -mean,
        }
    }

    /// `f = -(u . grad) u`, which turns the flow into a Stokes solution with the same pressure.
    pub fn forcing(&self, x: [f64; 2]) -> [f64; 2] {
        let u = self.velocity(x);
        let g = self.gradient(x);
        [
            -(u[0] * g[0][0] + u[1] * g[0][1]),
            -(u[0] * g[1][0] + u[1] * g[1][1]),
        ]
    }

    /// `-nu Lap u + grad p` evaluated on the exact solution.
    pub fn stokes_forcing(&self, x: [f64; 2]) -> [f64; 2] {
        let l = self.lambda;
        let e = (l * x[0]).exp();
        let (s, c) = (2.0 * PI * x[1]).sin_cos();
        let k2 = 4.0 * PI * PI;
        let lap = [-(l * l - k2) * e * c, l / (2.0 * PI) * (l * l - k2) * e * s];
        let dp = -l * (2.0 * l * x[0]).exp();
        [-self.nu * lap[0] + dp, -self.nu * lap[1]]
    }
}

pub fn kovasznay_lambda(nu: f64) -> f64 {
    1.0 / (2.0 * nu) - (1.0 / (4.0 * nu * nu) + 4.0 * PI * PI).sqrt()
}

impl ExactFlow for Kovasznay {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let e = (self.lambda * x[0]).exp();
        let (s, c) = (2.0 * PI * x[1]).sin_cos();
        [1.0 - e * c, self.lambda / (2.0 * PI) * e * s]
    }

    fn gradient(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let l = self.lambda;
        let e = (l * x[0]).exp();
        let (s, c) = (2.0 * PI * x[1]).sin_cos();
        [
            [-l * e * c, 2.0 * PI * e * s],
            [l * l / (2.0 * PI) * e * s, l * e * c],
        ]
    }

    fn pressure(&self, x: [f64; 2]) -> f64 {
        -0.5 * (2.0 * self.lambda * x[0]).exp() + self.pressure_shift
    }
}

/// Smooth solenoidal velocity vanishing on the unit square boundary with a mean-free pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub nu: f64,
}

impl Manufactured {
    pub fn forcing(&self, x: [f64; 2]) -> [f64; 2] {
        let (s2x, c2x) = (2.0 * PI * x[0]).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x[1]).sin_cos();
        let p3 = 2.0 * PI.powi(3);
        let lap = [p3 * s2y * (2.0 * c2x - 1.0), -p3 * s2x * (2.0 * c2y - 1.0)];
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let dp = [PI * cx * cy, -PI * sx * sy];
        [-self.nu * lap[0] + dp[0], -self.nu * lap[1] + dp[1]]
    }
}

impl ExactFlow for Manufactured {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        [
            PI * sx * sx * (2.0 * PI * x[1]).sin(),
            -PI * (2.0 * PI * x[0]).sin() * sy * sy,
        ]
    }

    fn gradient(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let (s2x, c2x) = (2.0 * PI * x[0]).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x[1]).sin_cos();
        let p2 = PI * PI;
        [
            [p2 * s2x * s2y, p2 * (1.0 - c2x) * c2y],
            [-p2 * c2x * (1.0 - c2y), -p2 * s2x * s2y],
        ]
    }

    fn pressure(&self, x: [f64; 2]) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).cos()
    }
}

/// Zero velocity driven by the gradient force `grad(x^4 + y^4)` on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientForcing;

impl GradientForcing {
    pub fn forcing(&self, x: [f64; 2]) -> [f64; 2] {
        [4.0 * x[0].powi(3), 4.0 * x[1].powi(3)]
    }
}

impl ExactFlow for GradientForcing {
    fn velocity(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }

    fn gradient(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }

    fn pressure(&self, x: [f64; 2]) -> f64 {
        x[0].powi(4) + x[1].powi(4) - 0.4
    }
}

/// Planar lattice flow on the periodic unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub nu: f64,
}

impl Lattice {
    pub fn initial(x: [f64; 2]) -> [f64; 2] {
        let (s2x, c2x) = (2.0 * PI * x[0]).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x[1]).sin_cos();
        [s2x * s2y, c2x * c2y]
    }

    /// `||u_0||_{L2}`.
    pub fn initial_norm() -> f64 {
        0.5f64.sqrt()
    }

    /// Exact `L2` norm at time `t`.
    pub fn exact_norm(&self, t: f64) -> f64 {
        Self::initial_norm() * (-8.0 * PI * PI * self.nu * t).exp()
    }
}

/// Channel height of the cylinder benchmark.
pub const CHANNEL_HEIGHT: f64 = 0.41;

/// Parabolic inflow with unit mean velocity; zero on walls and the cylinder.
pub fn channel_inflow(x: [f64; 2]) -> [f64; 2] {
    if x[0] > 1e-12 {
        return [0.0; 2];
    }
    let y = x[1];
    [6.0 * y * (CHANNEL_HEIGHT - y) / (CHANNEL_HEIGHT * CHANNEL_HEIGHT), 0.0]
}
