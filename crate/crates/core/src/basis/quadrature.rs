//! Gauss rules on `[0, 1]` and collapsed (Duffy) tensor rules on the reference triangle.

use crate::scalar::Scalar;

/// Quadrature points and weights on a `D`-dimensional reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T, const D: usize> {
    pub points: Vec<[T; D]>,
    pub weights: Vec<T>,
    /// Polynomials of total degree up to this value are integrated exactly.
    pub exact_degree: usize,
}

impl<T: Scalar, const D: usize> QuadratureRule<T, D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrates `f` with this rule on the reference cell.
    pub fn integrate(&self, f: impl Fn([T; D]) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&p, &w)| acc + w * f(p))
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
///
/// Points are sorted ascending and exactly symmetric: `t[n-1-i] == 1 - t[i]`.
pub fn gauss_rule<T: Scalar>(n: usize) -> QuadratureRule<T, 1> {
    assert!(n >= 1, "gauss rule needs at least one point");
    let one = T::one();
    let two = T::c(2.0);
    let half = T::c(0.5);
    let mut points = vec![[T::zero()]; n];
    let mut weights = vec![T::zero(); n];
    let nf = T::n(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th largest root on [-1, 1]
        let mut x = (T::PI() * (T::n(i) + T::c(0.75)) / (nf + half)).cos();
        let mut dp = one;
        for _ in 0..100 {
            let (p, d) = legendre_pn(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::c(4.0) {
                break;
            }
        }
        let (_, d) = legendre_pn(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((one - x * x) * dp * dp);
        // x is the i-th largest root: place both mirror points
        let t_hi = half * (one + x);
        let t_lo = one - t_hi;
        points[n - 1 - i] = [t_hi];
        points[i] = [t_lo];
        weights[n - 1 - i] = half * w;
        weights[i] = half * w;
    }
    if n % 2 == 1 {
        points[n / 2] = [half];
    }
    QuadratureRule {
        points,
        weights,
        exact_degree: 2 * n - 1,
    }
}

/// Classical Legendre polynomial `P_n(x)` and its derivative.
fn legendre_pn<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for j in 1..n {
        let jf = T::n(j);
        let p2 = (T::n(2 * j + 1) * x * p1 - jf * p0) / (jf + T::one());
        p0 = p1;
        p1 = p2;
    }
    let d = T::n(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Rule on the reference triangle exact for total degree `degree`.
///
/// Built from the collapsed map `(s, t) -> (s, t (1 - s))` with Jacobian
/// `1 - s`, so the `s` direction carries one extra degree.
pub fn triangle_rule<T: Scalar>(degree: usize) -> QuadratureRule<T, 2> {
    let ns = (degree + 2).div_ceil(2).max(1);
    let nt = (degree + 1).div_ceil(2).max(1);
    let gs = gauss_rule::<T>(ns);
    let gt = gauss_rule::<T>(nt);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (ps, ws) in gs.points.iter().zip(&gs.weights) {
        let s = ps[0];
        for (pt, wt) in gt.points.iter().zip(&gt.weights) {
            let t = pt[0];
            points.push([s, t * (T::one() - s)]);
            weights.push(*ws * *wt * (T::one() - s));
        }
    }
    QuadratureRule {
        points,
        weights,
        exact_degree: (2 * ns - 2).min(2 * nt - 1).max(degree),
    }
}
