//! Orthonormal polynomial families on the reference interval and triangle.
//!
//! The reference interval is `[0, 1]`; the reference triangle has vertices
//! `(0,0), (1,0), (0,1)` and area `1/2`. Both families are orthonormal with
//! respect to the plain Lebesgue measure on their reference cell.

use crate::scalar::Scalar;

/// Which reference cell a [`ScalarBasis`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceCell {
    Interval,
    Triangle,
}

/// A hierarchical polynomial basis of total degree `order` on a reference cell.
///
/// The functions are ordered by increasing degree, so the first
/// `dim(m)` functions span the polynomials of degree `m` for every `m <= order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarBasis {
    pub cell: ReferenceCell,
    pub order: usize,
    pub orthonormal: bool,
}

/// Values and gradients of every basis function at a list of points.
///
/// `values[q][j]` is function `j` at point `q`; `grads[q][j]` its gradient
/// (the second entry is zero for interval bases).
#[derive(Debug, Clone)]
pub struct BasisTable<T> {
    pub values: Vec<Vec<T>>,
    pub grads: Vec<Vec<[T; 2]>>,
}

/// Orthonormal Dubiner basis of `P^k` on the reference triangle.
pub fn dubiner_basis(k: usize) -> ScalarBasis {
    ScalarBasis {
        cell: ReferenceCell::Triangle,
        order: k,
        orthonormal: true,
    }
}

/// Orthonormal shifted Legendre basis of `P^k` on `[0, 1]`.
pub fn legendre_facet_basis(k: usize) -> ScalarBasis {
    ScalarBasis {
        cell: ReferenceCell::Interval,
        order: k,
        orthonormal: true,
    }
}

/// Number of polynomials of total degree `<= k` in two variables.
#[inline]
pub fn triangle_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Position of the Dubiner function with collapsed indices `(p, q)`.
#[inline]
pub fn dubiner_index(p: usize, q: usize) -> usize {
    (p + q) * (p + q + 1) / 2 + q
}

impl ScalarBasis {
    pub fn dim(&self) -> usize {
        match self.cell {
            ReferenceCell::Interval => self.order + 1,
            ReferenceCell::Triangle => triangle_dim(self.order),
        }
    }

    /// Evaluates all functions (and gradients) at one point.
    pub fn eval<T: Scalar>(&self, point: [T; 2], values: &mut [T], grads: &mut [[T; 2]]) {
        match self.cell {
            ReferenceCell::Interval => {
                let mut d = vec![T::zero(); self.dim()];
                legendre_with_derivative(self.order, point[0], values, &mut d);
                for (g, dv) in grads.iter_mut().zip(d) {
                    *g = [dv, T::zero()];
                }
            }
            ReferenceCell::Triangle => dubiner_with_gradient(self.order, point, values, grads),
        }
    }

    pub fn tabulate<T: Scalar>(&self, points: &[[T; 2]]) -> BasisTable<T> {
        let n = self.dim();
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for &p in points {
            let mut v = vec![T::zero(); n];
            let mut g = vec![[T::zero(); 2]; n];
            self.eval(p, &mut v, &mut g);
            values.push(v);
            grads.push(g);
        }
        BasisTable { values, grads }
    }
}

/// Orthonormal shifted Legendre polynomials `l_0..l_k` on `[0,1]` at `t`.
pub fn legendre<T: Scalar>(k: usize, t: T) -> Vec<T> {
    let mut v = vec![T::zero(); k + 1];
    let mut d = vec![T::zero(); k + 1];
    legendre_with_derivative(k, t, &mut v, &mut d);
    v
}

/// Values and first derivatives of `l_0..l_k` at `t`.
pub fn legendre_with_derivative<T: Scalar>(k: usize, t: T, values: &mut [T], derivs: &mut [T]) {
    let two = T::c(2.0);
    let x = two * t - T::one();
    // classical P_n(x) and P_n'(x)
    let mut p_prev = T::one();
    let mut dp_prev = T::zero();
    values[0] = T::one();
    derivs[0] = T::zero();
    if k == 0 {
        return;
    }
    let mut p = x;
    let mut dp = T::one();
    values[1] = p * T::c(3.0).sqrt();
    derivs[1] = two * dp * T::c(3.0).sqrt();
    for n in 1..k {
        let nf = T::n(n);
        let a = T::n(2 * n + 1);
        let p_next = (a * x * p - nf * p_prev) / (nf + T::one());
        let dp_next = (a * (p + x * dp) - nf * dp_prev) / (nf + T::one());
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        let scale = T::n(2 * n + 3).sqrt();
        values[n + 1] = p * scale;
        derivs[n + 1] = two * dp * scale;
    }
}

fn jacobi_recurrence<T: Scalar>(a: usize, b: usize, n: usize) -> (T, T, T) {
    let (a, b, n) = (T::n(a), T::n(b), T::n(n));
    let one = T::one();
    let two = T::c(2.0);
    let an = (two * n + one + a + b) * (two * n + two + a + b) / (two * (n + one) * (n + one + a + b));
    let bn = (a * a - b * b) * (two * n + one + a + b)
        / (two * (n + one) * (two * n + a + b) * (n + one + a + b));
    let cn = (n + a) * (n + b) * (two * n + two + a + b)
        / ((n + one) * (n + one + a + b) * (two * n + a + b));
    (an, bn, cn)
}

/// Dubiner functions and their reference gradients at `point`.
///
/// Uses the collapsed-coordinate recurrences written directly in Cartesian
/// coordinates, so there is no singularity at the collapsed vertex.
pub fn dubiner_with_gradient<T: Scalar>(k: usize, point: [T; 2], v: &mut [T], g: &mut [[T; 2]]) {
    let one = T::one();
    let half = T::c(0.5);
    let two = T::c(2.0);
    // coordinates on the (-1,-1), (1,-1), (-1,1) triangle
    let x = two * point[0] - one;
    let y = two * point[1] - one;
    let f1 = half * (one + two * x + y);
    let (f1x, f1y) = (one, half);
    let f2 = half * (one - y);
    let f3 = f2 * f2;
    let f3y = -f2;

    // derivative slots hold d/dx, d/dy on the big triangle until the end
    let idx = dubiner_index;
    v[0] = one;
    g[0] = [T::zero(); 2];
    if k >= 1 {
        v[idx(1, 0)] = f1;
        g[idx(1, 0)] = [f1x, f1y];
    }
    for p in 1..k {
        let a = T::n(2 * p + 1) / T::n(p + 1);
        let b = T::n(p) / T::n(p + 1);
        let (c, m) = (idx(p, 0), idx(p - 1, 0));
        let val = a * f1 * v[c] - b * f3 * v[m];
        let dx = a * (f1x * v[c] + f1 * g[c][0]) - b * f3 * g[m][0];
        let dy = a * (f1y * v[c] + f1 * g[c][1]) - b * (f3y * v[m] + f3 * g[m][1]);
        v[idx(p + 1, 0)] = val;
        g[idx(p + 1, 0)] = [dx, dy];
    }
    for p in 0..k {
        let c = idx(p, 0);
        let s = half * (T::n(1 + 2 * p) + T::n(3 + 2 * p) * y);
        let sy = half * T::n(3 + 2 * p);
        v[idx(p, 1)] = v[c] * s;
        g[idx(p, 1)] = [g[c][0] * s, g[c][1] * s + v[c] * sy];
    }
    for p in 0..k.saturating_sub(1) {
        for q in 1..(k - p) {
            let (a1, a2, a3) = jacobi_recurrence::<T>(2 * p + 1, 0, q);
            let (c, m) = (idx(p, q), idx(p, q - 1));
            let s = a1 * y + a2;
            v[idx(p, q + 1)] = s * v[c] - a3 * v[m];
            g[idx(p, q + 1)] = [
                s * g[c][0] - a3 * g[m][0],
                a1 * v[c] + s * g[c][1] - a3 * g[m][1],
            ];
        }
    }
    // normalize to the area-1/2 reference triangle and switch to (xi, eta) derivatives
    for p in 0..=k {
        for q in 0..=(k - p) {
            let i = idx(p, q);
            let scale = two * ((T::n(p) + half) * T::n(p + q + 1)).sqrt();
            v[i] = v[i] * scale;
            g[i] = [g[i][0] * scale * two, g[i][1] * scale * two];
        }
    }
}
